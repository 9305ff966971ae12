#include "robustgen/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "robustgen/errors.hpp"
#include "robustgen/network.hpp"
#include "robustgen/rng.hpp"
#include "robustgen/text.hpp"

namespace robustgen {

namespace {

int argmax_row(const double* row, int n) {
    int best = 0;
    for (int j = 1; j < n; ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

void flip_labels(std::vector<int>& labels, int num_classes, double noise_level, Rng& rng) {
    if (noise_level <= 0.0) return;
    for (int& y : labels) {
        if (rng.uniform01() < noise_level)
            y = static_cast<int>((y + 1 + rng.uniform_below(num_classes - 1)) % num_classes);
    }
}

Dataset draw_teacher(const DatasetSpec& spec, int n, Rng& feature_rng, Rng& noise_rng,
                     const nn::Network& teacher) {
    Dataset ds;
    ds.features = nn::Tensor({static_cast<std::size_t>(n),
                              static_cast<std::size_t>(spec.input_dim)});
    for (double& v : ds.features.data) v = feature_rng.normal();
    nn::Tensor logits = nn::forward(teacher, ds.features);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i)
        ds.labels[i] = argmax_row(logits.data.data() + i * spec.num_classes, spec.num_classes);
    flip_labels(ds.labels, spec.num_classes, spec.noise_level, noise_rng);
    return ds;
}

Dataset draw_blobs(const DatasetSpec& spec, int n, Rng& feature_rng, Rng& noise_rng,
                   const std::vector<double>& centers) {
    Dataset ds;
    ds.features = nn::Tensor({static_cast<std::size_t>(n),
                              static_cast<std::size_t>(spec.input_dim)});
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(feature_rng.uniform_below(spec.num_classes));
        ds.labels[i] = c;
        double* row = ds.features.data.data() + static_cast<std::size_t>(i) * spec.input_dim;
        const double* mu = centers.data() + static_cast<std::size_t>(c) * spec.input_dim;
        for (int j = 0; j < spec.input_dim; ++j) row[j] = mu[j] + feature_rng.normal();
    }
    flip_labels(ds.labels, spec.num_classes, spec.noise_level, noise_rng);
    return ds;
}

std::pair<Dataset, Dataset> load_external(const DatasetSpec& spec, int train_size,
                                          int test_size, std::uint64_t seed) {
    std::ifstream in(spec.path);
    if (!in) throw IngestionError("cannot open dataset file: " + spec.path);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split(t, ',');
        if (fields.size() < 2)
            throw IngestionError(spec.path + ":" + std::to_string(lineno) +
                                 ": need at least one feature and a label");
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw IngestionError(spec.path + ":" + std::to_string(lineno) + ": ragged row");
        std::vector<double> feat(width - 1);
        try {
            for (std::size_t j = 0; j + 1 < width; ++j) feat[j] = parse_double(trim(fields[j]));
            const long long y = parse_int(trim(fields.back()));
            if (y < 0 || y >= spec.num_classes)
                throw IngestionError(spec.path + ":" + std::to_string(lineno) +
                                     ": label out of range");
            labels.push_back(static_cast<int>(y));
        } catch (const ParseError& e) {
            throw IngestionError(spec.path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        rows.push_back(std::move(feat));
    }
    const std::size_t need = static_cast<std::size_t>(train_size) + test_size;
    if (rows.size() < need)
        throw IngestionError(spec.path + ": have " + std::to_string(rows.size()) +
                             " rows, need " + std::to_string(need));

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "external-split"));
    rng.shuffle(order);

    auto take = [&](std::size_t from, int count) {
        Dataset ds;
        ds.features = nn::Tensor({static_cast<std::size_t>(count), width - 1});
        ds.labels.resize(count);
        for (int i = 0; i < count; ++i) {
            const auto& src = rows[order[from + i]];
            std::copy(src.begin(), src.end(),
                      ds.features.data.begin() + static_cast<std::size_t>(i) * (width - 1));
            ds.labels[i] = labels[order[from + i]];
        }
        return ds;
    };
    return {take(0, train_size), take(train_size, test_size)};
}

}  // namespace

std::pair<Dataset, Dataset> make_dataset(const DatasetSpec& spec, int train_size,
                                         int test_size, std::uint64_t seed) {
    if (train_size <= 0 || test_size <= 0)
        throw EmptyDataError("dataset sizes must be positive");
    if (spec.kind == DatasetKind::external_file)
        return load_external(spec, train_size, test_size, seed);
    if (spec.num_classes < 2) throw EmptyDataError("need at least two classes");

    Rng feature_rng(derive_seed(seed, "features"));
    Rng noise_rng(derive_seed(seed, "label-noise"));

    if (spec.kind == DatasetKind::teacher_network) {
        // The labeler is fixed by generator_seed alone: every draw from this
        // source sees the same teacher.
        const auto teacher = nn::make_dense_network(
            {static_cast<std::size_t>(spec.input_dim),
             static_cast<std::size_t>(spec.teacher_width),
             static_cast<std::size_t>(spec.num_classes)},
            false, derive_seed(spec.generator_seed, "teacher-weights"));
        Dataset train = draw_teacher(spec, train_size, feature_rng, noise_rng, teacher);
        Dataset test = draw_teacher(spec, test_size, feature_rng, noise_rng, teacher);
        return {std::move(train), std::move(test)};
    }

    // gaussian_blobs: unit-variance spheres around class centers placed at
    // blob_separation times a random unit direction.
    std::vector<double> centers(static_cast<std::size_t>(spec.num_classes) * spec.input_dim);
    Rng center_rng(derive_seed(spec.generator_seed, "blob-centers"));
    for (int c = 0; c < spec.num_classes; ++c) {
        double* mu = centers.data() + static_cast<std::size_t>(c) * spec.input_dim;
        double norm_sq = 0.0;
        for (int j = 0; j < spec.input_dim; ++j) {
            mu[j] = center_rng.normal();
            norm_sq += mu[j] * mu[j];
        }
        const double scale = spec.blob_separation / std::sqrt(norm_sq);
        for (int j = 0; j < spec.input_dim; ++j) mu[j] *= scale;
    }
    Dataset train = draw_blobs(spec, train_size, feature_rng, noise_rng, centers);
    Dataset test = draw_blobs(spec, test_size, feature_rng, noise_rng, centers);
    return {std::move(train), std::move(test)};
}

}  // namespace robustgen

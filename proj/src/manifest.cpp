#include "robustgen/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "robustgen/errors.hpp"
#include "robustgen/rng.hpp"
#include "robustgen/text.hpp"

namespace robustgen {

using nlohmann::json;

std::string dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::teacher_network: return "teacher_network";
        case DatasetKind::gaussian_blobs: return "gaussian_blobs";
        case DatasetKind::external_file: return "external_file";
    }
    throw Error("dataset_kind_name: bad enum value");
}

namespace {

DatasetKind dataset_kind_from_name(const std::string& name) {
    if (name == "teacher_network") return DatasetKind::teacher_network;
    if (name == "gaussian_blobs") return DatasetKind::gaussian_blobs;
    if (name == "external_file") return DatasetKind::external_file;
    throw ConfigError("manifest: unknown dataset kind '" + name + "'");
}

void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                 const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("manifest: unknown key '" + key + "' in " + where);
    }
}

void get_double(const json& obj, const char* key, double& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("manifest: " + where + "." + key + " must be a number");
    out = v.get<double>();
}

void get_int(const json& obj, const char* key, int& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("manifest: " + where + "." + key + " must be an integer");
    out = v.get<int>();
}

void get_u64(const json& obj, const char* key, std::uint64_t& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!(v.is_number_integer() && v.get<long long>() >= 0) && !v.is_number_unsigned())
        throw ConfigError("manifest: " + where + "." + key + " must be a nonnegative integer");
    out = v.get<std::uint64_t>();
}

void get_bool(const json& obj, const char* key, bool& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError("manifest: " + where + "." + key + " must be a bool");
    out = v.get<bool>();
}

void get_string(const json& obj, const char* key, std::string& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError("manifest: " + where + "." + key + " must be a string");
    out = v.get<std::string>();
}

template <typename T>
std::vector<T> number_list(const json& v, const std::string& where, bool integral) {
    if (!v.is_array()) throw ConfigError("manifest: " + where + " must be an array");
    std::vector<T> out;
    for (const json& e : v) {
        if (integral ? !e.is_number_integer() : !e.is_number())
            throw ConfigError("manifest: " + where + " holds a non-" +
                              (integral ? std::string("integer") : std::string("numeric")) +
                              " entry");
        out.push_back(e.get<T>());
    }
    return out;
}

GridSpec parse_grid(const json& g) {
    expect_keys(g, {"learning_rates", "depths", "widths", "dataset_ids", "train_sizes"}, "grid");
    GridSpec spec;
    if (g.contains("learning_rates"))
        spec.learning_rates = number_list<double>(g.at("learning_rates"), "grid.learning_rates", false);
    if (g.contains("depths")) spec.depths = number_list<int>(g.at("depths"), "grid.depths", true);
    if (g.contains("widths")) spec.widths = number_list<int>(g.at("widths"), "grid.widths", true);
    if (g.contains("train_sizes"))
        spec.train_sizes = number_list<int>(g.at("train_sizes"), "grid.train_sizes", true);
    if (g.contains("dataset_ids")) {
        const json& ids = g.at("dataset_ids");
        if (!ids.is_array()) throw ConfigError("manifest: grid.dataset_ids must be an array");
        for (const json& e : ids) {
            if (!e.is_string())
                throw ConfigError("manifest: grid.dataset_ids holds a non-string entry");
            spec.dataset_ids.push_back(e.get<std::string>());
        }
    }
    return spec;
}

DatasetSpec parse_dataset(const json& d, const std::string& id) {
    const std::string where = "datasets." + id;
    expect_keys(d,
                {"kind", "input_dim", "num_classes", "noise_level", "generator_seed",
                 "teacher_width", "blob_separation", "path"},
                where);
    DatasetSpec spec;
    std::string kind = dataset_kind_name(spec.kind);
    get_string(d, "kind", kind, where);
    spec.kind = dataset_kind_from_name(kind);
    get_int(d, "input_dim", spec.input_dim, where);
    get_int(d, "num_classes", spec.num_classes, where);
    get_double(d, "noise_level", spec.noise_level, where);
    get_u64(d, "generator_seed", spec.generator_seed, where);
    get_int(d, "teacher_width", spec.teacher_width, where);
    get_double(d, "blob_separation", spec.blob_separation, where);
    get_string(d, "path", spec.path, where);
    return spec;
}

template <typename T, typename F>
void join_list(std::string& out, const std::vector<T>& v, F format) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format(v[i]);
    }
    out += ']';
}

}  // namespace

std::string RunManifest::canonical_settings() const {
    const auto fmt_int = [](auto v) { return std::to_string(v); };
    const auto fmt_dbl = [](double v) { return format_double(v); };
    std::string s = "tool=";
    s += kToolVersion;
    s += ";grid{lr=";
    join_list(s, grid.learning_rates, fmt_dbl);
    s += ";depth=";
    join_list(s, grid.depths, fmt_int);
    s += ";width=";
    join_list(s, grid.widths, fmt_int);
    s += ";ds=";
    join_list(s, grid.dataset_ids, [](const std::string& v) { return v; });
    s += ";m=";
    join_list(s, grid.train_sizes, fmt_int);
    s += "};datasets{";
    for (const auto& [id, d] : datasets) {
        s += id + "{kind=" + dataset_kind_name(d.kind) +
             ";input_dim=" + std::to_string(d.input_dim) +
             ";num_classes=" + std::to_string(d.num_classes) +
             ";noise=" + format_double(d.noise_level) +
             ";gen_seed=" + std::to_string(d.generator_seed) +
             ";teacher_width=" + std::to_string(d.teacher_width) +
             ";blob_sep=" + format_double(d.blob_separation) + ";path=" + d.path + "}";
    }
    s += "};sweep{seeds=" + std::to_string(sweep.num_seeds) +
         ";test=" + std::to_string(sweep.test_size) +
         ";master=" + std::to_string(sweep.master_seed) +
         ";momentum=" + format_double(sweep.momentum) +
         ";ce=" + format_double(sweep.ce_target) +
         ";epochs=" + std::to_string(sweep.max_epochs) +
         ";batch=" + std::to_string(sweep.batch_size) + "}";
    s += ";measure{delta=" + format_double(measure.delta) +
         ";eps=" + format_double(measure.epsilon) +
         ";pct=" + std::to_string(measure.margin_percentile) +
         ";target=" + format_double(measure.sigma_target) +
         ";mc=" + std::to_string(measure.mc_samples) +
         ";smin=" + format_double(measure.sigma_min) +
         ";smax=" + format_double(measure.sigma_max) +
         ";stol=" + format_double(measure.sigma_tol) +
         ";pb_init_delta=" + (measure.pacbayes_init_log_m_over_delta ? "1" : "0") +
         ";ce_search=" + (measure.sigma_search_on_cross_entropy ? "1" : "0") + "}";
    s += ";eval{n_eff_min=" + format_double(evaluation.n_eff_min) +
         ";noise_filter=" + (evaluation.noise_filter ? "1" : "0") + "}";
    return s;
}

std::string RunManifest::hash() const {
    const std::uint64_t h = fnv1a64(canonical_settings());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

SweepOptions RunManifest::sweep_options() const {
    SweepOptions opts = sweep;
    opts.datasets = datasets;
    opts.checkpoint_dir = checkpoint_dir;
    opts.manifest_hash = hash();
    return opts;
}

void RunManifest::validate() const {
    const auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("manifest: " + msg);
    };
    require(!grid.learning_rates.empty(), "grid.learning_rates is empty");
    require(!grid.depths.empty(), "grid.depths is empty");
    require(!grid.widths.empty(), "grid.widths is empty");
    require(!grid.dataset_ids.empty(), "grid.dataset_ids is empty");
    require(!grid.train_sizes.empty(), "grid.train_sizes is empty");
    for (double lr : grid.learning_rates)
        require(lr > 0.0, "learning rate " + format_double(lr) + " must be positive");
    for (int d : grid.depths) require(d >= 1, "depth must be at least 1");
    for (int w : grid.widths) require(w >= 1, "width must be at least 1");
    for (int m : grid.train_sizes) require(m >= 1, "train size must be at least 1");
    for (const std::string& id : grid.dataset_ids)
        require(datasets.count(id) != 0, "grid references dataset id '" + id + "' with no spec");
    for (const auto& [id, d] : datasets) {
        require(d.input_dim >= 1, "datasets." + id + ".input_dim must be at least 1");
        require(d.num_classes >= 2, "datasets." + id + ".num_classes must be at least 2");
        require(d.noise_level >= 0.0 && d.noise_level < 1.0,
                "datasets." + id + ".noise_level must be in [0, 1)");
        require(d.teacher_width >= 1, "datasets." + id + ".teacher_width must be at least 1");
        require(d.kind != DatasetKind::external_file || !d.path.empty(),
                "datasets." + id + " is external but has no path");
    }
    require(sweep.num_seeds >= 1, "sweep.num_seeds must be at least 1");
    require(sweep.test_size >= 1, "sweep.test_size must be at least 1");
    require(sweep.momentum >= 0.0 && sweep.momentum < 1.0, "sweep.momentum must be in [0, 1)");
    require(sweep.ce_target > 0.0, "sweep.ce_target must be positive");
    require(sweep.max_epochs >= 1, "sweep.max_epochs must be at least 1");
    require(sweep.batch_size >= 1, "sweep.batch_size must be at least 1");
    require(measure.delta > 0.0 && measure.delta < 1.0, "measure.delta must be in (0, 1)");
    require(measure.epsilon > 0.0, "measure.epsilon must be positive");
    require(measure.margin_percentile >= 0 && measure.margin_percentile <= 100,
            "measure.margin_percentile must be in [0, 100]");
    require(measure.sigma_target > 0.0 && measure.sigma_target < 1.0,
            "measure.sigma_target must be in (0, 1)");
    require(measure.mc_samples >= 1, "measure.mc_samples must be at least 1");
    require(measure.sigma_min > 0.0, "measure.sigma_min must be positive");
    require(measure.sigma_max > measure.sigma_min,
            "measure.sigma_max must exceed measure.sigma_min");
    require(measure.sigma_tol > 0.0, "measure.sigma_tol must be positive");
    require(evaluation.n_eff_min >= 0.0, "evaluation.n_eff_min must be nonnegative");
}

RunManifest parse_manifest(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("manifest: top level must be an object");
    expect_keys(j, {"grid", "datasets", "sweep", "measure", "evaluation", "paths"}, "manifest");
    if (!j.contains("grid")) throw ConfigError("manifest: missing required section 'grid'");
    if (!j.contains("datasets")) throw ConfigError("manifest: missing required section 'datasets'");

    RunManifest m;
    m.grid = parse_grid(j.at("grid"));
    const json& ds = j.at("datasets");
    if (!ds.is_object()) throw ConfigError("manifest: datasets must be an object");
    for (const auto& [id, spec] : ds.items()) m.datasets[id] = parse_dataset(spec, id);

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        expect_keys(s,
                    {"num_seeds", "test_size", "master_seed", "momentum", "ce_target",
                     "max_epochs", "batch_size"},
                    "sweep");
        get_int(s, "num_seeds", m.sweep.num_seeds, "sweep");
        get_int(s, "test_size", m.sweep.test_size, "sweep");
        get_u64(s, "master_seed", m.sweep.master_seed, "sweep");
        get_double(s, "momentum", m.sweep.momentum, "sweep");
        get_double(s, "ce_target", m.sweep.ce_target, "sweep");
        get_int(s, "max_epochs", m.sweep.max_epochs, "sweep");
        get_int(s, "batch_size", m.sweep.batch_size, "sweep");
    }
    if (j.contains("measure")) {
        const json& s = j.at("measure");
        expect_keys(s,
                    {"delta", "epsilon", "margin_percentile", "sigma_target", "mc_samples",
                     "sigma_min", "sigma_max", "sigma_tol", "pacbayes_init_log_m_over_delta",
                     "sigma_search_on_cross_entropy"},
                    "measure");
        get_double(s, "delta", m.measure.delta, "measure");
        get_double(s, "epsilon", m.measure.epsilon, "measure");
        get_int(s, "margin_percentile", m.measure.margin_percentile, "measure");
        get_double(s, "sigma_target", m.measure.sigma_target, "measure");
        get_int(s, "mc_samples", m.measure.mc_samples, "measure");
        get_double(s, "sigma_min", m.measure.sigma_min, "measure");
        get_double(s, "sigma_max", m.measure.sigma_max, "measure");
        get_double(s, "sigma_tol", m.measure.sigma_tol, "measure");
        get_bool(s, "pacbayes_init_log_m_over_delta", m.measure.pacbayes_init_log_m_over_delta,
                 "measure");
        get_bool(s, "sigma_search_on_cross_entropy", m.measure.sigma_search_on_cross_entropy,
                 "measure");
    }
    if (j.contains("evaluation")) {
        const json& s = j.at("evaluation");
        expect_keys(s, {"n_eff_min", "noise_filter"}, "evaluation");
        get_double(s, "n_eff_min", m.evaluation.n_eff_min, "evaluation");
        get_bool(s, "noise_filter", m.evaluation.noise_filter, "evaluation");
    }
    if (j.contains("paths")) {
        const json& s = j.at("paths");
        expect_keys(s, {"store", "checkpoints"}, "paths");
        get_string(s, "store", m.store_path, "paths");
        get_string(s, "checkpoints", m.checkpoint_dir, "paths");
    }
    return m;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunManifest m = parse_manifest(buf.str());

    if (const char* env = std::getenv("ROBUSTGEN_SEED"); env != nullptr && *env != '\0') {
        unsigned long long v = 0;
        const std::string s(env);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw ConfigError("ROBUSTGEN_SEED must be a nonnegative integer, got '" + s + "'");
        m.sweep.master_seed = v;
    }
    m.validate();
    return m;
}

}  // namespace robustgen

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "robustgen/tensor.hpp"

namespace robustgen {

enum class DatasetKind { teacher_network, gaussian_blobs, external_file };

// Recipe for a classification data source. noise_level is the fraction of
// labels flipped (uniformly to another class) after clean generation;
// generator_seed fixes source-level randomness (teacher weights, blob
// centers) so the source itself is identical across draws.
struct DatasetSpec {
    DatasetKind kind = DatasetKind::teacher_network;
    int input_dim = 16;
    int num_classes = 4;
    double noise_level = 0.0;
    std::uint64_t generator_seed = 0;
    int teacher_width = 32;   // hidden width of the labeling network
    double blob_separation = 4.0;
    std::string path;         // external_file only: CSV of features,label rows
};

struct Dataset {
    nn::Tensor features;      // [n, input_dim]
    std::vector<int> labels;  // values in [0, num_classes)

    std::size_t size() const { return labels.size(); }
};

// Draws a (train, test) pair of the requested sizes. Draws are sequential
// from one seeded stream, so the two sets are disjoint samples of the same
// distribution, and the whole call is deterministic given (spec, sizes, seed).
// external_file sources are split by a seeded shuffle of the file's rows;
// IngestionError if the file is missing, ragged, non-numeric, holds labels
// outside [0, num_classes), or has fewer than train_size + test_size rows.
std::pair<Dataset, Dataset> make_dataset(const DatasetSpec& spec, int train_size,
                                         int test_size, std::uint64_t seed);

}  // namespace robustgen

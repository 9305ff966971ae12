#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robustgen/config.hpp"
#include "robustgen/dataset.hpp"
#include "robustgen/store.hpp"

namespace robustgen {

struct SweepOptions {
    int num_seeds = 10;
    int test_size = 4096;
    std::uint64_t master_seed = 1;
    double momentum = 0.9;
    double ce_target = 0.01;
    int max_epochs = 2000;
    int batch_size = 32;
    // Dataset id referenced by configs -> how to synthesize or load it.
    std::map<std::string, DatasetSpec> datasets;
    // Directory for weight checkpoints; empty disables checkpointing.
    std::string checkpoint_dir;
    std::string manifest_hash;
    bool verbose = false;
};

struct SweepSummary {
    int trained = 0;    // runs executed this invocation
    int skipped = 0;    // (config, seed) pairs already present in the store
    int converged = 0;  // of the runs executed this invocation
    int failed = 0;
};

// Filesystem-safe name for one run, derived from the config key and seed
// index. Stable across invocations so reruns overwrite their own checkpoint.
std::string run_slug(const HyperparameterConfig& config, int seed_index);

// Trains every (config, seed) pair not yet in the store, in grid order with
// seeds innermost. Each run appends one record (converged or failed) before
// the next starts, so an interrupted sweep resumes where it stopped. A
// failure confined to one run (divergence, checkpoint write error) is
// recorded or reported and the sweep continues.
SweepSummary run_grid(const std::vector<HyperparameterConfig>& grid, const SweepOptions& opts,
                      RecordStore& store);

}  // namespace robustgen

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "robustgen/config.hpp"
#include "robustgen/trainer.hpp"

namespace robustgen {

// Result of one training run: the sweep cell, its seed index, the error
// statistics the analysis consumes, and (once computed) the complexity
// measure vector. gap is stored explicitly and always equals
// test_error - train_error of the stored fields. Records serialize to one
// JSON object per line; doubles round-trip exactly, non-finite values map to
// null and back to NaN. A measure entry with a null value is the
// undefined-measure marker.
struct ExperimentRecord {
    int schema_version = 1;
    HyperparameterConfig config;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::failed;
    bool diverged = false;
    double train_error = 0.0;
    double test_error = 0.0;
    double gap = 0.0;
    double final_cross_entropy = 0.0;
    int epochs_run = 0;
    int train_set_size = 0;
    int test_set_size = 0;
    std::string checkpoint_path;  // as written by the sweep (dir prefix included); empty if none
    std::string manifest_hash;
    std::map<std::string, std::optional<double>> measures;

    std::string to_json_line() const;
    static ExperimentRecord from_json_line(const std::string& line, std::size_t lineno = 0);
};

}  // namespace robustgen

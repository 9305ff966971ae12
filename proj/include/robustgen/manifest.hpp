#pragma once

#include <map>
#include <string>
#include <string_view>

#include "robustgen/config.hpp"
#include "robustgen/dataset.hpp"
#include "robustgen/measures.hpp"
#include "robustgen/robust_eval.hpp"
#include "robustgen/sweep.hpp"

namespace robustgen {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string dataset_kind_name(DatasetKind k);

// Everything one experiment is: the sweep grid, dataset recipes, training
// budget, measure parameters, and evaluation thresholds, plus default
// locations for the artifacts. The hash of the canonical settings dump is
// embedded in every derived file so a result always traces back to exact
// settings. Paths stay out of the hash: they say where artifacts live, not
// what was run.
struct RunManifest {
    GridSpec grid;
    std::map<std::string, DatasetSpec> datasets;
    SweepOptions sweep;  // dataset table / checkpoint dir / hash wired in by sweep_options()
    measures::MeasureOptions measure;
    eval::EvalOptions evaluation;
    std::string store_path = "records.jsonl";
    std::string checkpoint_dir = "checkpoints";

    // One-line dump of the hashed settings in a fixed key order with
    // shortest round-trip floats. Two files describing the same experiment
    // canonicalize to the same text no matter how they are formatted.
    std::string canonical_settings() const;

    // FNV-1a 64 of canonical_settings(), as 16 lowercase hex digits.
    std::string hash() const;

    SweepOptions sweep_options() const;

    // ConfigError on an empty grid axis, a config referencing a dataset id
    // with no spec, or an out-of-range numeric setting.
    void validate() const;
};

// Parses manifest JSON. Unknown keys are rejected so a typo cannot silently
// turn into a default. ConfigError on any structural problem.
RunManifest parse_manifest(const std::string& json_text);

// Reads `path`, parses, validates, and applies the ROBUSTGEN_SEED
// environment override. The override replaces sweep.master_seed before the
// hash is ever computed: a run seeded differently is a different experiment.
RunManifest load_manifest(const std::string& path);

}  // namespace robustgen

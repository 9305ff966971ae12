#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robustgen {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;     // unusable manifest or arguments
inline constexpr int kExitEmptyData = 3;  // a store or selection with nothing usable in it
inline constexpr int kExitBadInput = 4;   // malformed or manifest-mismatched input files

struct GenerateArgs {
    std::string config_path;
    std::string store_path;  // overrides the manifest's paths.store when set
    bool verbose = false;
};

struct MeasureArgs {
    std::string config_path;
    std::string store_path;
};

struct EvaluateArgs {
    std::string config_path;
    std::string store_path;
    std::vector<std::string> axes;  // empty: every axis present
    double n_eff_min = -1.0;        // negative: use the manifest value
    bool no_noise_filter = false;
    bool weak = false;
    std::string subset;  // keep only records of this dataset id
    std::string out_dir = ".";
    // Adds three synthetic measures before evaluation: oracle.gap (the gap
    // itself), oracle.neg.gap (its negation), oracle.const (1.0). Ground
    // truth for the sign-error machinery: 0, 1, and exactly 0.5.
    bool inject_oracles = false;
};

struct RegressArgs {
    std::string config_path;
    std::string store_path;
    std::string family = "per_config";
    std::string subset;
    std::string out_dir = ".";
};

struct ReportArgs {
    std::vector<std::string> inputs;  // summary CSVs from cmd_evaluate
    std::string out_dir = ".";
};

// Trains every missing (config, seed) cell of the manifest grid into the
// store and prints a convergence summary. Resumable: rerunning skips cells
// already present.
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

// Attaches the measure vector to every converged record that has a loadable
// checkpoint and no measures yet. Idempotent; a missing or unreadable
// checkpoint skips that record and is reported.
int cmd_measure(const MeasureArgs& args, std::ostream& out, std::ostream& err);

// Builds coupled environments from the converged records and writes
// environments.csv (one row per environment and measure) and summary.csv
// (one row per measure and family) into out_dir.
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err);

// Minimax affine fits per measure for one environment family; writes
// regression_<family>.csv into out_dir.
int cmd_regress(const RegressArgs& args, std::ostream& out, std::ostream& err);

// Renders each summary CSV to an SVG chart and a markdown digest in out_dir.
// Every input must carry the same manifest hash.
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

}  // namespace robustgen

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "robustgen/config.hpp"
#include "robustgen/record.hpp"

namespace robustgen::eval {

// Squared clamped Hoeffding confidence that an observed mean is within eps of
// its expectation at sample size m: (max(0, 1 - 2 exp(-2 m eps^2)))^2. The
// square reflects two independent estimates entering each comparison.
double chi(double eps, int m);

// Weight of one generalization-gap comparison: how confidently the observed
// gap difference orders the true gaps. chi(|dg|/2, m_test) - 0.5 clamped at
// zero, so the weight lives in [0, 0.5] and vanishes for differences
// indistinguishable from test-set sampling noise.
double kappa(double delta_g_hat, int m_test);

// (sum w)^2 / sum w^2, computed on weights normalized by their maximum so
// equal weights yield exactly the count. Zero when all weights are zero.
double effective_sample_size(const std::vector<double>& weights);

// One matched block of runs: every record on side a shares one config, every
// record on side b shares the config that differs from it on exactly the
// environment's axis. Pairs are the full a x b cross product.
struct PairBlock {
    std::vector<const ExperimentRecord*> a;
    std::vector<const ExperimentRecord*> b;
};

// A coupled environment: an intervention on one hyperparameter axis from
// value_a to value_b (canonically ascending) with everything else held fixed.
// Strict environments freeze the remaining axes to one context and hold one
// block; weak environments union the pair sets of all strict environments
// that share (axis, value_a, value_b), one block per context.
struct CoupledEnvironment {
    Axis axis = Axis::learning_rate;
    std::string value_a;
    std::string value_b;
    std::string context_key;  // frozen axes, "*" on the varied one
    bool weak = false;
    std::vector<PairBlock> blocks;

    std::size_t pair_count() const;
};

// Context id for the frozen axes of a config, e.g. "lr=*;depth=2;...".
std::string config_context_key(const HyperparameterConfig& config, Axis varied);

// All strict coupled environments present in the records: one per unordered
// pair of distinct configs differing in exactly one axis, with at least one
// record on each side. Deterministically ordered by (axis, context, values).
std::vector<CoupledEnvironment> build_coupled_environments(
    const std::vector<ExperimentRecord>& records);

// Weak environments: strict environments merged over contexts per
// (axis, value_a, value_b), ordered like the strict list.
std::vector<CoupledEnvironment> build_weak_environments(
    const std::vector<CoupledEnvironment>& strict);

std::vector<CoupledEnvironment> filter_by_axes(const std::vector<CoupledEnvironment>& envs,
                                               const std::vector<Axis>& axes);

struct EvalOptions {
    double n_eff_min = 12.0;
    // When false, every pair gets the maximal weight 0.5 instead of its
    // Hoeffding weight; the n_eff threshold then counts raw pairs.
    bool noise_filter = true;
};

// Weighted empirical sign error of one measure on one environment:
// 0.5 * sum_i k_i * (1 - sign(dC_i) sign(dG_i)) / sum_i k_i over all pairs
// with the measure defined on both sides. sign(0) = 0, so a tied comparison
// scores chance level 0.5. Also reports the weight mass, effective sample
// size, and how many pairs were dropped for undefined measure values.
struct SignErrorResult {
    double value = 0.0;
    double kappa_sum = 0.0;
    double n_eff = 0.0;
    std::size_t pairs_used = 0;     // pairs entering the sums (weight may be 0)
    std::size_t pairs_skipped = 0;  // undefined measure value on either side
    bool defined = false;           // kappa_sum > 0 and n_eff >= n_eff_min
};

SignErrorResult empirical_sign_error(const CoupledEnvironment& env,
                                     const std::string& measure, const EvalOptions& opts);

// Per-pair detail for diagnostics and exports.
struct PairDetail {
    double delta_g = 0.0;
    double delta_c = 0.0;
    double weight = 0.0;
    double loss = 0.0;  // 0.5 * (1 - sign(dC) sign(dG)), in {0, 0.5, 1}
};

std::vector<PairDetail> pairwise_value_breakdown(const CoupledEnvironment& env,
                                                 const std::string& measure,
                                                 const EvalOptions& opts);

// One measure over a set of environments. robust_value is the worst (largest)
// defined environment sign error; average_value the mean. Undefined when no
// environment survives.
struct MeasureEvaluation {
    std::string measure;
    std::vector<SignErrorResult> per_env;  // aligned with the input env list
    std::size_t envs_used = 0;
    std::size_t envs_skipped = 0;
    double robust_value = 0.0;
    double average_value = 0.0;
    bool defined = false;
};

MeasureEvaluation evaluate_measure(const std::vector<CoupledEnvironment>& envs,
                                   const std::string& measure, const EvalOptions& opts);

// Distribution summary of one measure's sign error across a family of
// environments (an axis family, or all): worst case, 90th percentile from
// above, median, and mean of the defined per-environment values.
struct FamilySummary {
    std::string measure;
    std::string family;
    std::size_t envs_used = 0;
    std::size_t envs_skipped = 0;
    double max_value = 0.0;
    double p90_value = 0.0;
    double median_value = 0.0;
    double mean_value = 0.0;
    bool defined = false;
};

FamilySummary summarize_family(const MeasureEvaluation& eval, const std::string& family);

}  // namespace robustgen::eval

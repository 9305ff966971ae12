#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustgen/config.hpp"
#include "robustgen/record.hpp"

namespace robustgen::regress {

// How records are grouped into environments for the minimax fit. An axis
// qualifies only when the records hold at least two distinct values of it.
//
//   per_config:        one environment per grid cell (its seed replicates).
//   single_axis_varies: one per (axis, frozen context): a grid line.
//   all_but_one_fixed: one per (axis, value): everything sharing that value.
enum class FamilyKind { per_config, single_axis_varies, all_but_one_fixed };

std::string family_kind_name(FamilyKind k);
std::optional<FamilyKind> family_kind_from_name(const std::string& name);

struct RegressionEnvironment {
    std::string name;
    std::vector<const ExperimentRecord*> records;
};

std::vector<RegressionEnvironment> build_family(const std::vector<ExperimentRecord>& records,
                                                FamilyKind kind);

// Sufficient statistics of one environment's (measure value, gap) sample for
// quadratic loss: every MSE below is an exact function of these moments.
struct EnvMoments {
    std::string name;
    std::size_t n = 0;
    double mean_c = 0.0;
    double mean_g = 0.0;
    double mean_cc = 0.0;
    double mean_cg = 0.0;
    double mean_gg = 0.0;
    // Exact measure range, for detecting a globally constant measure without
    // trusting cancellation in the moments.
    double c_min = 0.0;
    double c_max = 0.0;
};

// Moments of an environment for one measure; records with the measure
// undefined are dropped and counted. Empty result when nothing survives.
struct MomentsResult {
    std::vector<EnvMoments> envs;       // environments with n > 0
    std::size_t envs_dropped = 0;       // all records undefined
    std::size_t records_dropped = 0;
};

MomentsResult collect_moments(const std::vector<RegressionEnvironment>& envs,
                              const std::string& measure);

// Gap-only moments (measure identically zero) for the intercept baseline.
std::vector<EnvMoments> collect_gap_moments(const std::vector<RegressionEnvironment>& envs);

// Mean squared error of the prediction gap = a * measure + b on one
// environment, expanded through the moments.
double env_mse(const EnvMoments& e, double a, double b);

struct AffineFit {
    double slope = 0.0;      // a, constrained nonnegative
    double intercept = 0.0;  // b
    double worst_mse = 0.0;  // max over environments at (slope, intercept)
    bool degenerate = false; // measure constant everywhere: slope pinned to 0
};

// Intercept-only minimax fit: minimizes max_e mean_e((g - b)^2). For a fixed
// slope each environment's MSE is a unit-curvature parabola in b, so the
// inner problem is solved exactly by two-point (Helly) pairwise reduction.
AffineFit fit_bias_baseline(const std::vector<EnvMoments>& envs);

// Minimax affine fit: min over (a >= 0, b) of max_e MSE_e(a, b). b is solved
// exactly per slope; the outer one-dimensional convex problem in a is solved
// by golden section, and a = 0 is always tried so the fit never loses to the
// bias baseline on the same environments.
AffineFit fit_affine(const std::vector<EnvMoments>& envs);

struct RegressionRow {
    std::string measure;  // measure name, or "baseline" for the gap-only fit
    AffineFit fit;
    double robust_rmse = 0.0;  // sqrt(worst_mse)
    double mean_rmse = 0.0;    // mean over environments of their RMSE at the fit
    std::size_t envs_used = 0;
    std::size_t envs_dropped = 0;
    std::size_t records_dropped = 0;
};

// One row per measure that keeps at least one environment, plus the baseline
// row (always last). Row order follows the measures argument.
std::vector<RegressionRow> regression_report(const std::vector<ExperimentRecord>& records,
                                             FamilyKind kind,
                                             const std::vector<std::string>& measures);

}  // namespace robustgen::regress

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robustgen/dataset.hpp"
#include "robustgen/network.hpp"

namespace robustgen::measures {

// The 24 per-checkpoint complexity measures, in canonical (report) order.
// Every one is normalized to sqrt(complexity / m) scale; the log.* entries
// are reported in the log domain because the underlying products over layers
// overflow in the linear domain.
enum class MeasureId {
    params,
    inverse_margin,
    log_spec_init_main,
    log_spec_orig_main,
    log_prod_of_spec_over_margin,
    log_prod_of_spec,
    fro_over_spec,
    log_sum_of_spec_over_margin,
    log_sum_of_spec,
    log_prod_of_fro_over_margin,
    log_prod_of_fro,
    log_sum_of_fro_over_margin,
    log_sum_of_fro,
    fro_dist,
    dist_spec_init,
    param_norm,
    path_norm_over_margin,
    path_norm,
    pacbayes_init,
    pacbayes_orig,
    pacbayes_flatness,
    pacbayes_mag_init,
    pacbayes_mag_orig,
    pacbayes_mag_flatness,
};

inline constexpr std::size_t kMeasureCount = 24;
const std::array<MeasureId, kMeasureCount>& all_measures();
std::string_view measure_name(MeasureId id);  // dotted form, e.g. "log.prod.of.spec"
std::optional<MeasureId> measure_from_name(std::string_view name);

// A measure that cannot be evaluated on a checkpoint (non-positive margin
// under a margin normalization, zero product inside a log, failed sigma
// search) is marked undefined, never NaN.
class MeasureVector {
public:
    std::optional<double>& operator[](MeasureId id) { return v_[static_cast<std::size_t>(id)]; }
    const std::optional<double>& operator[](MeasureId id) const {
        return v_[static_cast<std::size_t>(id)];
    }
    std::map<std::string, std::optional<double>> to_named() const;

private:
    std::array<std::optional<double>, kMeasureCount> v_;
};

struct MeasureOptions {
    double delta = 0.1;             // PAC-Bayes confidence parameter
    double epsilon = 1e-3;          // magnitude-aware noise floor
    int margin_percentile = 10;
    double sigma_target = 0.1;      // perturbed-error level the sigma search hits
    int mc_samples = 8;
    double sigma_min = 1e-6;
    double sigma_max = 16.0;
    double sigma_tol = 0.01;        // relative bracket width at termination
    // The init-referenced PAC-Bayes bound is implemented with log(m / sigma)
    // in the numerator; this switches that term to log(m / delta) to match
    // the origin-referenced variant.
    bool pacbayes_init_log_m_over_delta = false;
    // Drive the sigma search on perturbed cross-entropy instead of
    // perturbed classification error.
    bool sigma_search_on_cross_entropy = false;
};

// 10th-percentile (by default) output margin over the training set:
// logit of the true class minus the largest other logit. Negative values are
// legitimate (misclassified points); callers decide what to do with a
// non-positive percentile.
double margin_percentile(const nn::Network& net, const Dataset& train, int percentile);

struct SigmaSearchResult {
    double sigma = 0.0;
    bool hit_max = false;  // no crossing below sigma_max; sigma == sigma_max
    bool hit_min = false;  // already above target at sigma_min; sigma == sigma_min
    // Every (sigma, error) pair evaluated, in evaluation order. Under common
    // random numbers the error values are non-decreasing when sorted by sigma.
    std::vector<std::pair<double, double>> evaluated;
};

// Largest sigma whose Monte Carlo perturbed training error stays at or below
// `target`: geometric doubling/halving from 0.125 to bracket the crossing
// inside [sigma_min, sigma_max], then multiplicative bisection until the
// bracket ratio is at most 1 + tol. The returned sigma satisfies
// err(sigma) <= target < err(sigma * (1 + tol)) up to curve monotonicity.
// Generic core, used directly by tests with stub curves.
SigmaSearchResult sigma_search_on(const std::function<double(double)>& err, double target,
                                  double tol, double sigma_min, double sigma_max);

// Monte Carlo estimate of the perturbed training loss at one sigma, averaged
// over mc_samples perturbations with seeds derived from seed_base only
// (common random numbers across sigma values).
double perturbed_error(const nn::Network& net, const Dataset& train, nn::PerturbMode mode,
                       double sigma, const MeasureOptions& opts, std::uint64_t seed_base);

// Net-backed search. Throws SearchInfeasibleError when the unperturbed
// training error already exceeds the target.
SigmaSearchResult sigma_search(const nn::Network& net, const Dataset& train,
                               nn::PerturbMode mode, const MeasureOptions& opts,
                               std::uint64_t seed_base);

// Everything the measure formulas need, precomputed once per checkpoint.
// Tests may fill the fields directly to pin formula values.
struct MeasureContext {
    const nn::Network* net = nullptr;
    const Dataset* train = nullptr;
    int m = 0;                    // training set size
    std::size_t num_params = 0;   // true trainable parameter count
    double gamma = 0.0;           // margin percentile
    bool margin_defined = false;  // gamma > 0
    double sigma = 0.0;           // isotropic flatness scale
    bool sigma_defined = false;
    double sigma_mag = 0.0;       // magnitude-aware flatness scale
    bool sigma_mag_defined = false;
    MeasureOptions opts;
};

// Runs margin and both sigma searches. A failed sigma search leaves the
// corresponding scale undefined instead of raising.
MeasureContext make_context(const nn::Network& net, const Dataset& train,
                            const MeasureOptions& opts, std::uint64_t sigma_seed_base);

void compute_vc_output(const MeasureContext& ctx, MeasureVector& out);
void compute_spectral(const MeasureContext& ctx, MeasureVector& out);
void compute_frobenius(const MeasureContext& ctx, MeasureVector& out);
void compute_path(const MeasureContext& ctx, MeasureVector& out);
void compute_pacbayes(const MeasureContext& ctx, MeasureVector& out);

// All 24 entries. Deterministic given the context; identical checkpoints
// yield bitwise-identical vectors because every random stream is seeded from
// checkpoint content.
MeasureVector compute_all(const MeasureContext& ctx);

}  // namespace robustgen::measures

#include "robustgen/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "robustgen/errors.hpp"
#include "robustgen/linalg.hpp"
#include "robustgen/rng.hpp"
#include "robustgen/stats.hpp"
#include "robustgen/trainer.hpp"

namespace robustgen::measures {

namespace {

struct NameEntry {
    MeasureId id;
    std::string_view name;
};

constexpr std::array<NameEntry, kMeasureCount> kNames{{
    {MeasureId::params, "params"},
    {MeasureId::inverse_margin, "inverse.margin"},
    {MeasureId::log_spec_init_main, "log.spec.init.main"},
    {MeasureId::log_spec_orig_main, "log.spec.orig.main"},
    {MeasureId::log_prod_of_spec_over_margin, "log.prod.of.spec.over.margin"},
    {MeasureId::log_prod_of_spec, "log.prod.of.spec"},
    {MeasureId::fro_over_spec, "fro.over.spec"},
    {MeasureId::log_sum_of_spec_over_margin, "log.sum.of.spec.over.margin"},
    {MeasureId::log_sum_of_spec, "log.sum.of.spec"},
    {MeasureId::log_prod_of_fro_over_margin, "log.prod.of.fro.over.margin"},
    {MeasureId::log_prod_of_fro, "log.prod.of.fro"},
    {MeasureId::log_sum_of_fro_over_margin, "log.sum.of.fro.over.margin"},
    {MeasureId::log_sum_of_fro, "log.sum.of.fro"},
    {MeasureId::fro_dist, "fro.dist"},
    {MeasureId::dist_spec_init, "dist.spec.init"},
    {MeasureId::param_norm, "param.norm"},
    {MeasureId::path_norm_over_margin, "path.norm.over.margin"},
    {MeasureId::path_norm, "path.norm"},
    {MeasureId::pacbayes_init, "pacbayes.init"},
    {MeasureId::pacbayes_orig, "pacbayes.orig"},
    {MeasureId::pacbayes_flatness, "pacbayes.flatness"},
    {MeasureId::pacbayes_mag_init, "pacbayes.mag.init"},
    {MeasureId::pacbayes_mag_orig, "pacbayes.mag.orig"},
    {MeasureId::pacbayes_mag_flatness, "pacbayes.mag.flatness"},
}};

}  // namespace

const std::array<MeasureId, kMeasureCount>& all_measures() {
    static const std::array<MeasureId, kMeasureCount> ids = [] {
        std::array<MeasureId, kMeasureCount> a{};
        for (std::size_t i = 0; i < kMeasureCount; ++i) a[i] = kNames[i].id;
        return a;
    }();
    return ids;
}

std::string_view measure_name(MeasureId id) {
    return kNames[static_cast<std::size_t>(id)].name;
}

std::optional<MeasureId> measure_from_name(std::string_view name) {
    for (const auto& e : kNames) {
        if (e.name == name) return e.id;
    }
    return std::nullopt;
}

std::map<std::string, std::optional<double>> MeasureVector::to_named() const {
    std::map<std::string, std::optional<double>> out;
    for (const auto& e : kNames) out[std::string(e.name)] = v_[static_cast<std::size_t>(e.id)];
    return out;
}

double margin_percentile(const nn::Network& net, const Dataset& train, int percentile) {
    const std::size_t n = train.labels.size();
    if (n == 0) throw EmptyDataError("margin_percentile: empty training set");
    nn::Tensor logits = nn::forward(net, train.features);
    const std::size_t num_out = logits.shape[1];
    std::vector<double> margins(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logits.data.data() + i * num_out;
        const int y = train.labels[i];
        double best_other = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < num_out; ++j) {
            if (static_cast<int>(j) == y) continue;
            best_other = std::max(best_other, row[j]);
        }
        margins[i] = row[y] - best_other;
    }
    return percentile_from_below(margins, static_cast<double>(percentile));
}

double perturbed_error(const nn::Network& net, const Dataset& train, nn::PerturbMode mode,
                       double sigma, const MeasureOptions& opts, std::uint64_t seed_base) {
    double total = 0.0;
    for (int k = 0; k < opts.mc_samples; ++k) {
        const std::uint64_t seed = derive_seed(seed_base, "mc", static_cast<std::uint64_t>(k));
        nn::Network noisy = nn::perturb(net, sigma, mode, opts.epsilon, seed);
        total += opts.sigma_search_on_cross_entropy ? cross_entropy(noisy, train)
                                                    : evaluate_error(noisy, train);
    }
    return total / static_cast<double>(opts.mc_samples);
}

SigmaSearchResult sigma_search_on(const std::function<double(double)>& err, double target,
                                  double tol, double sigma_min, double sigma_max) {
    SigmaSearchResult res;
    auto eval = [&](double s) {
        const double e = err(s);
        res.evaluated.emplace_back(s, e);
        return e;
    };

    double s = std::clamp(0.125, sigma_min, sigma_max);
    double lo = 0.0, hi = 0.0;
    if (eval(s) <= target) {
        // Double until the curve crosses the target or the ceiling is hit.
        lo = s;
        while (true) {
            if (lo >= sigma_max) {
                res.sigma = sigma_max;
                res.hit_max = true;
                return res;
            }
            const double next = std::min(lo * 2.0, sigma_max);
            if (eval(next) <= target) {
                lo = next;
            } else {
                hi = next;
                break;
            }
        }
    } else {
        hi = s;
        while (true) {
            if (hi <= sigma_min) {
                res.sigma = sigma_min;
                res.hit_min = true;
                return res;
            }
            const double next = std::max(hi / 2.0, sigma_min);
            if (eval(next) <= target) {
                lo = next;
                break;
            }
            hi = next;
        }
    }

    // Multiplicative bisection; lo always feasible, hi always infeasible.
    while (hi / lo > 1.0 + tol) {
        const double mid = std::sqrt(lo * hi);
        if (eval(mid) <= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.sigma = lo;
    return res;
}

SigmaSearchResult sigma_search(const nn::Network& net, const Dataset& train,
                               nn::PerturbMode mode, const MeasureOptions& opts,
                               std::uint64_t seed_base) {
    const double base = opts.sigma_search_on_cross_entropy ? cross_entropy(net, train)
                                                           : evaluate_error(net, train);
    if (base > opts.sigma_target) {
        throw SearchInfeasibleError("sigma_search: unperturbed training loss " +
                                    std::to_string(base) + " already exceeds target " +
                                    std::to_string(opts.sigma_target));
    }
    return sigma_search_on(
        [&](double s) { return perturbed_error(net, train, mode, s, opts, seed_base); },
        opts.sigma_target, opts.sigma_tol, opts.sigma_min, opts.sigma_max);
}

MeasureContext make_context(const nn::Network& net, const Dataset& train,
                            const MeasureOptions& opts, std::uint64_t sigma_seed_base) {
    MeasureContext ctx;
    ctx.net = &net;
    ctx.train = &train;
    ctx.m = static_cast<int>(train.labels.size());
    ctx.num_params = nn::count_params(net);
    ctx.opts = opts;
    ctx.gamma = margin_percentile(net, train, opts.margin_percentile);
    ctx.margin_defined = ctx.gamma > 0.0;
    try {
        auto iso = sigma_search(net, train, nn::PerturbMode::isotropic, opts,
                                derive_seed(sigma_seed_base, "sigma-iso", 0));
        ctx.sigma = iso.sigma;
        ctx.sigma_defined = true;
    } catch (const SearchInfeasibleError&) {
        ctx.sigma_defined = false;
    }
    try {
        auto mag = sigma_search(net, train, nn::PerturbMode::magnitude_aware, opts,
                                derive_seed(sigma_seed_base, "sigma-mag", 0));
        ctx.sigma_mag = mag.sigma;
        ctx.sigma_mag_defined = true;
    } catch (const SearchInfeasibleError&) {
        ctx.sigma_mag_defined = false;
    }
    return ctx;
}

namespace {

struct LayerNorms {
    std::vector<double> fro_sq;    // ||W_i||_F^2, weights only
    std::vector<double> dist_sq;   // ||W_i - W_i^0||_F^2
    std::vector<double> spec;      // ||W_i||_2
    std::vector<double> spec_dist; // ||W_i - W_i^0||_2
};

nn::Layer delta_layer(const nn::Layer& cur, const nn::Layer& init) {
    nn::Layer d;
    d.spec = cur.spec;
    d.spec.has_bias = false;
    d.weights = cur.weights;
    for (std::size_t i = 0; i < d.weights.data.size(); ++i) {
        d.weights.data[i] -= init.weights.data[i];
    }
    return d;
}

LayerNorms layer_norms(const nn::Network& net, bool with_spectral) {
    LayerNorms ln;
    const std::size_t d = net.depth();
    ln.fro_sq.reserve(d);
    ln.dist_sq.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        ln.fro_sq.push_back(nn::frobenius_norm_sq(net.layers[i].weights));
        ln.dist_sq.push_back(
            nn::frobenius_dist_sq(net.layers[i].weights, net.init_layers[i].weights));
    }
    if (with_spectral) {
        ln.spec.reserve(d);
        ln.spec_dist.reserve(d);
        for (std::size_t i = 0; i < d; ++i) {
            ln.spec.push_back(
                nn::spectral_norm(net.layers[i], net.input_height, net.input_width));
            ln.spec_dist.push_back(nn::spectral_norm(
                delta_layer(net.layers[i], net.init_layers[i]), net.input_height,
                net.input_width));
        }
    }
    return ln;
}

}  // namespace

void compute_vc_output(const MeasureContext& ctx, MeasureVector& out) {
    const double m = static_cast<double>(ctx.m);
    out[MeasureId::params] = std::sqrt(static_cast<double>(ctx.num_params) / m);
    if (ctx.margin_defined) {
        out[MeasureId::inverse_margin] = std::sqrt(1.0 / (ctx.gamma * ctx.gamma * m));
    }
}

void compute_spectral(const MeasureContext& ctx, MeasureVector& out) {
    const LayerNorms ln = layer_norms(*ctx.net, /*with_spectral=*/true);
    const double m = static_cast<double>(ctx.m);
    const double log_m = std::log(m);
    const double d = static_cast<double>(ctx.net->depth());
    const double log_d = std::log(d);

    double spec_dist_total = 0.0;
    for (double sd : ln.spec_dist) spec_dist_total += sd * sd;
    out[MeasureId::dist_spec_init] = std::sqrt(spec_dist_total / m);

    const bool spec_ok =
        std::all_of(ln.spec.begin(), ln.spec.end(), [](double s) { return s > 0.0; });
    if (!spec_ok) return;  // zero layer: products vanish, logs and ratios undefined

    double log_spec_prod_sq = 0.0;  // log prod ||W_i||_2^2
    double ratio_init = 0.0;        // sum ||W_i - W_i^0||_F^2 / ||W_i||_2^2
    double ratio_orig = 0.0;        // sum ||W_i||_F^2 / ||W_i||_2^2
    for (std::size_t i = 0; i < ln.spec.size(); ++i) {
        log_spec_prod_sq += 2.0 * std::log(ln.spec[i]);
        ratio_init += ln.dist_sq[i] / (ln.spec[i] * ln.spec[i]);
        ratio_orig += ln.fro_sq[i] / (ln.spec[i] * ln.spec[i]);
    }

    out[MeasureId::log_prod_of_spec] = 0.5 * (log_spec_prod_sq - log_m);
    out[MeasureId::log_sum_of_spec] = 0.5 * (log_d + log_spec_prod_sq / d - log_m);
    out[MeasureId::fro_over_spec] = std::sqrt(ratio_orig / m);

    if (!ctx.margin_defined) return;
    const double log_gamma_sq = 2.0 * std::log(ctx.gamma);
    out[MeasureId::log_prod_of_spec_over_margin] =
        0.5 * (log_spec_prod_sq - log_gamma_sq - log_m);
    out[MeasureId::log_sum_of_spec_over_margin] =
        0.5 * (log_d + (log_spec_prod_sq - log_gamma_sq) / d - log_m);
    if (ratio_init > 0.0) {
        out[MeasureId::log_spec_init_main] =
            0.5 * (log_spec_prod_sq - log_gamma_sq + std::log(ratio_init) - log_m);
    }
    if (ratio_orig > 0.0) {
        out[MeasureId::log_spec_orig_main] =
            0.5 * (log_spec_prod_sq - log_gamma_sq + std::log(ratio_orig) - log_m);
    }
}

void compute_frobenius(const MeasureContext& ctx, MeasureVector& out) {
    const LayerNorms ln = layer_norms(*ctx.net, /*with_spectral=*/false);
    const double m = static_cast<double>(ctx.m);
    const double log_m = std::log(m);
    const double d = static_cast<double>(ctx.net->depth());
    const double log_d = std::log(d);

    double fro_total = 0.0, dist_total = 0.0;
    for (double f : ln.fro_sq) fro_total += f;
    for (double s : ln.dist_sq) dist_total += s;
    out[MeasureId::fro_dist] = std::sqrt(dist_total / m);
    out[MeasureId::param_norm] = std::sqrt(fro_total / m);

    const bool fro_ok =
        std::all_of(ln.fro_sq.begin(), ln.fro_sq.end(), [](double f) { return f > 0.0; });
    if (!fro_ok) return;  // zero layer makes the product logs undefined

    double log_fro_prod_sq = 0.0;  // log prod ||W_i||_F^2
    for (double f : ln.fro_sq) log_fro_prod_sq += std::log(f);

    out[MeasureId::log_prod_of_fro] = 0.5 * (log_fro_prod_sq - log_m);
    out[MeasureId::log_sum_of_fro] = 0.5 * (log_d + log_fro_prod_sq / d - log_m);

    if (!ctx.margin_defined) return;
    const double log_gamma_sq = 2.0 * std::log(ctx.gamma);
    out[MeasureId::log_prod_of_fro_over_margin] = 0.5 * (log_fro_prod_sq - log_gamma_sq - log_m);
    out[MeasureId::log_sum_of_fro_over_margin] =
        0.5 * (log_d + (log_fro_prod_sq - log_gamma_sq) / d - log_m);
}

void compute_path(const MeasureContext& ctx, MeasureVector& out) {
    const nn::Tensor mass = nn::forward_squared_ones(*ctx.net);
    double total = 0.0;
    for (double v : mass.data) total += v;
    const double m = static_cast<double>(ctx.m);
    out[MeasureId::path_norm] = std::sqrt(total / m);
    if (ctx.margin_defined) {
        out[MeasureId::path_norm_over_margin] = std::sqrt(total / (ctx.gamma * ctx.gamma * m));
    }
}

void compute_pacbayes(const MeasureContext& ctx, MeasureVector& out) {
    const double m = static_cast<double>(ctx.m);
    const std::vector<double> w = nn::flatten_params(*ctx.net);
    const std::vector<double> w0 = nn::flatten_init_params(*ctx.net);
    const double omega = static_cast<double>(w.size());
    double dist_sq = 0.0, norm_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double dw = w[i] - w0[i];
        dist_sq += dw * dw;
        norm_sq += w[i] * w[i];
    }

    if (ctx.sigma_defined) {
        const double sigma_sq = ctx.sigma * ctx.sigma;
        const double log_init_term = ctx.opts.pacbayes_init_log_m_over_delta
                                         ? std::log(m / ctx.opts.delta)
                                         : std::log(m / ctx.sigma);
        out[MeasureId::pacbayes_init] =
            std::sqrt((dist_sq / (4.0 * sigma_sq) + log_init_term + 10.0) / m);
        out[MeasureId::pacbayes_orig] = std::sqrt(
            (norm_sq / (4.0 * sigma_sq) + std::log(m / ctx.opts.delta) + 10.0) / m);
        out[MeasureId::pacbayes_flatness] = std::sqrt(1.0 / (sigma_sq * m));
    }

    if (ctx.sigma_mag_defined) {
        const double sp_sq = ctx.sigma_mag * ctx.sigma_mag;
        const double eps_sq = ctx.opts.epsilon * ctx.opts.epsilon;
        // Per-coordinate KL between the magnitude-aware posterior and a prior
        // whose per-coordinate variance is tied to the global displacement
        // (init variant) or the global weight norm (orig variant).
        double kl_init = 0.0, kl_orig = 0.0;
        const double prior_init = eps_sq + (sp_sq + 1.0) * dist_sq / omega;
        const double prior_orig = eps_sq + (sp_sq + 1.0) * norm_sq / omega;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double dw = w[i] - w0[i];
            const double post = eps_sq + sp_sq * dw * dw;
            kl_init += std::log(prior_init / post);
            kl_orig += std::log(prior_orig / post);
        }
        const double tail = std::log(m / ctx.opts.delta) + 10.0;
        out[MeasureId::pacbayes_mag_init] = std::sqrt((0.25 * kl_init + tail) / m);
        out[MeasureId::pacbayes_mag_orig] = std::sqrt((0.25 * kl_orig + tail) / m);
        out[MeasureId::pacbayes_mag_flatness] = std::sqrt(1.0 / (sp_sq * m));
    }
}

MeasureVector compute_all(const MeasureContext& ctx) {
    MeasureVector out;
    compute_vc_output(ctx, out);
    compute_spectral(ctx, out);
    compute_frobenius(ctx, out);
    compute_path(ctx, out);
    compute_pacbayes(ctx, out);
    return out;
}

}  // namespace robustgen::measures

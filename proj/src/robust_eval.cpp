#include "robustgen/robust_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "robustgen/stats.hpp"

namespace robustgen::eval {

double chi(double eps, int m) {
    const double raw = 1.0 - 2.0 * std::exp(-2.0 * static_cast<double>(m) * eps * eps);
    const double clamped = std::max(0.0, raw);
    return clamped * clamped;
}

double kappa(double delta_g_hat, int m_test) {
    return std::max(0.0, chi(std::abs(delta_g_hat) / 2.0, m_test) - 0.5);
}

double effective_sample_size(const std::vector<double>& weights) {
    double max_w = 0.0;
    for (double w : weights) max_w = std::max(max_w, w);
    if (max_w <= 0.0) return 0.0;
    double sum = 0.0, sum_sq = 0.0;
    for (double w : weights) {
        const double u = w / max_w;
        sum += u;
        sum_sq += u * u;
    }
    return (sum * sum) / sum_sq;
}

std::size_t CoupledEnvironment::pair_count() const {
    std::size_t n = 0;
    for (const auto& block : blocks) n += block.a.size() * block.b.size();
    return n;
}

std::string config_context_key(const HyperparameterConfig& config, Axis varied) {
    // Mirrors the field order of HyperparameterConfig::key().
    auto field = [&](const std::string& tag, Axis a) {
        return tag + "=" + (a == varied ? std::string("*") : axis_value_string(config, a));
    };
    return field("lr", Axis::learning_rate) + ";" + field("depth", Axis::depth) + ";" +
           field("width", Axis::width) + ";" + field("ds", Axis::dataset) + ";" +
           field("m", Axis::train_size);
}

std::vector<CoupledEnvironment> build_coupled_environments(
    const std::vector<ExperimentRecord>& records) {
    // Group records by config, keeping first-seen order out of the picture by
    // sorting on the canonical key.
    std::map<std::string, std::pair<HyperparameterConfig, std::vector<const ExperimentRecord*>>>
        by_config;
    for (const auto& rec : records) {
        auto& slot = by_config[rec.config.key()];
        slot.first = rec.config;
        slot.second.push_back(&rec);
    }

    std::vector<const std::pair<HyperparameterConfig, std::vector<const ExperimentRecord*>>*>
        groups;
    groups.reserve(by_config.size());
    for (auto& [key, slot] : by_config) groups.push_back(&slot);

    std::vector<CoupledEnvironment> envs;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            Axis only;
            if (count_differing_axes(groups[i]->first, groups[j]->first, &only) != 1) continue;
            const auto* lo = groups[i];
            const auto* hi = groups[j];
            if (!axis_value_less(only, axis_value_string(lo->first, only),
                                 axis_value_string(hi->first, only))) {
                std::swap(lo, hi);
            }
            CoupledEnvironment env;
            env.axis = only;
            env.value_a = axis_value_string(lo->first, only);
            env.value_b = axis_value_string(hi->first, only);
            env.context_key = config_context_key(lo->first, only);
            env.blocks.push_back(PairBlock{lo->second, hi->second});
            envs.push_back(std::move(env));
        }
    }

    std::sort(envs.begin(), envs.end(), [](const CoupledEnvironment& x,
                                           const CoupledEnvironment& y) {
        return std::tie(x.axis, x.context_key, x.value_a, x.value_b) <
               std::tie(y.axis, y.context_key, y.value_a, y.value_b);
    });
    return envs;
}

std::vector<CoupledEnvironment> build_weak_environments(
    const std::vector<CoupledEnvironment>& strict) {
    std::map<std::tuple<Axis, std::string, std::string>, CoupledEnvironment> merged;
    for (const auto& env : strict) {
        auto key = std::make_tuple(env.axis, env.value_a, env.value_b);
        auto it = merged.find(key);
        if (it == merged.end()) {
            CoupledEnvironment weak;
            weak.axis = env.axis;
            weak.value_a = env.value_a;
            weak.value_b = env.value_b;
            weak.context_key = "*";
            weak.weak = true;
            it = merged.emplace(key, std::move(weak)).first;
        }
        for (const auto& block : env.blocks) it->second.blocks.push_back(block);
    }
    std::vector<CoupledEnvironment> out;
    out.reserve(merged.size());
    for (auto& [key, env] : merged) out.push_back(std::move(env));
    std::sort(out.begin(), out.end(), [](const CoupledEnvironment& x,
                                         const CoupledEnvironment& y) {
        return std::tie(x.axis, x.value_a, x.value_b) < std::tie(y.axis, y.value_a, y.value_b);
    });
    return out;
}

std::vector<CoupledEnvironment> filter_by_axes(const std::vector<CoupledEnvironment>& envs,
                                               const std::vector<Axis>& axes) {
    std::vector<CoupledEnvironment> out;
    for (const auto& env : envs) {
        if (std::find(axes.begin(), axes.end(), env.axis) != axes.end()) out.push_back(env);
    }
    return out;
}

namespace {

double sign_of(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

// Shared pair walk. Visits every cross-product pair with the measure defined
// on both sides, in deterministic block/index order.
template <typename Fn>
std::size_t for_each_pair(const CoupledEnvironment& env, const std::string& measure,
                          const EvalOptions& opts, Fn&& fn) {
    std::size_t skipped = 0;
    for (const auto& block : env.blocks) {
        for (const auto* ra : block.a) {
            for (const auto* rb : block.b) {
                const auto ia = ra->measures.find(measure);
                const auto ib = rb->measures.find(measure);
                const bool have_a = ia != ra->measures.end() && ia->second.has_value();
                const bool have_b = ib != rb->measures.end() && ib->second.has_value();
                if (!have_a || !have_b || !std::isfinite(ra->gap) || !std::isfinite(rb->gap)) {
                    ++skipped;
                    continue;
                }
                const double dg = rb->gap - ra->gap;
                const double dc = *ib->second - *ia->second;
                const double w =
                    opts.noise_filter
                        ? kappa(dg, std::min(ra->test_set_size, rb->test_set_size))
                        : 0.5;
                fn(dg, dc, w);
            }
        }
    }
    return skipped;
}

}  // namespace

SignErrorResult empirical_sign_error(const CoupledEnvironment& env, const std::string& measure,
                                     const EvalOptions& opts) {
    SignErrorResult res;
    std::vector<double> weights;
    double num = 0.0;  // sum_i w_i * (1 - sign(dC) sign(dG)), terms in {0, w, 2w}
    double den = 0.0;
    res.pairs_skipped = for_each_pair(env, measure, opts, [&](double dg, double dc, double w) {
        const double raw = 1.0 - sign_of(dc) * sign_of(dg);
        num += w * raw;
        den += w;
        weights.push_back(w);
        ++res.pairs_used;
    });
    res.kappa_sum = den;
    res.n_eff = effective_sample_size(weights);
    if (den > 0.0 && res.n_eff >= opts.n_eff_min) {
        res.value = 0.5 * (num / den);
        res.defined = true;
    }
    return res;
}

std::vector<PairDetail> pairwise_value_breakdown(const CoupledEnvironment& env,
                                                 const std::string& measure,
                                                 const EvalOptions& opts) {
    std::vector<PairDetail> out;
    for_each_pair(env, measure, opts, [&](double dg, double dc, double w) {
        PairDetail d;
        d.delta_g = dg;
        d.delta_c = dc;
        d.weight = w;
        d.loss = 0.5 * (1.0 - sign_of(dc) * sign_of(dg));
        out.push_back(d);
    });
    return out;
}

MeasureEvaluation evaluate_measure(const std::vector<CoupledEnvironment>& envs,
                                   const std::string& measure, const EvalOptions& opts) {
    MeasureEvaluation ev;
    ev.measure = measure;
    ev.per_env.reserve(envs.size());
    double sum = 0.0;
    for (const auto& env : envs) {
        SignErrorResult r = empirical_sign_error(env, measure, opts);
        if (r.defined) {
            ++ev.envs_used;
            sum += r.value;
            if (!ev.defined || r.value > ev.robust_value) ev.robust_value = r.value;
            ev.defined = true;
        } else {
            ++ev.envs_skipped;
        }
        ev.per_env.push_back(std::move(r));
    }
    if (ev.defined) ev.average_value = sum / static_cast<double>(ev.envs_used);
    return ev;
}

FamilySummary summarize_family(const MeasureEvaluation& eval, const std::string& family) {
    FamilySummary s;
    s.measure = eval.measure;
    s.family = family;
    s.envs_used = eval.envs_used;
    s.envs_skipped = eval.envs_skipped;
    std::vector<double> values;
    for (const auto& r : eval.per_env) {
        if (r.defined) values.push_back(r.value);
    }
    if (values.empty()) return s;
    s.defined = true;
    s.max_value = max_of(values);
    s.p90_value = percentile_from_above(values, 90.0);
    s.median_value = median_of(values);
    s.mean_value = mean_of(values);
    return s;
}

}  // namespace robustgen::eval

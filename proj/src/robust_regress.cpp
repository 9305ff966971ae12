#include "robustgen/robust_regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "robustgen/errors.hpp"
#include "robustgen/robust_eval.hpp"

namespace robustgen::regress {

std::string family_kind_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::per_config: return "per_config";
        case FamilyKind::single_axis_varies: return "single_axis";
        case FamilyKind::all_but_one_fixed: return "all_but_one";
    }
    throw Error("family_kind_name: bad enum value");
}

std::optional<FamilyKind> family_kind_from_name(const std::string& name) {
    if (name == "per_config") return FamilyKind::per_config;
    if (name == "single_axis") return FamilyKind::single_axis_varies;
    if (name == "all_but_one") return FamilyKind::all_but_one_fixed;
    return std::nullopt;
}

namespace {

std::vector<Axis> qualifying_axes(const std::vector<ExperimentRecord>& records) {
    std::vector<Axis> out;
    for (Axis a : kAllAxes) {
        std::set<std::string> values;
        for (const auto& rec : records) values.insert(axis_value_string(rec.config, a));
        if (values.size() >= 2) out.push_back(a);
    }
    return out;
}

}  // namespace

std::vector<RegressionEnvironment> build_family(const std::vector<ExperimentRecord>& records,
                                                FamilyKind kind) {
    std::map<std::string, std::vector<const ExperimentRecord*>> groups;

    switch (kind) {
        case FamilyKind::per_config:
            for (const auto& rec : records) groups[rec.config.key()].push_back(&rec);
            break;
        case FamilyKind::single_axis_varies:
            for (Axis a : qualifying_axes(records)) {
                for (const auto& rec : records) {
                    groups[eval::config_context_key(rec.config, a)].push_back(&rec);
                }
            }
            break;
        case FamilyKind::all_but_one_fixed:
            for (Axis a : qualifying_axes(records)) {
                for (const auto& rec : records) {
                    groups[axis_name(a) + "=" + axis_value_string(rec.config, a)].push_back(
                        &rec);
                }
            }
            break;
    }

    std::vector<RegressionEnvironment> out;
    out.reserve(groups.size());
    for (auto& [name, recs] : groups) {
        RegressionEnvironment env;
        env.name = name;
        env.records = std::move(recs);
        out.push_back(std::move(env));
    }
    return out;  // std::map iteration gives a deterministic name order
}

MomentsResult collect_moments(const std::vector<RegressionEnvironment>& envs,
                              const std::string& measure) {
    MomentsResult res;
    for (const auto& env : envs) {
        EnvMoments m;
        m.name = env.name;
        for (const auto* rec : env.records) {
            const auto it = rec->measures.find(measure);
            if (it == rec->measures.end() || !it->second.has_value() ||
                !std::isfinite(rec->gap)) {
                ++res.records_dropped;
                continue;
            }
            const double c = *it->second;
            const double g = rec->gap;
            m.mean_c += c;
            m.mean_g += g;
            m.mean_cc += c * c;
            m.mean_cg += c * g;
            m.mean_gg += g * g;
            if (m.n == 0) {
                m.c_min = m.c_max = c;
            } else {
                m.c_min = std::min(m.c_min, c);
                m.c_max = std::max(m.c_max, c);
            }
            ++m.n;
        }
        if (m.n == 0) {
            ++res.envs_dropped;
            continue;
        }
        const double n = static_cast<double>(m.n);
        m.mean_c /= n;
        m.mean_g /= n;
        m.mean_cc /= n;
        m.mean_cg /= n;
        m.mean_gg /= n;
        res.envs.push_back(std::move(m));
    }
    return res;
}

std::vector<EnvMoments> collect_gap_moments(const std::vector<RegressionEnvironment>& envs) {
    std::vector<EnvMoments> out;
    for (const auto& env : envs) {
        EnvMoments m;
        m.name = env.name;
        for (const auto* rec : env.records) {
            if (!std::isfinite(rec->gap)) continue;
            m.mean_g += rec->gap;
            m.mean_gg += rec->gap * rec->gap;
            ++m.n;
        }
        if (m.n == 0) continue;
        const double n = static_cast<double>(m.n);
        m.mean_g /= n;
        m.mean_gg /= n;
        out.push_back(std::move(m));
    }
    return out;
}

double env_mse(const EnvMoments& e, double a, double b) {
    // The moment expansion can cancel to a tiny negative on near-perfect
    // fits; the true quantity is a mean of squares.
    return std::max(0.0, e.mean_gg + a * a * e.mean_cc + b * b - 2.0 * a * e.mean_cg -
                             2.0 * b * e.mean_g + 2.0 * a * b * e.mean_c);
}

namespace {

// At fixed slope a, environment e's MSE in b is (b - mu_e)^2 + v_e with unit
// curvature: mu_e is the env's optimal intercept, v_e its residual floor.
struct Parabola {
    double mu;
    double v;
};

std::vector<Parabola> parabolas_at(const std::vector<EnvMoments>& envs, double a) {
    std::vector<Parabola> out;
    out.reserve(envs.size());
    for (const auto& e : envs) {
        const double mu = e.mean_g - a * e.mean_c;
        out.push_back(Parabola{mu, env_mse(e, a, mu)});
    }
    return out;
}

struct InnerSolution {
    double b;
    double value;
};

// Exact minimizer of max_e (b - mu_e)^2 + v_e. The active set of a
// one-dimensional convex minimax has at most two members, so the optimum is
// the worst pairwise minimax; each pair resolves in closed form at one of
// the two vertices or the crossing point.
InnerSolution inner_minimize(const std::vector<Parabola>& ps) {
    auto value_at = [&](double b) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : ps) {
            const double d = b - p.mu;
            worst = std::max(worst, d * d + p.v);
        }
        return worst;
    };
    auto pair_min = [](const Parabola& x, const Parabola& y) -> InnerSolution {
        auto eval = [&](double b) {
            const double dx = b - x.mu, dy = b - y.mu;
            return std::max(dx * dx + x.v, dy * dy + y.v);
        };
        InnerSolution best{x.mu, eval(x.mu)};
        const double at_y = eval(y.mu);
        if (at_y < best.value) best = {y.mu, at_y};
        if (x.mu != y.mu) {
            // (b - mu_x)^2 + v_x = (b - mu_y)^2 + v_y solved for b.
            const double cross =
                0.5 * (x.mu + y.mu) + (x.v - y.v) / (2.0 * (x.mu - y.mu));
            const double at_cross = eval(cross);
            if (at_cross < best.value) best = {cross, at_cross};
        }
        return best;
    };

    InnerSolution best{ps[0].mu, ps[0].v};
    for (std::size_t i = 0; i < ps.size(); ++i) {
        for (std::size_t j = i; j < ps.size(); ++j) {
            const InnerSolution cand = pair_min(ps[i], ps[j]);
            if (cand.value > best.value) best = cand;
        }
    }
    // The worst pair's minimax point is a global minimizer; evaluate the full
    // envelope there so the reported value covers every environment.
    best.value = value_at(best.b);
    return best;
}

InnerSolution inner_at(const std::vector<EnvMoments>& envs, double a) {
    return inner_minimize(parabolas_at(envs, a));
}

}  // namespace

AffineFit fit_bias_baseline(const std::vector<EnvMoments>& envs) {
    if (envs.empty()) throw EmptyDataError("fit_bias_baseline: no environments");
    const InnerSolution sol = inner_at(envs, 0.0);
    AffineFit fit;
    fit.slope = 0.0;
    fit.intercept = sol.b;
    fit.worst_mse = sol.value;
    return fit;
}

AffineFit fit_affine(const std::vector<EnvMoments>& envs) {
    if (envs.empty()) throw EmptyDataError("fit_affine: no environments");

    // A measure that never moves cannot carry slope; any a is equivalent to a
    // shifted intercept, so pin a = 0 and flag it.
    double c_lo = envs[0].c_min, c_hi = envs[0].c_max;
    for (const auto& e : envs) {
        c_lo = std::min(c_lo, e.c_min);
        c_hi = std::max(c_hi, e.c_max);
    }
    AffineFit fit;
    if (c_lo == c_hi) {
        const InnerSolution sol = inner_at(envs, 0.0);
        fit.intercept = sol.b;
        fit.worst_mse = sol.value;
        fit.degenerate = true;
        return fit;
    }

    auto f = [&](double a) { return inner_at(envs, a).value; };

    // Bracket the convex objective: grow the upper end until it stops paying.
    double hi = 1.0;
    double f_hi = f(hi);
    for (int i = 0; i < 80 && f(hi * 2.0) < f_hi; ++i) {
        hi *= 2.0;
        f_hi = f(hi);
    }
    hi *= 2.0;

    // Golden section on [0, hi].
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 300 && (hi - lo) > 1e-10 * (1.0 + hi); ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    const double a_star = f1 <= f2 ? x1 : x2;

    // a = 0 is always a candidate, so the fit cannot lose to the baseline.
    const InnerSolution at_zero = inner_at(envs, 0.0);
    const InnerSolution at_star = inner_at(envs, a_star);
    if (at_zero.value <= at_star.value) {
        fit.slope = 0.0;
        fit.intercept = at_zero.b;
        fit.worst_mse = at_zero.value;
    } else {
        fit.slope = a_star;
        fit.intercept = at_star.b;
        fit.worst_mse = at_star.value;
    }
    return fit;
}

std::vector<RegressionRow> regression_report(const std::vector<ExperimentRecord>& records,
                                             FamilyKind kind,
                                             const std::vector<std::string>& measures) {
    const auto envs = build_family(records, kind);
    std::vector<RegressionRow> rows;

    auto finish_row = [](RegressionRow& row, const std::vector<EnvMoments>& moments) {
        row.envs_used = moments.size();
        row.robust_rmse = std::sqrt(row.fit.worst_mse);
        double sum = 0.0;
        for (const auto& e : moments) {
            sum += std::sqrt(std::max(0.0, env_mse(e, row.fit.slope, row.fit.intercept)));
        }
        row.mean_rmse = sum / static_cast<double>(moments.size());
    };

    for (const auto& name : measures) {
        const MomentsResult mr = collect_moments(envs, name);
        if (mr.envs.empty()) continue;
        RegressionRow row;
        row.measure = name;
        row.envs_dropped = mr.envs_dropped;
        row.records_dropped = mr.records_dropped;
        row.fit = fit_affine(mr.envs);
        finish_row(row, mr.envs);
        rows.push_back(std::move(row));
    }

    const auto gap_moments = collect_gap_moments(envs);
    if (!gap_moments.empty()) {
        RegressionRow base;
        base.measure = "baseline";
        base.fit = fit_bias_baseline(gap_moments);
        finish_row(base, gap_moments);
        rows.push_back(std::move(base));
    }
    return rows;
}

}  // namespace robustgen::regress

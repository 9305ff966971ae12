#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "robustgen/config.hpp"
#include "robustgen/record.hpp"
#include "robustgen/robust_eval.hpp"
#include "robustgen/trainer.hpp"

using namespace robustgen;
using namespace robustgen::eval;

namespace {

HyperparameterConfig make_config(double lr, int depth, int width, std::string ds, int m) {
    HyperparameterConfig c;
    c.learning_rate = lr;
    c.depth = depth;
    c.width = width;
    c.dataset_id = std::move(ds);
    c.train_size = m;
    return c;
}

ExperimentRecord make_record(const HyperparameterConfig& config, int seed, double gap,
                             int m_test = 10000) {
    ExperimentRecord r;
    r.config = config;
    r.seed = seed;
    r.status = RunStatus::converged;
    r.train_error = 0.0;
    r.test_error = gap;
    r.gap = gap;
    r.test_set_size = m_test;
    return r;
}

void set_measure(ExperimentRecord& r, const std::string& name, double v) {
    r.measures[name] = v;
}

// Environment fixture: one axis intervention with n seeds per side, constant
// gap g_a on side a and g_b on side b (every pair sees the same gap change),
// and measures: oracle.gap tracks the gap, oracle.neg opposes it,
// oracle.const never moves.
std::vector<ExperimentRecord> oracle_records(double g_a, double g_b, int seeds,
                                             int m_test = 10000) {
    const auto ca = make_config(0.01, 2, 16, "t", 64);
    const auto cb = make_config(0.01, 2, 16, "t", 128);
    std::vector<ExperimentRecord> recs;
    for (int s = 0; s < seeds; ++s) {
        auto ra = make_record(ca, s, g_a, m_test);
        set_measure(ra, "oracle.gap", g_a);
        set_measure(ra, "oracle.neg", -g_a);
        set_measure(ra, "oracle.const", 7.0);
        recs.push_back(ra);
        auto rb = make_record(cb, s, g_b, m_test);
        set_measure(rb, "oracle.gap", g_b);
        set_measure(rb, "oracle.neg", -g_b);
        set_measure(rb, "oracle.const", 7.0);
        recs.push_back(rb);
    }
    return recs;
}

}  // namespace

TEST_CASE("hoeffding confidence weight matches its closed form") {
    // chi(0.02, 10^4): exponent is exactly -8.
    CHECK(chi(0.02, 10000) == doctest::Approx(std::pow(1.0 - 2.0 * std::exp(-8.0), 2))
                                  .epsilon(1e-15));
    CHECK(chi(0.0, 10000) == 0.0);     // raw value -1 clamps to 0 before squaring
    CHECK(chi(10.0, 10000) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kappa(0.0, 10000) == 0.0);
    CHECK(kappa(1.0, 10000) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(kappa(0.04, 10000) ==
          doctest::Approx(chi(0.02, 10000) - 0.5).epsilon(1e-15));

    // Weights never leave [0, 0.5].
    for (double dg : {0.0, 1e-4, 0.01, 0.02, 0.05, 0.3, 2.0}) {
        const double k = kappa(dg, 10000);
        CHECK(k >= 0.0);
        CHECK(k <= 0.5);
    }
}

TEST_CASE("kappa positivity threshold agrees with the analytic crossing") {
    // kappa > 0 iff chi > 1/2 iff |dg| > 2 sqrt(ln(2/(1 - 2^-1/2)) / (2 m)).
    const int m = 10000;
    const double analytic = 2.0 * std::sqrt(std::log(2.0 / (1.0 - std::pow(2.0, -0.5))) /
                                            (2.0 * static_cast<double>(m)));
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kappa(mid, m) > 0.0 ? hi : lo) = mid;
    }
    CHECK(hi == doctest::Approx(analytic).epsilon(1e-10));
    CHECK(analytic == doctest::Approx(0.0196).epsilon(1e-2));
    CHECK(kappa(analytic * 1.0001, m) > 0.0);
    CHECK(kappa(analytic * 0.9999, m) == 0.0);
}

TEST_CASE("effective sample size is scale invariant and exact on equal weights") {
    CHECK(effective_sample_size({0.3, 0.3, 0.3, 0.3}) == 4.0);
    CHECK(effective_sample_size({0.5, 0.25}) == 1.8);  // (1 + .5)^2 / (1 + .25)
    CHECK(effective_sample_size({0.5, 0.25}) ==
          effective_sample_size({0.002, 0.001}));  // scale does not matter
    CHECK(effective_sample_size({}) == 0.0);
    CHECK(effective_sample_size({0.0, 0.0}) == 0.0);
    CHECK(effective_sample_size({0.7}) == 1.0);
}

TEST_CASE("strict environment construction covers value pairs times contexts") {
    // 3 learning rates x 2 depths; one record per config.
    std::vector<ExperimentRecord> recs;
    for (double lr : {0.02, 0.1, 0.5}) {
        for (int depth : {2, 3}) {
            recs.push_back(make_record(make_config(lr, depth, 16, "t", 64), 0, 0.1));
        }
    }
    const auto envs = build_coupled_environments(recs);
    // lr axis: C(3,2)=3 value pairs x 2 depth contexts; depth axis: 1 x 3.
    REQUIRE(envs.size() == 9);
    int lr_envs = 0, depth_envs = 0;
    for (const auto& env : envs) {
        CHECK_FALSE(env.weak);
        REQUIRE(env.blocks.size() == 1);
        CHECK(env.pair_count() == 1);
        // Canonical ascending direction on the varied axis.
        CHECK(axis_value_less(env.axis, env.value_a, env.value_b));
        if (env.axis == Axis::learning_rate) ++lr_envs;
        if (env.axis == Axis::depth) ++depth_envs;
    }
    CHECK(lr_envs == 6);
    CHECK(depth_envs == 3);

    // Numeric ordering, not lexicographic: 0.02 < 0.1 despite "0.1" < "0.02".
    bool saw_002_01 = false;
    for (const auto& env : envs) {
        if (env.axis == Axis::learning_rate && env.value_a == "0.02" && env.value_b == "0.1") {
            saw_002_01 = true;
        }
        CHECK_FALSE((env.axis == Axis::learning_rate && env.value_a == "0.1" &&
                     env.value_b == "0.02"));
    }
    CHECK(saw_002_01);

    // Weak environments collapse contexts.
    const auto weak = build_weak_environments(envs);
    REQUIRE(weak.size() == 4);  // 3 lr value pairs + 1 depth value pair
    for (const auto& env : weak) {
        CHECK(env.weak);
        CHECK(env.context_key == "*");
    }
    const auto& weak_depth = weak.back();
    CHECK(weak_depth.axis == Axis::depth);
    CHECK(weak_depth.blocks.size() == 3);  // one per lr context
    CHECK(weak_depth.pair_count() == 3);

    // Axis filtering.
    CHECK(filter_by_axes(envs, {Axis::learning_rate}).size() == 6);
    CHECK(filter_by_axes(envs, {Axis::depth, Axis::learning_rate}).size() == 9);
    CHECK(filter_by_axes(envs, {Axis::width}).empty());
}

TEST_CASE("sign error is exactly 0, 1, and 0.5 on the oracle measures") {
    // Strong gap change: |dG| = 0.2 at m_test = 10^4 is far above the noise
    // threshold, and equal per-pair gaps make all weights identical.
    const auto recs = oracle_records(0.3, 0.1, 4);
    const auto envs = build_coupled_environments(recs);
    REQUIRE(envs.size() == 1);
    const auto& env = envs[0];
    CHECK(env.axis == Axis::train_size);
    CHECK(env.pair_count() == 16);

    EvalOptions opts;
    const auto with_gap = empirical_sign_error(env, "oracle.gap", opts);
    REQUIRE(with_gap.defined);
    CHECK(with_gap.value == 0.0);
    CHECK(with_gap.n_eff == 16.0);  // equal weights count pairs exactly
    CHECK(with_gap.pairs_used == 16);
    CHECK(with_gap.pairs_skipped == 0);

    const auto against_gap = empirical_sign_error(env, "oracle.neg", opts);
    REQUIRE(against_gap.defined);
    CHECK(against_gap.value == 1.0);

    const auto constant = empirical_sign_error(env, "oracle.const", opts);
    REQUIRE(constant.defined);
    CHECK(constant.value == 0.5);

    // Pair details expose the raw comparisons.
    const auto detail = pairwise_value_breakdown(env, "oracle.gap", opts);
    REQUIRE(detail.size() == 16);
    for (const auto& d : detail) {
        CHECK(d.delta_g == doctest::Approx(-0.2));
        CHECK(d.loss == 0.0);
        CHECK(d.weight > 0.0);
    }
}

TEST_CASE("environments below the effective sample threshold are discarded") {
    // 3 seeds per side -> 9 equally weighted pairs < 12.
    const auto recs = oracle_records(0.3, 0.1, 3);
    const auto envs = build_coupled_environments(recs);
    REQUIRE(envs.size() == 1);

    EvalOptions opts;
    const auto r = empirical_sign_error(envs[0], "oracle.gap", opts);
    CHECK(r.n_eff == 9.0);
    CHECK_FALSE(r.defined);

    EvalOptions relaxed;
    relaxed.n_eff_min = 9.0;
    CHECK(empirical_sign_error(envs[0], "oracle.gap", relaxed).defined);
}

TEST_CASE("pairs with an undefined measure value drop out and are counted") {
    auto recs = oracle_records(0.3, 0.1, 4);
    // Mark the measure undefined on one side-a record: its 4 pairs vanish.
    for (auto& r : recs) {
        if (r.config.train_size == 64 && r.seed == 0) r.measures["oracle.gap"] = std::nullopt;
    }
    const auto envs = build_coupled_environments(recs);
    EvalOptions opts;
    const auto r = empirical_sign_error(envs[0], "oracle.gap", opts);
    CHECK(r.pairs_used == 12);
    CHECK(r.pairs_skipped == 4);
    REQUIRE(r.defined);  // 12 equal weights meet the threshold exactly
    CHECK(r.value == 0.0);

    // A measure absent everywhere leaves the environment undefined.
    const auto missing = empirical_sign_error(envs[0], "no.such.measure", opts);
    CHECK_FALSE(missing.defined);
    CHECK(missing.pairs_skipped == 16);
}

TEST_CASE("tied gaps get zero weight under the filter and chance loss without it") {
    // dG = 0 for every pair: the noise filter assigns zero kappa everywhere,
    // leaving the environment undefined; without the filter every pair scores
    // 0.5 from the sign(0) tie.
    const auto recs = oracle_records(0.2, 0.2, 4);
    const auto envs = build_coupled_environments(recs);

    EvalOptions opts;
    const auto filtered = empirical_sign_error(envs[0], "oracle.gap", opts);
    CHECK(filtered.kappa_sum == 0.0);
    CHECK_FALSE(filtered.defined);

    EvalOptions raw;
    raw.noise_filter = false;
    const auto unfiltered = empirical_sign_error(envs[0], "oracle.gap", raw);
    REQUIRE(unfiltered.defined);
    CHECK(unfiltered.value == 0.5);
    CHECK(unfiltered.n_eff == 16.0);
}

TEST_CASE("noise filter ablation: sub-threshold contrary pairs flip the verdict") {
    // Three side-a records sit at gap 0.30 (strong, correctly tracked by the
    // probe) and one at 0.1005, a hair above side b's 0.10: its four pairs
    // have |dG| = 0.0005, far below the detectability threshold at
    // m_test = 10^4, and the probe moves the wrong way on exactly them.
    const auto ca = make_config(0.01, 2, 16, "t", 64);
    const auto cb = make_config(0.01, 2, 16, "t", 128);
    std::vector<ExperimentRecord> recs;
    for (int s = 0; s < 4; ++s) {
        const bool noisy = s == 3;
        auto ra = make_record(ca, s, noisy ? 0.1005 : 0.30);
        set_measure(ra, "probe", noisy ? 0.09 : 0.30);
        recs.push_back(ra);
        auto rb = make_record(cb, s, 0.10);
        set_measure(rb, "probe", 0.10);
        recs.push_back(rb);
    }
    const auto envs = build_coupled_environments(recs);
    REQUIRE(envs.size() == 1);
    REQUIRE(envs[0].pair_count() == 16);

    // 12 strong pairs: dG = -0.2, dC = -0.2, loss 0, equal positive weight.
    // 4 noise pairs: dG = -0.0005 (kappa exactly 0), dC = +0.01, loss 1.
    EvalOptions opts;
    const auto filtered = empirical_sign_error(envs[0], "probe", opts);
    REQUIRE(filtered.defined);
    CHECK(filtered.value == 0.0);  // zero-weight pairs change nothing, exactly
    CHECK(filtered.n_eff == 12.0);
    CHECK(filtered.pairs_used == 16);

    EvalOptions raw;
    raw.noise_filter = false;
    const auto unfiltered = empirical_sign_error(envs[0], "probe", raw);
    REQUIRE(unfiltered.defined);
    CHECK(unfiltered.value == 0.25);  // 4 of 16 uniform pairs at loss 1
    CHECK(unfiltered.n_eff == 16.0);
}

TEST_CASE("weak environment value is a weighted combination of its constituents") {
    // Two contexts with opposite verdicts for the same (axis, value pair).
    std::vector<ExperimentRecord> recs;
    for (int s = 0; s < 4; ++s) {
        for (int width : {16, 32}) {
            auto a = make_record(make_config(0.01, 2, width, "t", 64), s, 0.3);
            auto b = make_record(make_config(0.01, 2, width, "t", 128), s, 0.1);
            // width 16: measure tracks the gap; width 32: opposes it.
            set_measure(a, "probe", width == 16 ? 0.3 : -0.3);
            set_measure(b, "probe", width == 16 ? 0.1 : -0.1);
            recs.push_back(a);
            recs.push_back(b);
        }
    }
    // Configs (w16,m64),(w16,m128),(w32,m64),(w32,m128) give two train-size
    // environments (one per width) and two width environments (one per size).
    const auto strict = build_coupled_environments(recs);
    REQUIRE(strict.size() == 4);

    EvalOptions opts;
    opts.n_eff_min = 12.0;
    std::vector<double> strict_values;
    for (const auto& env : strict) {
        if (env.axis != Axis::train_size) continue;
        const auto r = empirical_sign_error(env, "probe", opts);
        REQUIRE(r.defined);
        strict_values.push_back(r.value);
    }
    REQUIRE(strict_values.size() == 2);

    const auto weak = build_weak_environments(filter_by_axes(strict, {Axis::train_size}));
    REQUIRE(weak.size() == 1);
    CHECK(weak[0].blocks.size() == 2);
    CHECK(weak[0].pair_count() == 32);
    const auto wr = empirical_sign_error(weak[0], "probe", opts);
    REQUIRE(wr.defined);
    // Equal weights in both blocks: the union value is the plain average
    // here, and never exceeds the worst constituent in general.
    const double lo = std::min(strict_values[0], strict_values[1]);
    const double hi = std::max(strict_values[0], strict_values[1]);
    CHECK(wr.value >= lo);
    CHECK(wr.value <= hi);
    CHECK(wr.value == doctest::Approx(0.5 * (lo + hi)));
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("measure evaluation takes the worst environment and the mean") {
    // Env 1 (train_size at width 16): probe tracks the gap -> 0.
    // Env 2 (train_size at width 32): probe opposes it -> 1.
    std::vector<ExperimentRecord> recs;
    for (int s = 0; s < 4; ++s) {
        for (int width : {16, 32}) {
            auto a = make_record(make_config(0.01, 2, width, "t", 64), s, 0.3);
            auto b = make_record(make_config(0.01, 2, width, "t", 128), s, 0.1);
            set_measure(a, "probe", width == 16 ? 0.3 : -0.3);
            set_measure(b, "probe", width == 16 ? 0.1 : -0.1);
            recs.push_back(a);
            recs.push_back(b);
        }
    }
    const auto envs =
        filter_by_axes(build_coupled_environments(recs), {Axis::train_size});
    REQUIRE(envs.size() == 2);

    EvalOptions opts;
    const auto ev = evaluate_measure(envs, "probe", opts);
    REQUIRE(ev.defined);
    CHECK(ev.envs_used == 2);
    CHECK(ev.envs_skipped == 0);
    CHECK(ev.robust_value == 1.0);
    CHECK(ev.average_value == 0.5);
    REQUIRE(ev.per_env.size() == 2);

    const auto summary = summarize_family(ev, "train_size");
    CHECK(summary.defined);
    CHECK(summary.max_value == 1.0);
    CHECK(summary.mean_value == 0.5);
    CHECK(summary.family == "train_size");

    // Width envs have dG = 0 on every pair (same gaps at both widths):
    // nothing survives the filter.
    const auto wenvs = filter_by_axes(build_coupled_environments(recs), {Axis::width});
    REQUIRE(wenvs.size() == 2);
    const auto wev = evaluate_measure(wenvs, "probe", opts);
    CHECK_FALSE(wev.defined);
    CHECK(wev.envs_skipped == 2);
}

TEST_CASE("family percentile convention takes the j-th largest from above") {
    MeasureEvaluation ev;
    ev.measure = "synthetic";
    for (int i = 0; i < 10; ++i) {
        SignErrorResult r;
        r.value = 0.1 * i;  // 0.0 .. 0.9
        r.defined = true;
        ev.per_env.push_back(r);
        ++ev.envs_used;
    }
    ev.defined = true;
    const auto s = summarize_family(ev, "all");
    CHECK(s.p90_value == 0.9);  // 1st largest of 10 at p90 from above
    CHECK(s.max_value == 0.9);
    CHECK(s.mean_value == doctest::Approx(0.45));
}

#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "restarts/analysis.hpp"
#include "restarts/simulation.hpp"

using namespace restarts;

namespace {

// Direct transcription of the recursive definition.
std::uint64_t luby_oracle(std::uint64_t i) {
    for (std::uint64_t k = 1;; ++k) {
        const std::uint64_t full = (std::uint64_t{1} << k) - 1;
        if (i == full) return std::uint64_t{1} << (k - 1);
        const std::uint64_t lower = std::uint64_t{1} << (k - 1);
        if (i >= lower && i < full) return luby_oracle(i - lower + 1);
    }
}

bool identical(const SimulationResult& a, const SimulationResult& b) {
    auto same = [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; };
    return same(a.empirical_mean, b.empirical_mean) && same(a.std_error, b.std_error) &&
           a.total_restarts == b.total_restarts && a.censored_count == b.censored_count &&
           a.replications == b.replications && same(a.max_total_time, b.max_total_time);
}

SimulationConfig config(std::uint64_t seed, std::uint64_t reps) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.replications = reps;
    return cfg;
}

}  // namespace

TEST_CASE("splitmix64 reference output") {
    // First output of SplitMix64 started from state 0.
    CHECK(splitmix64_mix(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("generator is deterministic and seed dependent") {
    Xoshiro256StarStar a(5), b(5), c(6);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs = differs || x != c();
    }
    CHECK(differs);
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t r = 0; r < 1000; ++r) seeds.insert(substream_seed(9, s, r));
    }
    CHECK(seeds.size() == 4000);
}

TEST_CASE("Luby sequence") {
    CHECK(luby_sequence(1) == 1);
    CHECK(luby_sequence(7) == 4);
    CHECK(luby_sequence(12) == luby_oracle(12));
    CHECK(luby_sequence(15) == 8);
    const std::vector<std::uint64_t> prefix = {1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8};
    for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(luby_sequence(i + 1) == prefix[i]);
    for (std::uint64_t i = 1; i <= 5000; ++i) {
        const auto t = luby_sequence(i);
        CHECK(t == luby_oracle(i));
        CHECK(std::has_single_bit(t));
    }
    for (int k = 1; k < 63; ++k) {
        CHECK(luby_sequence((std::uint64_t{1} << k) - 1) == std::uint64_t{1} << (k - 1));
    }
    CHECK_THROWS_AS(luby_sequence(0), std::invalid_argument);
}

TEST_CASE("policy validation") {
    CHECK_THROWS_AS(validate(FixedCutoff{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(FixedCutoff{-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Luby{INFINITY}), std::invalid_argument);
    CHECK_NOTHROW(validate(NoRestart{}));
    const auto d = Distribution::weibull(1.0, 1.0).shifted(2.0);
    CHECK_THROWS_AS(simulate(d, FixedCutoff{2.0}, config(1, 10)), InvalidCutoffError);
    CHECK_NOTHROW(simulate(d, FixedCutoff{2.5}, config(1, 10)));
    CHECK_THROWS_AS(simulate(d, NoRestart{}, config(1, 0)), std::invalid_argument);
    auto cfg = config(1, 10);
    cfg.max_total_time = 0.0;
    CHECK_THROWS_AS(simulate(d, NoRestart{}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(compare_policies(d, std::vector<Policy>{}, config(1, 10)), std::invalid_argument);
}

TEST_CASE("results do not depend on thread count") {
    const auto d = Distribution::lognormal(0.0, 2.0);
    for (const Policy& policy : {Policy{NoRestart{}}, Policy{FixedCutoff{0.8}}, Policy{Luby{0.3}}}) {
        auto cfg = config(77, 20001);
        const auto one = simulate(d, policy, cfg);
        for (unsigned threads : {2u, 3u, 8u}) {
            cfg.threads = threads;
            CHECK(identical(simulate(d, policy, cfg), one));
        }
        cfg.threads = 1;
        CHECK(identical(simulate(d, policy, cfg), one));
    }
}

TEST_CASE("compare_policies uses one substream per policy") {
    const auto d = Distribution::generalized_pareto(1.0, 0.5);
    const std::vector<Policy> policies = {FixedCutoff{0.5}, FixedCutoff{0.5}};
    const auto cfg = config(3, 5000);
    const auto rows = compare_policies(d, policies, cfg);
    CHECK(identical(rows[0], simulate(d, policies[0], cfg, 0)));
    CHECK(identical(rows[1], simulate(d, policies[1], cfg, 1)));
    CHECK_FALSE(identical(rows[0], rows[1]));
}

TEST_CASE("fixed cut-off agrees with the analytic restarted mean") {
    const std::vector<Distribution> dists = {
        Distribution::lognormal(0.0, 0.8),       Distribution::lognormal(1.0, 1.5),
        Distribution::lognormal(0.0, 2.0),       Distribution::generalized_pareto(1.0, 0.5),
        Distribution::generalized_pareto(2.0, -0.5), Distribution::generalized_pareto(1.0, 1.5),
        Distribution::weibull(1.0, 0.5),         Distribution::weibull(3.0, 2.0),
        Distribution::weibull(1.0, 0.3).shifted(0.5),
    };
    std::uint64_t stream = 0;
    for (const auto& d : dists) {
        for (double p : {0.1, 0.5, 0.9}) {
            const double t = quantile(d, p);
            const auto r = simulate(d, FixedCutoff{t}, config(20240601, 100000), stream++);
            const double analytic = expected_runtime_restarted(d, p).value();
            CHECK(r.censored_count == 0);
            CHECK_MESSAGE(std::abs(r.empirical_mean - analytic) <= 3.0 * r.std_error,
                          d.family_name() << " p=" << p << " mc=" << r.empirical_mean
                                          << " analytic=" << analytic << " se=" << r.std_error);
        }
    }
}

TEST_CASE("exponential runtimes ignore the cut-off") {
    const auto d = Distribution::generalized_pareto(1.0, 0.0);
    const auto r = simulate(d, FixedCutoff{0.7}, config(4, 1'000'000));
    CHECK(std::abs(r.empirical_mean - 1.0) <= 3.0 * r.std_error);
}

TEST_CASE("GP fixed cut-off near zero approaches sigma") {
    const auto d = Distribution::generalized_pareto(1.0, 0.5);
    const auto r = simulate(d, FixedCutoff{quantile(d, 0.01)}, config(5, 1'000'000));
    const double analytic = expected_runtime_restarted(d, 0.01).value();
    CHECK(std::abs(r.empirical_mean - analytic) <= 3.0 * r.std_error);
    CHECK(analytic == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("optimal log-normal cut-off beats running to completion") {
    const auto d = Distribution::lognormal(0.0, 2.0);
    const auto opt = optimal_restart(d);
    const std::vector<Policy> policies = {NoRestart{}, FixedCutoff{opt.t_star}};
    const auto rows = compare_policies(d, policies, config(42, 1'000'000));
    CHECK(std::abs(rows[1].empirical_mean - opt.expected_runtime.value()) <=
          0.02 * opt.expected_runtime.value());
    CHECK(std::abs(rows[1].empirical_mean - opt.expected_runtime.value()) <= 3.0 * rows[1].std_error);
    CHECK(std::abs(rows[0].empirical_mean - std::exp(2.0)) <= 3.0 * rows[0].std_error);
    CHECK(rows[1].empirical_mean < rows[0].empirical_mean);
}

TEST_CASE("no restart recovers the plain mean") {
    for (const auto& d : {Distribution::lognormal(0.5, 1.0), Distribution::weibull(2.0, 0.7),
                          Distribution::generalized_pareto(1.0, 0.2)}) {
        const auto r = simulate(d, NoRestart{}, config(8, 100000));
        CHECK(r.total_restarts == 0);
        CHECK(std::abs(r.empirical_mean - mean(d).value()) <= 3.0 * r.std_error);
    }
}

TEST_CASE("restart counts follow the geometric law") {
    for (const auto& [d, t] : {std::pair{Distribution::lognormal(0.0, 1.0), 0.7},
                               std::pair{Distribution::weibull(1.0, 0.5), 0.2}}) {
        const std::uint64_t n = 100000;
        const auto r = simulate(d, FixedCutoff{t}, config(9, n));
        const double F = cdf(d, t);
        const double expected = (1.0 - F) / F;
        const double se = std::sqrt((1.0 - F) / (F * F) / static_cast<double>(n));
        CHECK(std::abs(static_cast<double>(r.total_restarts) / n - expected) <= 3.0 * se);
    }
}

TEST_CASE("Luby beats no restart on heavy tails") {
    for (const auto& d : {Distribution::lognormal(0.0, 2.0), Distribution::generalized_pareto(1.0, 0.5)}) {
        const std::vector<Policy> policies = {NoRestart{}, Luby{quantile(d, 0.1)}};
        const auto rows = compare_policies(d, policies, config(10, 100000));
        CHECK(rows[1].empirical_mean < rows[0].empirical_mean);
        if (d.family_name() == "gp") CHECK(rows[1].empirical_mean < 2.0);
    }
}

TEST_CASE("infinite mean without restarts is censored") {
    const auto d = Distribution::generalized_pareto(1.0, 2.0);
    const auto rows = compare_policies(d, std::vector<Policy>{NoRestart{}, Luby{1.0}}, config(11, 100000));
    CHECK(rows[0].censored_count > 0);
    CHECK(rows[0].censored_count <= rows[0].replications);
    CHECK(rows[1].censored_count == 0);
    CHECK(std::isfinite(rows[1].empirical_mean));
    CHECK(rows[0].max_total_time == doctest::Approx(1e6 * quantile(d, 0.5)));

    auto cfg = config(12, 100);
    cfg.max_total_time = 1e-9;
    const auto all = simulate(Distribution::weibull(1.0, 1.0), NoRestart{}, cfg);
    CHECK(all.censored_count == 100);
    CHECK(std::isnan(all.empirical_mean));
}

TEST_CASE("pairwise sum") {
    std::vector<double> xs(1001, 0.1);
    CHECK(pairwise_sum(xs) == doctest::Approx(100.1).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

#include "restarts/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

namespace restarts {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct Replication {
    double total = 0.0;
    std::uint64_t restarts = 0;
    bool censored = false;
};

class CutoffSchedule {
public:
    explicit CutoffSchedule(const Policy& policy) : policy_(policy) {}

    double next() {
        if (const auto* f = std::get_if<FixedCutoff>(&policy_)) return f->t;
        if (const auto* l = std::get_if<Luby>(&policy_)) {
            return l->base * static_cast<double>(luby_sequence(index_++));
        }
        return std::numeric_limits<double>::infinity();
    }

private:
    const Policy& policy_;
    std::uint64_t index_ = 1;
};

Replication run_replication(const Distribution& d, const Policy& policy, double budget,
                            std::uint64_t max_restarts, std::uint64_t seed) {
    Xoshiro256StarStar gen(seed);
    CutoffSchedule schedule(policy);
    Replication rep;
    for (;;) {
        const double cutoff = schedule.next();
        const double runtime = sample(d, gen);
        if (runtime <= cutoff) {
            rep.total += runtime;
            rep.censored = !(rep.total <= budget);
            return rep;
        }
        rep.total += cutoff;
        ++rep.restarts;
        if (!(rep.total <= budget) || rep.restarts > max_restarts) {
            rep.censored = true;
            return rep;
        }
    }
}

double pairwise_sum_impl(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(x, half) + pairwise_sum_impl(x + half, n - half);
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed) {
    for (auto& word : s_) {
        seed += kGolden;
        word = splitmix64_mix(seed);
    }
}

Xoshiro256StarStar::result_type Xoshiro256StarStar::operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t h = splitmix64_mix(seed + kGolden * (stream + 1));
    return splitmix64_mix(h + kGolden * (index + 1));
}

std::uint64_t luby_sequence(std::uint64_t i) {
    if (i == 0) throw std::invalid_argument("luby_sequence: index starts at 1");
    for (;;) {
        const int k = std::bit_width(i);  // 2^{k-1} <= i < 2^k
        const std::uint64_t top = std::uint64_t{1} << (k - 1);
        if (i == (top << 1) - 1) return top;
        i = i - top + 1;
    }
}

void validate(const Policy& policy) {
    if (const auto* f = std::get_if<FixedCutoff>(&policy)) {
        if (!(std::isfinite(f->t) && f->t > 0.0)) {
            throw std::invalid_argument("fixed cut-off must be finite and > 0");
        }
    } else if (const auto* l = std::get_if<Luby>(&policy)) {
        if (!(std::isfinite(l->base) && l->base > 0.0)) {
            throw std::invalid_argument("Luby base must be finite and > 0");
        }
    }
}

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

SimulationResult simulate(const Distribution& d, const Policy& policy, const SimulationConfig& cfg,
                          std::uint64_t stream) {
    validate(policy);
    if (cfg.replications == 0) throw std::invalid_argument("replications must be >= 1");
    const double budget = cfg.max_total_time.value_or(1e6 * quantile(d, 0.5));
    if (!(budget > 0.0)) throw std::invalid_argument("max_total_time must be > 0");
    if (const auto* f = std::get_if<FixedCutoff>(&policy); f && f->t <= d.location()) {
        throw InvalidCutoffError(fmt::format(
            "fixed cut-off {} does not exceed the location {}; no run can finish", f->t,
            d.location()));
    }

    const std::uint64_t n = cfg.replications;
    std::vector<Replication> reps(n);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t r = begin; r < end; ++r) {
            reps[r] = run_replication(d, policy, budget, cfg.max_restarts,
                                      substream_seed(cfg.seed, stream, r));
        }
    };

    const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(cfg.threads, n));
    if (workers == 1) {
        work(0, n);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::uint64_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, n * w / workers, n * (w + 1) / workers);
        }
    }

    SimulationResult result;
    result.replications = n;
    result.max_total_time = budget;
    std::vector<double> totals;
    totals.reserve(n);
    for (const auto& rep : reps) {
        result.total_restarts += rep.restarts;
        if (rep.censored) {
            ++result.censored_count;
        } else {
            totals.push_back(rep.total);
        }
    }

    const std::size_t m = totals.size();
    if (m == 0) {
        result.empirical_mean = std::numeric_limits<double>::quiet_NaN();
        return result;
    }
    const double mean = pairwise_sum(totals) / static_cast<double>(m);
    result.empirical_mean = mean;
    if (m > 1) {
        for (double& x : totals) x = (x - mean) * (x - mean);
        const double variance = pairwise_sum(totals) / static_cast<double>(m - 1);
        result.std_error = std::sqrt(variance / static_cast<double>(m));
    }
    return result;
}

std::vector<SimulationResult> compare_policies(const Distribution& d,
                                               std::span<const Policy> policies,
                                               const SimulationConfig& cfg) {
    if (policies.empty()) throw std::invalid_argument("compare_policies: no policies given");
    std::vector<SimulationResult> out;
    out.reserve(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        out.push_back(simulate(d, policies[i], cfg, i));
    }
    return out;
}

}  // namespace restarts

#ifndef RESTARTS_SIMULATION_HPP
#define RESTARTS_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "restarts/distributions.hpp"

namespace restarts {

/// SplitMix64 output function (Steele, Lea & Flood). Bijective mixer.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// xoshiro256** 1.0 (Blackman & Vigna), state expanded from a 64-bit seed
/// with SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::array<std::uint64_t, 4> s_{};
};

inline constexpr std::string_view kGeneratorName = "xoshiro256**/splitmix64";

/// Seed of substream (stream, index) under a master seed:
///   h = mix(seed + φ·(stream + 1)),  result = mix(h + φ·(index + 1))
/// with φ = 0x9E3779B97F4A7C15 and mix = splitmix64_mix. Replication r of
/// policy i draws from substream (i, r).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Luby's universal sequence 1,1,2,1,1,2,4,1,1,2,1,1,2,4,8,…:
/// t(i) = 2^{k-1} if i = 2^k - 1, else t(i - 2^{k-1} + 1) for
/// 2^{k-1} <= i < 2^k - 1. Throws std::invalid_argument for i = 0.
std::uint64_t luby_sequence(std::uint64_t i);

struct NoRestart {};

struct FixedCutoff {
    double t;
};

/// Cut-offs base · luby_sequence(1), base · luby_sequence(2), …
struct Luby {
    double base;
};

using Policy = std::variant<NoRestart, FixedCutoff, Luby>;

/// Throws std::invalid_argument unless cut-off/base are finite and > 0.
void validate(const Policy& policy);

struct SimulationConfig {
    std::uint64_t seed = 0;
    std::uint64_t replications = 1;
    /// Per-replication time budget; replications exceeding it are censored.
    /// Defaults to 1e6 · Q(0.5) of the simulated distribution.
    std::optional<double> max_total_time;
    /// Second guard: replications needing more restarts are censored.
    std::uint64_t max_restarts = 100'000'000;
    /// Worker threads; results do not depend on this value.
    unsigned threads = 1;
};

struct SimulationResult {
    /// Mean over uncensored replications (NaN if all were censored).
    double empirical_mean = 0.0;
    double std_error = 0.0;
    std::uint64_t total_restarts = 0;
    std::uint64_t censored_count = 0;
    std::uint64_t replications = 0;
    double max_total_time = 0.0;
};

/// Thrown when a fixed cut-off can never be reached by a finishing run.
class InvalidCutoffError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Monte Carlo estimate of the expected runtime under `policy`. Each
/// replication draws runs until one finishes within its cut-off, paying the
/// full cut-off for every aborted run. Deterministic in (seed, stream,
/// inputs) regardless of cfg.threads.
///
/// Throws InvalidCutoffError for FixedCutoff t <= location, and
/// std::invalid_argument for invalid policy or configuration.
SimulationResult simulate(const Distribution& d, const Policy& policy, const SimulationConfig& cfg,
                          std::uint64_t stream = 0);

/// Runs policy i on substream i, so the first entry equals simulate(d,
/// policies[0], cfg).
std::vector<SimulationResult> compare_policies(const Distribution& d,
                                               std::span<const Policy> policies,
                                               const SimulationConfig& cfg);

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace restarts

#endif  // RESTARTS_SIMULATION_HPP

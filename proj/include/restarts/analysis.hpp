#ifndef RESTARTS_ANALYSIS_HPP
#define RESTARTS_ANALYSIS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "restarts/distributions.hpp"

namespace restarts {

// Fixed cut-off restarts at t = Q(p): every run that has not finished by t
// is aborted and started afresh. Throughout, p is the probability that a
// single run finishes before the cut-off.

/// E[X_{Q(p)}] = ((1-p)/p) Q(p) + ∫₀ᵖ Q(u) du / p.
///
/// p = 0 returns the limit p -> 0⁺: Q'(0⁺) for families starting at zero
/// (σ for GP, 0 / a / ∞ for Weibull k < 1 / = 1 / > 1, ∞ for log-normal)
/// and ∞ whenever a location b > 0 is present. Finite for every p ∈ (0, 1)
/// even when E[X] = ∞. Throws std::domain_error for p = 1.
ExtendedNonNegReal expected_runtime_restarted(const Distribution& d, Level p);

/// p · (E[X] - E[X_{Q(p)}]), computed from the upper-tail integral so that
/// levels close to 1 keep their precision. +∞ when E[X] = ∞.
double restart_gain(const Distribution& d, Level p);

/// (1-p)L'(p) + L(p) - p - (p-1)c for the unwrapped variable, with
/// c = location / (scale · E[X]). Negative exactly where restarting at Q(p)
/// helps. Evaluated through the Lorenz curve, independently of
/// restart_gain. Throws InfiniteMeanError.
double lorenz_condition_gap(const Distribution& d, Level p);

/// True iff restarting at Q(p) strictly lowers the expected runtime. Gains
/// within 1e-12 (relative) of zero count as no gain, so the exponential law
/// is never reported useful through round-off. Always true for p ∈ (0, 1)
/// when the mean is infinite. Throws std::domain_error outside (0, 1).
bool usefulness_at(const Distribution& d, Level p);

/// Q(0.5)/E[X] < 0.5. Sufficient for usefulness_at(d, 0.5), not necessary.
/// Throws InfiniteMeanError.
bool quick_median_test(const Distribution& d);

enum class UsefulnessStatus { Useful, NotUseful, Indifferent, TriviallyUsefulInfiniteMean };

std::string_view to_string(UsefulnessStatus s);

/// Useful or TriviallyUsefulInfiniteMean.
bool restarts_help(UsefulnessStatus s);

struct PInterval {
    double lo;
    double hi;
};

struct UsefulnessVerdict {
    UsefulnessStatus status = UsefulnessStatus::NotUseful;
    std::optional<double> witness_p;
    std::vector<PInterval> useful_intervals;
};

/// 2000 levels evenly spaced on [1e-4, 1 - 1e-4]. At this resolution the
/// log-normal shows no useful level for σ below about 0.55; the useful
/// region for small σ sits closer to p = 1 than the grid reaches.
std::vector<Level> default_verdict_grid(std::size_t n = 2000);

/// Scans usefulness_at over a sorted grid inside (0, 1), merges adjacent
/// useful grid points into closed intervals and picks as witness the point
/// with the most negative lorenz_condition_gap. Indifferent when every gain
/// is zero to 1e-12 relative.
UsefulnessVerdict usefulness_verdict(const Distribution& d, std::span<const Level> grid);
UsefulnessVerdict usefulness_verdict(const Distribution& d);

/// (p-1)Q(p) + p(1-p)Q'(p) - 𝔔(p) + 𝔔(0) - b for Y = βX + b, i.e.
/// p² · dE[X_{Q(p)}]/dp. Scaling multiplies it by β; the location shifts
/// it by -b. Throws std::domain_error outside (0, 1).
double optimal_condition_residual(const Distribution& d, Level p);

/// 512 levels: geometric in p on [1e-6, 1e-2], uniform on (1e-2, 0.99),
/// geometric in 1-p on [1e-2, 1e-12].
std::vector<Level> root_bracketing_grid(std::size_t n = 512);

struct StationaryPoint {
    Level level;
    bool is_minimum;  // residual changes sign from - to +
};

/// Sign changes of optimal_condition_residual between adjacent grid points,
/// each refined by bisection in log-odds until |Δp| <= 1e-10.
std::vector<StationaryPoint> stationary_points(const Distribution& d,
                                               std::span<const Level> grid);

struct OptimalRestart {
    double p_star = 0.0;
    double q_star = 1.0;  // 1 - p_star, exact
    double t_star = 0.0;
    ExtendedNonNegReal expected_runtime;
    ExtendedNonNegReal unrestarted_mean;
    bool boundary_case = false;  // p_star = 0 is the p -> 0⁺ limit
};

class NoImprovementError : public std::runtime_error {
public:
    NoImprovementError(ExtendedNonNegReal best, ExtendedNonNegReal mean);
    ExtendedNonNegReal best() const { return best_; }
    ExtendedNonNegReal mean() const { return mean_; }

private:
    ExtendedNonNegReal best_;
    ExtendedNonNegReal mean_;
};

/// Global minimiser of E[X_{Q(p)}] over p ∈ [0, 1): compares the p -> 0⁺
/// limit with every stationary point on the bracketing grid. Throws
/// NoImprovementError when no candidate beats E[X] by more than 1e-12
/// relative.
OptimalRestart optimal_restart(const Distribution& d, std::span<const Level> grid);
OptimalRestart optimal_restart(const Distribution& d);

/// n evenly spaced values on [lo, hi]; n = 1 gives {lo}.
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 0;

    /// Throws std::invalid_argument for n = 0, lo > hi, or non-finite ends.
    std::vector<double> values() const;
};

struct RegionScan {
    std::vector<double> shape_values;
    std::vector<double> p_values;
    std::vector<std::uint8_t> useful;  // row-major, shape × p

    bool at(std::size_t shape_index, std::size_t p_index) const {
        return useful[shape_index * p_values.size() + p_index] != 0;
    }
    /// Smallest shape value with at least one useful cell.
    std::optional<double> smallest_useful_shape() const;
};

/// usefulness_at(LogNormal(0, σ_i), p_j) for every cell. μ is fixed at 0
/// since e^μ is a pure scale factor.
RegionScan region_scan_lognormal(const GridSpec& sigma, const GridSpec& p);

struct CurvePoint {
    double p;
    ExtendedNonNegReal expected_runtime;
};

std::vector<CurvePoint> restarted_mean_curve(const Distribution& d, std::span<const double> p_grid);

}  // namespace restarts

#endif  // RESTARTS_ANALYSIS_HPP

#include "restarts/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace restarts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative level below which a restart gain is treated as round-off.
constexpr double kGainNoiseFloor = 1e-12;

// Bisection stops once the bracket is this narrow in log-odds; since
// dp/du = p(1-p) <= 1/4 this also bounds |Δp| by 1e-10.
constexpr double kLogOddsWidth = 4e-10;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_open_unit(const Level& p, const char* op) {
    if (!(p.p() > 0.0 && p.q() > 0.0)) {
        throw std::domain_error(fmt::format("{}: p must lie in (0, 1), got {}", op, p.p()));
    }
}

struct Gain {
    double value;  // p (E[Y] - E[Y_{Q(p)}])
    double scale;  // magnitude of the terms it was formed from
};

// For Y = βX + b:  p (E[Y] - E[Y_{Q(p)}]) = β (∫ₚ¹Q_X - q (Q_X(p) + E[X])) - q b.
Gain gain_terms(const Distribution& d, const Level& p, double base_mean) {
    const Distribution x = d.base();
    const double q = p.q();
    const double tail = tail_expectation(x, p);
    const double head = q * (quantile(x, p) + base_mean);
    const double beta = d.scale();
    const double shift = q * d.location();
    return {beta * (tail - head) - shift, beta * (tail + head) + shift};
}

bool gain_is_positive(const Gain& g) { return g.value > kGainNoiseFloor * g.scale; }

bool gain_is_zero(const Gain& g) { return std::abs(g.value) <= kGainNoiseFloor * g.scale; }

double base_mean_value(const Distribution& d) { return mean(d.base()).value(); }

ExtendedNonNegReal limit_at_zero(const Distribution& d) {
    if (d.location() > 0.0) return ExtendedNonNegReal::infinity();
    const double beta = d.scale();
    const double base = std::visit(overloaded{[](const LogNormalParams&) { return kInf; },
                                              [](const GeneralizedParetoParams& f) { return f.sigma; },
                                              [](const WeibullParams& f) {
                                                  if (f.k < 1.0) return 0.0;
                                                  return f.k == 1.0 ? f.a : kInf;
                                              }},
                                   d.family());
    return ExtendedNonNegReal(beta * base);
}

Level level_from_log_odds(double u) {
    if (u < 0.0) {
        const double e = std::exp(u);
        return Level(e / (1.0 + e));
    }
    return Level::upper_tail(1.0 / (1.0 + std::exp(u)));
}

double log_odds(const Level& p) { return std::log(p.p()) - std::log(p.q()); }

void validate_grid(std::span<const Level> grid) {
    if (grid.empty()) throw std::invalid_argument("p grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i].p() > 0.0 && grid[i].q() > 0.0)) {
            throw std::invalid_argument(fmt::format("p grid value {} outside (0, 1)", grid[i].p()));
        }
        if (i > 0 && !(grid[i - 1].p() < grid[i].p() ||
                       (grid[i - 1].p() == grid[i].p() && grid[i - 1].q() > grid[i].q()))) {
            throw std::invalid_argument("p grid must be strictly increasing");
        }
    }
}

std::vector<double> geometric(double from, double to, std::size_t n) {
    std::vector<double> out(n);
    const double lf = std::log(from);
    const double lt = std::log(to);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (n == 1) ? from : std::exp(lf + (lt - lf) * static_cast<double>(i) / (n - 1));
    }
    if (n > 1) out.back() = to;
    return out;
}

}  // namespace

ExtendedNonNegReal expected_runtime_restarted(const Distribution& d, Level p) {
    if (!(p.q() > 0.0)) {
        throw std::domain_error("expected_runtime_restarted: p must lie in [0, 1)");
    }
    if (p.p() == 0.0) return limit_at_zero(d);
    const double value = (p.q() / p.p()) * quantile(d, p) + partial_expectation(d, p) / p.p();
    return ExtendedNonNegReal(value);
}

double restart_gain(const Distribution& d, Level p) {
    require_open_unit(p, "restart_gain");
    const auto m = mean(d);
    if (!m.is_finite()) return kInf;
    return gain_terms(d, p, base_mean_value(d)).value;
}

double lorenz_condition_gap(const Distribution& d, Level p) {
    require_open_unit(p, "lorenz_condition_gap");
    const Distribution x = d.base();
    const auto ex = mean(x);
    if (!ex.is_finite()) throw InfiniteMeanError("lorenz_condition_gap: mean is infinite");
    const double c = d.location() / (d.scale() * ex.value());
    return p.q() * lorenz_deriv(x, p) + lorenz(x, p) - p.p() + p.q() * c;
}

bool usefulness_at(const Distribution& d, Level p) {
    require_open_unit(p, "usefulness_at");
    const auto m = mean(d);
    if (!m.is_finite()) return true;
    return gain_is_positive(gain_terms(d, p, base_mean_value(d)));
}

bool quick_median_test(const Distribution& d) {
    const auto m = mean(d);
    if (!m.is_finite()) throw InfiniteMeanError("quick_median_test: mean is infinite");
    return quantile(d, 0.5) / m.value() < 0.5;
}

std::string_view to_string(UsefulnessStatus s) {
    switch (s) {
        case UsefulnessStatus::Useful: return "useful";
        case UsefulnessStatus::NotUseful: return "not_useful";
        case UsefulnessStatus::Indifferent: return "indifferent";
        case UsefulnessStatus::TriviallyUsefulInfiniteMean: return "trivially_useful_infinite_mean";
    }
    return "unknown";
}

bool restarts_help(UsefulnessStatus s) {
    return s == UsefulnessStatus::Useful || s == UsefulnessStatus::TriviallyUsefulInfiniteMean;
}

std::vector<Level> default_verdict_grid(std::size_t n) {
    std::vector<Level> grid;
    grid.reserve(n);
    for (double p : GridSpec{1e-4, 1.0 - 1e-4, n}.values()) grid.emplace_back(p);
    return grid;
}

UsefulnessVerdict usefulness_verdict(const Distribution& d, std::span<const Level> grid) {
    validate_grid(grid);
    UsefulnessVerdict verdict;

    const auto m = mean(d);
    if (!m.is_finite()) {
        verdict.status = UsefulnessStatus::TriviallyUsefulInfiniteMean;
        verdict.useful_intervals.push_back({grid.front().p(), grid.back().p()});
        return verdict;
    }

    const double ex = base_mean_value(d);
    std::vector<bool> useful(grid.size());
    bool all_zero = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Gain g = gain_terms(d, grid[i], ex);
        useful[i] = gain_is_positive(g);
        all_zero = all_zero && gain_is_zero(g);
    }
    if (all_zero) {
        verdict.status = UsefulnessStatus::Indifferent;
        return verdict;
    }

    double best_gap = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!useful[i]) continue;
        if (i == 0 || !useful[i - 1]) {
            verdict.useful_intervals.push_back({grid[i].p(), grid[i].p()});
        }
        verdict.useful_intervals.back().hi = grid[i].p();
        const double gap = lorenz_condition_gap(d, grid[i]);
        if (gap < best_gap) {
            best_gap = gap;
            verdict.witness_p = grid[i].p();
        }
    }
    verdict.status = verdict.useful_intervals.empty() ? UsefulnessStatus::NotUseful
                                                      : UsefulnessStatus::Useful;
    return verdict;
}

UsefulnessVerdict usefulness_verdict(const Distribution& d) {
    const auto grid = default_verdict_grid();
    return usefulness_verdict(d, grid);
}

double optimal_condition_residual(const Distribution& d, Level p) {
    require_open_unit(p, "optimal_condition_residual");
    const Distribution x = d.base();
    const double residual = -p.q() * quantile(x, p) + p.p() * p.q() * quantile_deriv(x, p) -
                            partial_expectation(x, p);
    return d.scale() * residual - d.location();
}

std::vector<Level> root_bracketing_grid(std::size_t n) {
    if (n < 8) throw std::invalid_argument("root bracketing grid needs at least 8 points");
    const std::size_t n_low = n / 4;
    const std::size_t n_high = n / 2;
    const std::size_t n_mid = n - n_low - n_high;

    std::vector<Level> grid;
    grid.reserve(n);
    for (double p : geometric(1e-6, 1e-2, n_low)) grid.emplace_back(p);
    // interior of (1e-2, 0.99), endpoints belong to the geometric pieces
    for (std::size_t i = 1; i <= n_mid; ++i) {
        grid.emplace_back(1e-2 + (0.99 - 1e-2) * static_cast<double>(i) / (n_mid + 1));
    }
    for (double q : geometric(1e-2, 1e-12, n_high)) grid.push_back(Level::upper_tail(q));
    return grid;
}

std::vector<StationaryPoint> stationary_points(const Distribution& d,
                                               std::span<const Level> grid) {
    validate_grid(grid);
    std::vector<double> residual(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        residual[i] = optimal_condition_residual(d, grid[i]);
    }

    std::vector<StationaryPoint> roots;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double r0 = residual[i];
        const double r1 = residual[i + 1];
        if (!std::isfinite(r0) || !std::isfinite(r1)) continue;
        if (r0 == 0.0) {
            roots.push_back({grid[i], r1 > 0.0});
            continue;
        }
        if (std::signbit(r0) == std::signbit(r1) || r1 == 0.0) continue;

        double lo = log_odds(grid[i]);
        double hi = log_odds(grid[i + 1]);
        const bool rising = r0 < 0.0;
        for (int it = 0; it < 200 && hi - lo > kLogOddsWidth; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double r = optimal_condition_residual(d, level_from_log_odds(mid));
            if (r == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((r < 0.0) == rising) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push_back({level_from_log_odds(0.5 * (lo + hi)), rising});
    }
    return roots;
}

NoImprovementError::NoImprovementError(ExtendedNonNegReal best, ExtendedNonNegReal mean)
    : std::runtime_error(fmt::format(
          "restarts do not improve the expected runtime (best restarted {} vs unrestarted {})",
          to_string(best), to_string(mean))),
      best_(best),
      mean_(mean) {}

OptimalRestart optimal_restart(const Distribution& d, std::span<const Level> grid) {
    const auto m = mean(d);

    struct Candidate {
        Level level;
        ExtendedNonNegReal value;
        bool boundary;
    };
    std::optional<Candidate> best;

    const auto at_zero = limit_at_zero(d);
    if (at_zero.is_finite()) best = Candidate{Level(0.0), at_zero, true};

    for (const auto& sp : stationary_points(d, grid)) {
        const auto value = expected_runtime_restarted(d, sp.level);
        if (!best || value < best->value) best = Candidate{sp.level, value, false};
    }

    const bool improves =
        best && (m.is_finite() ? best->value.value() < m.value() * (1.0 - kGainNoiseFloor)
                               : best->value.is_finite());
    if (!improves) {
        throw NoImprovementError(best ? best->value : ExtendedNonNegReal::infinity(), m);
    }

    OptimalRestart out;
    out.p_star = best->level.p();
    out.q_star = best->level.q();
    out.t_star = quantile(d, best->level);
    out.expected_runtime = best->value;
    out.unrestarted_mean = m;
    out.boundary_case = best->boundary;
    return out;
}

OptimalRestart optimal_restart(const Distribution& d) {
    const auto grid = root_bracketing_grid();
    return optimal_restart(d, grid);
}

std::vector<double> GridSpec::values() const {
    if (n == 0) throw std::invalid_argument("grid needs at least one point");
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("grid bounds must be finite");
    }
    if (lo > hi) throw std::invalid_argument("grid lower bound exceeds upper bound");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

std::optional<double> RegionScan::smallest_useful_shape() const {
    for (std::size_t i = 0; i < shape_values.size(); ++i) {
        for (std::size_t j = 0; j < p_values.size(); ++j) {
            if (at(i, j)) return shape_values[i];
        }
    }
    return std::nullopt;
}

RegionScan region_scan_lognormal(const GridSpec& sigma, const GridSpec& p) {
    RegionScan scan;
    scan.shape_values = sigma.values();
    scan.p_values = p.values();
    for (double pv : scan.p_values) {
        if (!(pv > 0.0 && pv < 1.0)) {
            throw std::invalid_argument(fmt::format("p value {} outside (0, 1)", pv));
        }
    }
    scan.useful.resize(scan.shape_values.size() * scan.p_values.size());
    for (std::size_t i = 0; i < scan.shape_values.size(); ++i) {
        const auto d = Distribution::lognormal(0.0, scan.shape_values[i]);
        for (std::size_t j = 0; j < scan.p_values.size(); ++j) {
            scan.useful[i * scan.p_values.size() + j] = usefulness_at(d, scan.p_values[j]) ? 1 : 0;
        }
    }
    return scan;
}

std::vector<CurvePoint> restarted_mean_curve(const Distribution& d, std::span<const double> p_grid) {
    std::vector<CurvePoint> curve;
    curve.reserve(p_grid.size());
    for (double p : p_grid) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument(fmt::format("curve p value {} outside (0, 1)", p));
        }
        curve.push_back({p, expected_runtime_restarted(d, p)});
    }
    return curve;
}

}  // namespace restarts

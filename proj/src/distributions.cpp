#include "restarts/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "restarts/specfun.hpp"

namespace restarts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_open_unit(const Level& p, const char* op) {
    if (!(p.p() > 0.0 && p.q() > 0.0)) {
        throw std::domain_error(fmt::format("{}: p must lie in (0, 1), got {}", op, p.p()));
    }
}

void require_half_open_unit(const Level& p, const char* op) {
    if (!(p.q() > 0.0)) {
        throw std::domain_error(fmt::format("{}: p must lie in [0, 1), got {}", op, p.p()));
    }
}

// ---------------------------------------------------------------------------
// Log-normal. z = Φ⁻¹(p), Q = e^{μ+σz}, E = e^{μ+σ²/2}.

double ln_mean(const LogNormalParams& f) { return std::exp(f.mu + 0.5 * f.sigma * f.sigma); }

double ln_z(const Level& p) { return specfun::normal_quantile(p.p(), p.q()); }

double ln_quantile(const LogNormalParams& f, const Level& p) {
    if (p.p() == 0.0) return 0.0;
    return std::exp(f.mu + f.sigma * ln_z(p));
}

double ln_quantile_deriv(const LogNormalParams& f, const Level& p) {
    const double z = ln_z(p);
    // e^{μ + σz + z²/2} σ √(2π)
    return std::exp(f.mu + f.sigma * z + 0.5 * z * z) * f.sigma * std::sqrt(2.0 * std::numbers::pi);
}

double ln_antideriv(const LogNormalParams& f, const Level& p) {
    const double e = ln_mean(f);
    if (p.p() == 0.0) return -0.5 * e;
    return -0.5 * e * specfun::erf((f.sigma - ln_z(p)) / std::numbers::sqrt2);
}

double ln_partial(const LogNormalParams& f, const Level& p) {
    if (p.p() == 0.0) return 0.0;
    return ln_mean(f) * specfun::normal_cdf(ln_z(p) - f.sigma);
}

double ln_tail(const LogNormalParams& f, const Level& p) {
    if (p.p() == 0.0) return ln_mean(f);
    return ln_mean(f) * specfun::normal_sf(ln_z(p) - f.sigma);
}

double ln_cdf(const LogNormalParams& f, double x) {
    if (x <= 0.0) return 0.0;
    return specfun::normal_cdf((std::log(x) - f.mu) / f.sigma);
}

double ln_pdf(const LogNormalParams& f, double x) {
    if (x <= 0.0) return 0.0;
    const double u = (std::log(x) - f.mu) / f.sigma;
    return std::exp(-0.5 * u * u) / (x * f.sigma * std::sqrt(2.0 * std::numbers::pi));
}

// ---------------------------------------------------------------------------
// Generalized Pareto. With L = -log(1-p): Q = (σ/k)(e^{kL} - 1), which is
// evaluated through expm1 so k -> 0 degrades gracefully to σL.

double gp_quantile(const GeneralizedParetoParams& f, const Level& p) {
    const double l = p.neg_log_q();
    if (f.k == 0.0) return f.sigma * l;
    return f.sigma * std::expm1(f.k * l) / f.k;
}

double gp_quantile_deriv(const GeneralizedParetoParams& f, const Level& p) {
    return f.sigma * std::exp((1.0 + f.k) * p.neg_log_q());
}

// ∫₀ᵖ Q = σ Σ_{n≥1} (k+1)_{n-1} p^{n+1} / (n+1)!, used for small p where
// the closed forms cancel.
double gp_partial_series(const GeneralizedParetoParams& f, double p) {
    double coeff = 0.5 * p * p;  // n = 1: (k+1)_0 / 2!
    double sum = coeff;
    for (int n = 2; n < 400; ++n) {
        coeff *= (f.k + n - 1.0) * p / (n + 1.0);
        sum += coeff;
        if (std::abs(coeff) <= 1e-17 * std::abs(sum)) break;
    }
    return f.sigma * sum;
}

double gp_partial(const GeneralizedParetoParams& f, const Level& p) {
    if (p.p() == 0.0) return 0.0;
    if (p.p() <= 0.25) return gp_partial_series(f, p.p());
    const double l = p.neg_log_q();
    const double k = f.k;
    if (k == 0.0) return f.sigma * (p.p() - p.q() * l);
    if (std::abs(k) < 0.5) {
        // σ [1 - q (e^{kL} - 1 + k)/k] / (1 - k)
        return f.sigma * (1.0 - p.q() * (std::expm1(k * l) + k) / k) / (1.0 - k);
    }
    // (σ/k) (g - p), g = (e^{(k-1)L} - 1)/(k-1), g -> L at k = 1
    const double e = k - 1.0;
    const double g = (e == 0.0) ? l : std::expm1(e * l) / e;
    return f.sigma * (g - p.p()) / k;
}

double gp_antideriv_at_zero(const GeneralizedParetoParams& f) {
    if (f.k == 0.0 || f.k == 1.0) return 0.0;
    return -f.sigma / (f.k * (1.0 - f.k));
}

double gp_tail(const GeneralizedParetoParams& f, const Level& p) {
    if (f.k >= 1.0) return kInf;
    const double l = p.neg_log_q();
    if (f.k == 0.0) return f.sigma * p.q() * (l + 1.0);
    // σ q (e^{kL} - 1 + k) / (k (1 - k)); expm1 + k has no cancellation.
    return f.sigma * p.q() * (std::expm1(f.k * l) + f.k) / (f.k * (1.0 - f.k));
}

double gp_mean(const GeneralizedParetoParams& f) {
    return f.k < 1.0 ? f.sigma / (1.0 - f.k) : kInf;
}

double gp_cdf(const GeneralizedParetoParams& f, double x) {
    if (x <= 0.0) return 0.0;
    const double t = x / f.sigma;
    if (f.k == 0.0) return -std::expm1(-t);
    if (f.k < 0.0 && t >= -1.0 / f.k) return 1.0;
    return -std::expm1(-std::log1p(f.k * t) / f.k);
}

double gp_pdf(const GeneralizedParetoParams& f, double x) {
    if (x < 0.0) return 0.0;
    const double t = x / f.sigma;
    if (f.k == 0.0) return std::exp(-t) / f.sigma;
    if (f.k < 0.0 && t > -1.0 / f.k) return 0.0;
    return std::exp(-(1.0 / f.k + 1.0) * std::log1p(f.k * t)) / f.sigma;
}

// ---------------------------------------------------------------------------
// Weibull. Q = a L^{1/k}; ∫₀ᵖ Q = a γ(1+1/k, L); ∫ₚ¹ Q = a Γ(1+1/k, L).

double wb_quantile(const WeibullParams& f, const Level& p) {
    return f.a * std::pow(p.neg_log_q(), 1.0 / f.k);
}

double wb_quantile_deriv(const WeibullParams& f, const Level& p) {
    const double l = p.neg_log_q();
    return f.a * std::pow(l, 1.0 / f.k - 1.0) / (f.k * p.q());
}

double wb_partial(const WeibullParams& f, const Level& p) {
    return f.a * specfun::lower_incomplete_gamma(1.0 + 1.0 / f.k, p.neg_log_q());
}

double wb_tail(const WeibullParams& f, const Level& p) {
    return f.a * specfun::upper_incomplete_gamma(1.0 + 1.0 / f.k, p.neg_log_q());
}

double wb_mean(const WeibullParams& f) { return f.a * std::tgamma(1.0 + 1.0 / f.k); }

double wb_cdf(const WeibullParams& f, double x) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-std::pow(x / f.a, f.k));
}

double wb_pdf(const WeibullParams& f, double x) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
        if (f.k < 1.0) return kInf;
        return f.k == 1.0 ? 1.0 / f.a : 0.0;
    }
    const double t = x / f.a;
    return (f.k / f.a) * std::pow(t, f.k - 1.0) * std::exp(-std::pow(t, f.k));
}

// Quantities of the unwrapped family variable X.
double base_mean(const Family& fam) {
    return std::visit(overloaded{[](const LogNormalParams& f) { return ln_mean(f); },
                                 [](const GeneralizedParetoParams& f) { return gp_mean(f); },
                                 [](const WeibullParams& f) { return wb_mean(f); }},
                      fam);
}

double base_quantile(const Family& fam, const Level& p) {
    return std::visit(
        overloaded{[&](const LogNormalParams& f) { return ln_quantile(f, p); },
                   [&](const GeneralizedParetoParams& f) { return gp_quantile(f, p); },
                   [&](const WeibullParams& f) { return wb_quantile(f, p); }},
        fam);
}

double base_partial(const Family& fam, const Level& p) {
    return std::visit(
        overloaded{[&](const LogNormalParams& f) { return ln_partial(f, p); },
                   [&](const GeneralizedParetoParams& f) { return gp_partial(f, p); },
                   [&](const WeibullParams& f) { return wb_partial(f, p); }},
        fam);
}

}  // namespace

// ---------------------------------------------------------------------------

ExtendedNonNegReal::ExtendedNonNegReal(double v) : value_(v) {
    if (std::isnan(v) || v < 0.0) {
        throw std::domain_error(fmt::format("ExtendedNonNegReal: invalid value {}", v));
    }
}

ExtendedNonNegReal ExtendedNonNegReal::infinity() { return ExtendedNonNegReal(kInf); }

std::string to_string(const ExtendedNonNegReal& v) {
    return v.is_finite() ? fmt::format("{}", v.value()) : std::string("inf");
}

Level::Level(double p) : p_(p), q_(1.0 - p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(fmt::format("probability level {} outside [0, 1]", p));
    }
}

Level Level::upper_tail(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::domain_error(fmt::format("tail probability {} outside [0, 1]", q));
    }
    return Level(1.0 - q, q);
}

double Level::neg_log_q() const { return p_ < 0.5 ? -std::log1p(-p_) : -std::log(q_); }

Distribution::Distribution(Family family, double scale, double location)
    : family_(family), scale_(scale), location_(location) {
    require(std::isfinite(scale) && scale > 0.0, "scale must be finite and > 0");
    require(std::isfinite(location) && location >= 0.0, "location must be finite and >= 0");
    std::visit(overloaded{[](const LogNormalParams& f) {
                              require(std::isfinite(f.mu), "lognormal mu must be finite");
                              require(std::isfinite(f.sigma) && f.sigma > 0.0,
                                      "lognormal sigma must be finite and > 0");
                          },
                          [](const GeneralizedParetoParams& f) {
                              require(std::isfinite(f.sigma) && f.sigma > 0.0,
                                      "gp sigma must be finite and > 0");
                              require(std::isfinite(f.k), "gp k must be finite");
                          },
                          [](const WeibullParams& f) {
                              require(std::isfinite(f.a) && f.a > 0.0,
                                      "weibull a must be finite and > 0");
                              require(std::isfinite(f.k) && f.k > 0.0,
                                      "weibull k must be finite and > 0");
                          }},
               family_);
}

Distribution Distribution::lognormal(double mu, double sigma) {
    return Distribution(LogNormalParams{mu, sigma});
}

Distribution Distribution::generalized_pareto(double sigma, double k) {
    return Distribution(GeneralizedParetoParams{sigma, k});
}

Distribution Distribution::weibull(double a, double k) { return Distribution(WeibullParams{a, k}); }

Distribution Distribution::scaled(double factor) const {
    require(std::isfinite(factor) && factor > 0.0, "scale factor must be finite and > 0");
    return Distribution(family_, scale_ * factor, location_ * factor);
}

Distribution Distribution::shifted(double b) const {
    return Distribution(family_, scale_, location_ + b);
}

std::string Distribution::family_name() const {
    return std::visit(overloaded{[](const LogNormalParams&) { return std::string("lognormal"); },
                                 [](const GeneralizedParetoParams&) { return std::string("gp"); },
                                 [](const WeibullParams&) { return std::string("weibull"); }},
                      family_);
}

double cdf(const Distribution& d, double x) {
    const double u = (x - d.location()) / d.scale();
    return std::visit(overloaded{[&](const LogNormalParams& f) { return ln_cdf(f, u); },
                                 [&](const GeneralizedParetoParams& f) { return gp_cdf(f, u); },
                                 [&](const WeibullParams& f) { return wb_cdf(f, u); }},
                      d.family());
}

double pdf(const Distribution& d, double x) {
    const double u = (x - d.location()) / d.scale();
    const double fx =
        std::visit(overloaded{[&](const LogNormalParams& f) { return ln_pdf(f, u); },
                              [&](const GeneralizedParetoParams& f) { return gp_pdf(f, u); },
                              [&](const WeibullParams& f) { return wb_pdf(f, u); }},
                   d.family());
    return fx / d.scale();
}

double quantile(const Distribution& d, Level p) {
    require_half_open_unit(p, "quantile");
    return d.scale() * base_quantile(d.family(), p) + d.location();
}

double quantile_deriv(const Distribution& d, Level p) {
    require_open_unit(p, "quantile_deriv");
    const double base = std::visit(
        overloaded{[&](const LogNormalParams& f) { return ln_quantile_deriv(f, p); },
                   [&](const GeneralizedParetoParams& f) { return gp_quantile_deriv(f, p); },
                   [&](const WeibullParams& f) { return wb_quantile_deriv(f, p); }},
        d.family());
    return d.scale() * base;
}

double quantile_antideriv(const Distribution& d, Level p) {
    require_half_open_unit(p, "quantile_antideriv");
    const double base = std::visit(
        overloaded{[&](const LogNormalParams& f) { return ln_antideriv(f, p); },
                   [&](const GeneralizedParetoParams& f) {
                       return gp_antideriv_at_zero(f) + gp_partial(f, p);
                   },
                   [&](const WeibullParams& f) { return wb_partial(f, p); }},
        d.family());
    return d.scale() * base + p.p() * d.location();
}

double partial_expectation(const Distribution& d, Level p) {
    require_half_open_unit(p, "partial_expectation");
    return d.scale() * base_partial(d.family(), p) + p.p() * d.location();
}

double tail_expectation(const Distribution& d, Level p) {
    require_half_open_unit(p, "tail_expectation");
    const double base =
        std::visit(overloaded{[&](const LogNormalParams& f) { return ln_tail(f, p); },
                              [&](const GeneralizedParetoParams& f) { return gp_tail(f, p); },
                              [&](const WeibullParams& f) { return wb_tail(f, p); }},
                   d.family());
    return d.scale() * base + p.q() * d.location();
}

ExtendedNonNegReal mean(const Distribution& d) {
    const double m = base_mean(d.family());
    if (!std::isfinite(m)) return ExtendedNonNegReal::infinity();
    return ExtendedNonNegReal(d.scale() * m + d.location());
}

double lorenz(const Distribution& d, Level p) {
    const auto m = mean(d);
    if (!m.is_finite()) throw InfiniteMeanError("lorenz: mean is infinite");
    return partial_expectation(d, p) / m.value();
}

double lorenz_deriv(const Distribution& d, Level p) {
    const auto m = mean(d);
    if (!m.is_finite()) throw InfiniteMeanError("lorenz_deriv: mean is infinite");
    return quantile(d, p) / m.value();
}

}  // namespace restarts

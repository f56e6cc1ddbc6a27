#ifndef RESTARTS_DISTRIBUTIONS_HPP
#define RESTARTS_DISTRIBUTIONS_HPP

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

namespace restarts {

/// A nonnegative real or +∞. Heavy-tailed laws report their mean as +∞.
class ExtendedNonNegReal {
public:
    constexpr ExtendedNonNegReal() = default;

    /// Throws std::domain_error for NaN or negative input. +inf is accepted.
    explicit ExtendedNonNegReal(double v);

    static ExtendedNonNegReal infinity();

    bool is_finite() const { return value_ != kInf; }
    /// The stored value; +inf when infinite.
    double value() const { return value_; }

    friend auto operator<=>(const ExtendedNonNegReal& a, const ExtendedNonNegReal& b) {
        return a.value_ <=> b.value_;
    }
    friend bool operator==(const ExtendedNonNegReal& a, const ExtendedNonNegReal& b) = default;

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    double value_ = 0.0;
};

std::string to_string(const ExtendedNonNegReal& v);

/// A probability level p together with its complement q = 1 - p, both held
/// exactly. Constructing from q keeps upper-tail levels such as 1 - 1e-30
/// representable; constructing from p covers the usual case.
class Level {
public:
    /// Implicit so that plain probabilities can be passed where a level is
    /// expected. Throws std::domain_error unless p ∈ [0, 1].
    Level(double p);  // NOLINT(google-explicit-constructor)

    /// The level whose complement is q. Throws unless q ∈ [0, 1].
    static Level upper_tail(double q);

    double p() const { return p_; }
    double q() const { return q_; }

    /// -log(1 - p), accurate at both ends.
    double neg_log_q() const;

private:
    Level(double p, double q) : p_(p), q_(q) {}
    double p_;
    double q_;
};

struct LogNormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};

/// F(x) = 1 - (1 + kx/σ)^{-1/k}. k = 0 is the exponential law, k = -1 the
/// uniform law on [0, σ]; k <= -0.5 has finite support [0, -σ/k].
struct GeneralizedParetoParams {
    double sigma = 1.0;
    double k = 0.0;
};

/// F(x) = 1 - exp(-(x/a)^k).
struct WeibullParams {
    double a = 1.0;
    double k = 1.0;
};

using Family = std::variant<LogNormalParams, GeneralizedParetoParams, WeibullParams>;

/// Thrown by Lorenz-curve operations when the mean is infinite.
class InfiniteMeanError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Runtime distribution Y = scale * X + location, where X belongs to one of
/// the supported families. Immutable once constructed.
class Distribution {
public:
    /// Throws std::invalid_argument on invalid parameters (σ <= 0, a <= 0,
    /// Weibull k <= 0, scale <= 0, location < 0, non-finite values).
    explicit Distribution(Family family, double scale = 1.0, double location = 0.0);

    static Distribution lognormal(double mu, double sigma);
    static Distribution generalized_pareto(double sigma, double k);
    static Distribution weibull(double a, double k);

    /// γY = (γ·scale)X + γ·location.
    Distribution scaled(double factor) const;
    /// Y + b.
    Distribution shifted(double b) const;

    const Family& family() const { return family_; }
    double scale() const { return scale_; }
    double location() const { return location_; }

    /// The unwrapped family variable X (scale 1, location 0).
    Distribution base() const { return Distribution(family_); }

    std::string family_name() const;

private:
    Family family_;
    double scale_;
    double location_;
};

double cdf(const Distribution& d, double x);
double pdf(const Distribution& d, double x);

/// Q(p) = inf{x | F(x) >= p}. Q(0) is the support lower bound (the
/// location). Throws std::domain_error for p = 1. Heavy tails may overflow
/// to +inf for p extremely close to 1.
double quantile(const Distribution& d, Level p);

/// Q'(p) on (0, 1).
double quantile_deriv(const Distribution& d, Level p);

/// An antiderivative 𝔔 of Q on [0, 1); the constant follows the closed
/// forms (lognormal 𝔔(0) = -E[X]/2, GP 𝔔(0) = -σ/(k(1-k)), Weibull 0),
/// then the wrapper adds scale·𝔔_X(p) + p·location.
double quantile_antideriv(const Distribution& d, Level p);

/// ∫₀ᵖ Q(u) du = 𝔔(p) - 𝔔(0), evaluated without forming the difference.
double partial_expectation(const Distribution& d, Level p);

/// ∫ₚ¹ Q(u) du; +inf when the mean is infinite.
double tail_expectation(const Distribution& d, Level p);

ExtendedNonNegReal mean(const Distribution& d);

/// Lorenz curve L(p) = ∫₀ᵖ Q / E[X] and its derivative Q(p)/E[X].
/// Throw InfiniteMeanError when E[X] = ∞.
double lorenz(const Distribution& d, Level p);
double lorenz_deriv(const Distribution& d, Level p);

/// Uniform on (0, 1) from the top 52 bits of a 64-bit word: midpoints of
/// 2^52 cells, so neither 0 nor 1 is ever returned.
inline double uniform_open01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Inverse-transform draw: Q(U) for U uniform on (0, 1).
template <class Generator>
double sample(const Distribution& d, Generator& gen) {
    return quantile(d, Level(uniform_open01(gen())));
}

}  // namespace restarts

#endif  // RESTARTS_DISTRIBUTIONS_HPP

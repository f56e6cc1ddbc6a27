#include "restarts/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace restarts::specfun {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// Below this point erf uses the positive-term series, above it erfc uses
// the Laplace continued fraction.
constexpr double kErfSwitch = 2.0;

bool converged(double delta, double value, const Tolerance& tol) {
    return std::abs(delta) <= tol.abs_tol + tol.rel_tol * std::abs(value);
}

// erf(x) = (2/√π) x e^{-x²} Σ (2x²)^n / (1·3·…·(2n+1)); every term is
// positive so there is no cancellation for moderate x.
double erf_series(double x, const Tolerance& tol) {
    const double two_x2 = 2.0 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n <= tol.max_iter; ++n) {
        term *= two_x2 / (2.0 * n + 1.0);
        sum += term;
        if (term <= 0.5 * std::numeric_limits<double>::epsilon() * sum) {
            break;
        }
    }
    return kTwoOverSqrtPi * x * std::exp(-x * x) * sum;
}

// erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …)))), x > 0.
// Modified Lentz evaluation.
double erfc_continued_fraction(double x, const Tolerance& tol) {
    double f = kTiny;
    double c = f;
    double d = 0.0;
    for (int n = 1; n <= tol.max_iter; ++n) {
        const double a = (n == 1) ? 1.0 : 0.5 * (n - 1);
        d = x + a * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = x + a / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) <= std::numeric_limits<double>::epsilon()) {
            break;
        }
    }
    return std::exp(-x * x) * std::numbers::inv_sqrtpi * f;
}

// Acklam's rational approximation of the normal quantile (relative error
// about 1e-9); only used to seed Halley refinement.
double normal_quantile_seed(double p, double q) {
    constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                      -2.759285104469687e+02, 1.383577518672690e+02,
                                      -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                      -1.556989798598866e+02, 6.680131188771972e+01,
                                      -1.328068155288572e+01};
    constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                      -2.400758277161838e+00, -2.549732539343734e+00,
                                      4.374664141464968e+00,  2.938163982698783e+00};
    constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                      2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    auto tail = [&](double prob) {
        const double t = std::sqrt(-2.0 * std::log(prob));
        return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    };

    if (p < p_low) return tail(p);
    if (q < p_low) return -tail(q);
    const double t = p - 0.5;
    const double r = t * t;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// e^{-x} x^z / Γ(z), the common prefactor of P and Q.
double gamma_prefactor(double z, double x) {
    return std::exp(-x + z * std::log(x) - std::lgamma(z));
}

// Σ x^n / (z(z+1)…(z+n)); multiply by e^{-x} x^z to get γ(z, x).
double lower_gamma_series_sum(double z, double x, const Tolerance& tol) {
    double ap = z;
    double term = 1.0 / z;
    double sum = term;
    for (int n = 1; n <= tol.max_iter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) <= std::abs(sum) * 0.5 * std::numeric_limits<double>::epsilon()) {
            break;
        }
    }
    return sum;
}

// Continued fraction for Γ(z, x) e^{x} x^{-z}, valid for x > z + 1.
double upper_gamma_cf(double z, double x, const Tolerance& tol) {
    double b = x + 1.0 - z;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= tol.max_iter; ++i) {
        const double an = -i * (i - z);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) <= std::numeric_limits<double>::epsilon()) {
            break;
        }
    }
    return h;
}

void check_gamma_domain(double z, double x) {
    if (!(z > 0.0)) throw std::domain_error("incomplete gamma: z must be > 0");
    if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be >= 0");
}

double complete_gamma(double z) {
    return z < 170.0 ? std::tgamma(z) : std::exp(std::lgamma(z));
}

}  // namespace

void Tolerance::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1) {
        throw std::invalid_argument("Tolerance: abs_tol, rel_tol and max_iter must be positive");
    }
}

double erf(double x, const Tolerance& tol) {
    if (std::isnan(x)) return x;
    if (x < 0.0) return -erf(-x, tol);
    if (x < kErfSwitch) return erf_series(x, tol);
    return 1.0 - erfc_continued_fraction(x, tol);
}

double erfc(double x, const Tolerance& tol) {
    if (std::isnan(x)) return x;
    if (x < 0.0) return 1.0 + erf(-x, tol);
    if (x < kErfSwitch) return 1.0 - erf_series(x, tol);
    return erfc_continued_fraction(x, tol);
}

double erfc_inv(double y, const Tolerance& tol) {
    if (!(y >= 0.0 && y <= 2.0)) throw std::domain_error("erfc_inv: argument outside [0, 2]");
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    if (y == 2.0) return -std::numeric_limits<double>::infinity();
    if (y == 1.0) return 0.0;
    if (y > 1.0) return -erfc_inv(2.0 - y, tol);

    // erfc(x) = y  <=>  Φ(-x√2) = y/2
    double x = -normal_quantile_seed(0.5 * y, 1.0 - 0.5 * y) * std::numbers::sqrt2 / 2.0;
    for (int it = 0; it < tol.max_iter; ++it) {
        const double f = erfc(x, tol) - y;
        const double fp = -kTwoOverSqrtPi * std::exp(-x * x);
        const double u = f / fp;
        // Halley: f''/f' = -2x for both erf and erfc.
        const double step = u / (1.0 + x * u);
        x -= step;
        if (converged(step, x, tol)) break;
    }
    return x;
}

double erf_inv(double y, const Tolerance& tol) {
    if (!(std::abs(y) < 1.0)) throw std::domain_error("erf_inv: argument must lie in (-1, 1)");
    if (y == 0.0) return 0.0;
    if (y < 0.0) return -erf_inv(-y, tol);
    if (y > 0.5) return erfc_inv(1.0 - y, tol);

    double x = normal_quantile_seed(0.5 + 0.5 * y, 0.5 - 0.5 * y) / std::numbers::sqrt2;
    for (int it = 0; it < tol.max_iter; ++it) {
        const double f = erf(x, tol) - y;
        const double fp = kTwoOverSqrtPi * std::exp(-x * x);
        const double u = f / fp;
        const double step = u / (1.0 + x * u);
        x -= step;
        if (converged(step, x, tol)) break;
    }
    return x;
}

double normal_cdf(double x) { return 0.5 * erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p, double q) {
    if (p < 0.5) return -std::numbers::sqrt2 * erfc_inv(2.0 * p);
    return std::numbers::sqrt2 * erfc_inv(2.0 * q);
}

double gamma_p(double z, double x, const Tolerance& tol) {
    check_gamma_domain(z, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < z + 1.0) return gamma_prefactor(z, x) * lower_gamma_series_sum(z, x, tol);
    return 1.0 - gamma_prefactor(z, x) * upper_gamma_cf(z, x, tol);
}

double gamma_q(double z, double x, const Tolerance& tol) {
    check_gamma_domain(z, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < z + 1.0) return 1.0 - gamma_prefactor(z, x) * lower_gamma_series_sum(z, x, tol);
    return gamma_prefactor(z, x) * upper_gamma_cf(z, x, tol);
}

double lower_incomplete_gamma(double z, double x, const Tolerance& tol) {
    check_gamma_domain(z, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return complete_gamma(z);
    const double scale = std::exp(-x + z * std::log(x));
    if (x < z + 1.0) return scale * lower_gamma_series_sum(z, x, tol);
    return complete_gamma(z) - scale * upper_gamma_cf(z, x, tol);
}

double upper_incomplete_gamma(double z, double x, const Tolerance& tol) {
    check_gamma_domain(z, x);
    if (x == 0.0) return complete_gamma(z);
    if (std::isinf(x)) return 0.0;
    const double scale = std::exp(-x + z * std::log(x));
    if (x < z + 1.0) return complete_gamma(z) - scale * lower_gamma_series_sum(z, x, tol);
    return scale * upper_gamma_cf(z, x, tol);
}

}  // namespace restarts::specfun

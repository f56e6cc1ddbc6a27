#ifndef RESTARTS_SPECFUN_HPP
#define RESTARTS_SPECFUN_HPP

namespace restarts::specfun {

/// Convergence controls for the iterative kernels (series, continued
/// fractions, Newton/Halley refinement).
struct Tolerance {
    double abs_tol = 1e-15;
    double rel_tol = 1e-15;
    int max_iter = 500;

    /// Throws std::invalid_argument unless all fields are positive.
    void validate() const;
};

double erf(double x, const Tolerance& tol = {});

/// Complementary error function, accurate in relative terms for large x.
double erfc(double x, const Tolerance& tol = {});

/// Inverse of erf on (-1, 1). Throws std::domain_error for |y| >= 1.
double erf_inv(double y, const Tolerance& tol = {});

/// Inverse of erfc on (0, 2). Keeps full relative accuracy for y near 0,
/// which erf_inv(1 - y) cannot.
double erfc_inv(double y, const Tolerance& tol = {});

/// Standard normal cdf and its upper tail, both via erfc.
double normal_cdf(double x);
double normal_sf(double x);

/// Standard normal quantile given the lower probability p and its exact
/// complement q = 1 - p. Whichever side is smaller drives the evaluation.
double normal_quantile(double p, double q);

/// Regularized incomplete gamma functions P(z, x) and Q(z, x).
/// Series for x < z + 1, Lentz continued fraction otherwise.
/// Throw std::domain_error for z <= 0 or x < 0.
double gamma_p(double z, double x, const Tolerance& tol = {});
double gamma_q(double z, double x, const Tolerance& tol = {});

/// Lower incomplete gamma γ(z, x) = ∫₀ˣ t^{z-1} e^{-t} dt.
double lower_incomplete_gamma(double z, double x, const Tolerance& tol = {});

/// Upper incomplete gamma Γ(z, x) = ∫ₓ^∞ t^{z-1} e^{-t} dt.
double upper_incomplete_gamma(double z, double x, const Tolerance& tol = {});

}  // namespace restarts::specfun

#endif  // RESTARTS_SPECFUN_HPP

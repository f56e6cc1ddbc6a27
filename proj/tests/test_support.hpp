#ifndef RESTARTS_TEST_SUPPORT_HPP
#define RESTARTS_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace testing_support {

inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Adaptive Gauss-Kronrod on [a, b]; independent of the library's own code.
template <class F>
double integrate(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Tanh-sinh copes with the endpoint singularities of quantile integrands.
template <class F>
double integrate_singular(F f, double a, double b) {
    static boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate(f, a, b, 1e-13);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace testing_support

#endif

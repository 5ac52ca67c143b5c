#pragma once

#include <functional>
#include <vector>

#include "corrthermo/errors.hpp"

namespace corrthermo {

using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b] to absolute tolerance. The
// breakpoints seed the initial panels (integrable kinks, known scales,
// oscillation periods); points outside (a,b) are ignored. Throws
// ConvergenceError if the tolerance cannot be met within max_intervals.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           double abs_tol,
                           const std::vector<double>& breakpoints = {},
                           int max_intervals = 200000);

// Integral over [a, infinity) of an integrand bounded by an exponential
// envelope ~ exp(-decay_scale * x): truncates where the envelope guarantees
// the tail is below tolerance, then integrates adaptively. The breakpoints
// and an optional oscillation period seed the panels.
QuadratureResult integrate_to_infinity(const Integrand& f, double a,
                                       double decay_scale, double abs_tol,
                                       const std::vector<double>& breakpoints = {},
                                       double oscillation_period = 0.0);

struct PrincipalValueResult {
    double value = 0.0;
    double error_estimate = 0.0;    // quadrature error
    double excision_residual = 0.0; // |value(h) - value(h/2)| convergence probe
};

// PV integral over [0, infinity) of g(x)/(pole - x) dx for smooth g with an
// exponential envelope exp(-decay_scale x). Symmetric excision of half-width
// h around the pole; the excised core contributes
//   int_0^h (g(pole-u) - g(pole+u))/u du,
// which is regular. The result is recomputed at h/2 and the difference is
// reported as excision_residual; a residual above sqrt(abs_tol) raises
// ConvergenceError.
PrincipalValueResult principal_value_over_pole(const Integrand& g, double pole,
                                               double decay_scale,
                                               double half_width,
                                               double abs_tol);

}  // namespace corrthermo

#include "corrthermo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace corrthermo {

namespace {

// Gauss-Kronrod (G7,K15) nodes and weights on [-1,1], positive half.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
// 7-point Gauss weights, matching kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const Integrand& f, double a, double b) {
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - half * kXgk[i]);
        fv[14 - i] = f(mid + half * kXgk[i]);
    }
    fv[7] = f(mid);
    double kronrod = 0.0;
    for (int i = 0; i < 7; ++i) kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
    kronrod += kWgk[7] * fv[7];
    double gauss = 0.0;
    for (int i = 0; i < 3; ++i) gauss += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    gauss += kWg[3] * fv[7];
    kronrod *= half;
    gauss *= half;
    double err = std::abs(kronrod - gauss);
    // QUADPACK-style sharpening of the raw difference.
    double scale = std::abs(kronrod);
    if (err > 0.0 && scale > 0.0)
        err = std::min(err, err * std::sqrt(err / (scale + err)) + 1e-16 * scale);
    return {a, b, kronrod, err};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b,
                           double abs_tol,
                           const std::vector<double>& breakpoints,
                           int max_intervals) {
    if (!(b > a)) return {0.0, 0.0, 0};
    std::vector<double> edges;
    edges.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) edges.push_back(p);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<Panel> queue;
    double total = 0.0, total_err = 0.0;
    int count = 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p = evaluate_panel(f, edges[i], edges[i + 1]);
        total += p.value;
        total_err += p.error;
        queue.push(p);
        ++count;
    }
    while (total_err > abs_tol && count < max_intervals) {
        Panel worst = queue.top();
        if (worst.error <= 0.0) break;  // nothing left to refine
        queue.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) break;  // width at roundoff
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++count;
    }
    if (total_err > abs_tol * 10.0 + 1e-15)
        throw ConvergenceError(
            "quadrature did not reach tolerance: error estimate " +
            std::to_string(total_err) + " > " + std::to_string(abs_tol));
    return {total, total_err, count};
}

QuadratureResult integrate_to_infinity(const Integrand& f, double a,
                                       double decay_scale, double abs_tol,
                                       const std::vector<double>& breakpoints,
                                       double oscillation_period) {
    if (decay_scale <= 0.0)
        throw ConvergenceError("semi-infinite quadrature needs a decay scale");
    // exp(-40) ~ 4e-18: tail truncation is far below any tolerance in use.
    double upper = a + 40.0 / decay_scale;
    std::vector<double> edges = breakpoints;
    if (oscillation_period > 0.0) {
        // Quarter-period panels keep the K15 rule at machine accuracy on
        // oscillatory integrands without adaptive thrash.
        double step = 0.25 * oscillation_period;
        std::size_t n = std::size_t((upper - a) / step) + 1;
        edges.reserve(edges.size() + n);
        for (double x = a + step; x < upper; x += step) edges.push_back(x);
    }
    int max_intervals = std::max<int>(200000, 4 * int(edges.size() + 2));
    return integrate(f, a, upper, abs_tol, edges, max_intervals);
}

PrincipalValueResult principal_value_over_pole(const Integrand& g, double pole,
                                               double decay_scale,
                                               double half_width,
                                               double abs_tol) {
    if (pole <= 0.0)
        throw ConvergenceError("principal value expects a positive pole");
    if (half_width <= 0.0 || half_width >= pole)
        throw ConvergenceError("excision half-width must lie in (0, pole)");

    auto evaluate = [&](double h) {
        Integrand wings = [&](double x) { return g(x) / (pole - x); };
        QuadratureResult left =
            integrate(wings, 0.0, pole - h, abs_tol / 3.0, {0.5 * pole});
        QuadratureResult right = integrate_to_infinity(
            wings, pole + h, decay_scale, abs_tol / 3.0, {2.0 * pole});
        // Excised core, regular at u = 0 (limit -2 g'(pole)).
        Integrand core = [&](double u) {
            return (g(pole - u) - g(pole + u)) / u;
        };
        QuadratureResult center = integrate(core, 0.0, h, abs_tol / 3.0);
        QuadratureResult out;
        out.value = left.value + right.value + center.value;
        out.error_estimate =
            left.error_estimate + right.error_estimate + center.error_estimate;
        out.intervals = left.intervals + right.intervals + center.intervals;
        return out;
    };

    QuadratureResult at_h = evaluate(half_width);
    QuadratureResult at_half = evaluate(0.5 * half_width);
    PrincipalValueResult out;
    out.value = at_half.value;
    out.error_estimate = at_half.error_estimate;
    out.excision_residual = std::abs(at_h.value - at_half.value);
    if (out.excision_residual > 1e-8 * (1.0 + std::abs(out.value)))
        throw ConvergenceError(
            "principal value did not converge under excision halving: "
            "residual " +
            std::to_string(out.excision_residual));
    return out;
}

}  // namespace corrthermo

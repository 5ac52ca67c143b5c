#include <cmath>
#include <complex>

#include "doctest.h"
#include "test_support.hpp"

#include "corrthermo/dynamics.hpp"
#include "corrthermo/errors.hpp"
#include "corrthermo/quadrature.hpp"
#include "corrthermo/thermalizing_qubit.hpp"

using namespace corrthermo;
using Cplx = std::complex<double>;

namespace {

Matrix bare_qubit_hamiltonian(double omega0) {
    Matrix h(2, 2);
    h << 0.5 * omega0, 0.0, 0.0, -0.5 * omega0;
    return h;
}

double qubit_entropy(const std::array<double, 3>& bloch) {
    return von_neumann_entropy(qubit_from_bloch(bloch));
}

}  // namespace

TEST_CASE("qubit basis conventions: index 0 is the excited level") {
    CHECK(sigma_z()(0, 0) == Cplx(1.0, 0.0));
    CHECK(sigma_z()(1, 1) == Cplx(-1.0, 0.0));
    CHECK(sigma_plus()(0, 1) == Cplx(1.0, 0.0));   // |e><g|
    CHECK(sigma_minus()(1, 0) == Cplx(1.0, 0.0));  // |g><e|
    Matrix rho = qubit_from_bloch({0.3, -0.1, 0.4});
    CHECK(rho(0, 0).real() == doctest::Approx(0.7).epsilon(1e-14));
    auto back = bloch_vector(rho);
    CHECK(back[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(back[1] == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(back[2] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("Planck occupation against a frozen reference value") {
    CHECK(planck_occupation(1.0, 1.0) ==
          doctest::Approx(0.581976706869326424).epsilon(1e-15));
    CHECK(planck_occupation(1.0, 50.0) ==
          doctest::Approx(std::exp(-50.0)).epsilon(1e-10));
}

TEST_CASE("golden-rule constants for the Ohmic density") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    EmissionRates rates = emission_rates(spec);

    double j_at_omega0 = 1.0 * std::exp(-1.0);
    CHECK(rates.gamma ==
          doctest::Approx(2.0 * M_PI * 0.04 * j_at_omega0).epsilon(1e-12));
    CHECK(rates.occupation ==
          doctest::Approx(planck_occupation(1.0, 1.0)).epsilon(1e-13));
    CHECK(rates.gamma_tilde ==
          doctest::Approx(rates.gamma * (2.0 * rates.occupation + 1.0))
              .epsilon(1e-12));
}

TEST_CASE("frequency pull against an independently regularized integral") {
    // Pull = lambda^2 PV int_0^inf J(w) coth(beta w/2) / (w0 - w) dw.
    // Oracle: subtract g(w0) exp(-(w-w0)^2), integrate the regular remainder
    // with ordinary quadrature, and add back the closed-form bump integral
    //   PV int_0^inf exp(-(w-p)^2)/(p-w) dw = -(1/2) E1(p^2),
    // with E1(1) = 0.21938393439552026.
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    auto g = [&](double w) {
        if (w < 1e-12) return 2.0 / spec.beta;  // w coth(beta w/2) -> 2/beta
        return w * std::exp(-w) / std::tanh(0.5 * spec.beta * w);
    };
    double p = spec.omega0;
    double g_at_pole = g(p);
    auto regular = [&](double w) {
        double bump = g_at_pole * std::exp(-(w - p) * (w - p));
        if (std::abs(w - p) < 1e-9) {
            double h = 1e-6;
            return (g(p - h) - g(p + h)) / (2.0 * h);  // limit -g'(p)
        }
        return (g(w) - bump) / (p - w);
    };
    double regular_part =
        integrate_to_infinity(regular, 0.0, 1.0, 1e-12, {0.5 * p, p, 2.0 * p})
            .value;
    double e1_of_one = 0.21938393439552026;
    double pull_ref =
        spec.lambda * spec.lambda * (regular_part - 0.5 * g_at_pole * e1_of_one);

    EmissionRates rates = emission_rates(spec);
    CHECK(rates.frequency_pull == doctest::Approx(pull_ref).epsilon(1e-7));
}

TEST_CASE("joint Hamiltonian of the exchange model against hand entries") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.1;
    spec.modes = {{0.9, Cplx(0.5, 0.0)}};
    spec.n_max = 1;
    ExchangeQubitModel model = make_exchange_qubit(spec);
    const Matrix& h = model.system.h_total();
    REQUIRE(h.rows() == 4);
    // Diagonal: omega0/2 * sigma_z plus mode occupancy.
    CHECK(h(0, 0) == Cplx(0.5, 0.0));
    CHECK(h(1, 1) == Cplx(1.4, 0.0));
    CHECK(h(2, 2) == Cplx(-0.5, 0.0));
    CHECK(h(3, 3) == Cplx(0.4, 0.0));
    // Excitation exchange |g,1> <-> |e,0| with amplitude lambda * f.
    CHECK(h(0, 3) == Cplx(0.05, 0.0));
    CHECK(h(3, 0) == Cplx(0.05, 0.0));
    // No counter-rotating entries.
    CHECK(std::abs(h(1, 2)) == 0.0);
    CHECK(std::abs(h(0, 1)) == 0.0);

    Matrix bath_thermal = thermal_bath_state(model);
    CHECK((bath_thermal - model.bath.thermal_state(spec.beta))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
}

TEST_CASE("closed-form Bloch flow solves the master equation") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    EmissionRates rates = emission_rates(spec);
    LindbladGenerator gen = thermalizing_generator(spec, rates);
    std::array<double, 3> bloch0 = {0.5, -0.2, 0.3};

    for (double tau : {0.3, 0.7, 3.1, 9.0}) {
        double eps = 1e-5;
        Matrix plus = analytic_reduced_state(spec, rates, bloch0, tau + eps);
        Matrix minus = analytic_reduced_state(spec, rates, bloch0, tau - eps);
        Matrix fd = (plus - minus) / (2.0 * eps);
        Matrix gen_flow =
            gen.apply(analytic_reduced_state(spec, rates, bloch0, tau));
        CHECK((fd - gen_flow).cwiseAbs().maxCoeff() <= 1e-8);
    }

    // Transverse decay envelope and longitudinal fixed point.
    auto late = analytic_bloch(spec, rates, bloch0, 4.0);
    double envelope = std::hypot(late[0], late[1]);
    CHECK(envelope == doctest::Approx(std::hypot(bloch0[0], bloch0[1]) *
                                      std::exp(-0.5 * rates.gamma_tilde * 4.0))
                          .epsilon(1e-12));
    auto fixed = analytic_bloch(spec, rates, bloch0, 400.0);
    CHECK(fixed[2] ==
          doctest::Approx(-std::tanh(0.5 * spec.beta * spec.omega0))
              .epsilon(1e-10));
    CHECK(std::abs(fixed[0]) <= 1e-12);
}

TEST_CASE("closed-form Bloch flow matches the integrated master equation") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    EmissionRates rates = emission_rates(spec);
    LindbladGenerator gen = thermalizing_generator(spec, rates);
    std::array<double, 3> bloch0 = {0.3, 0.0, 0.3};
    double horizon = 5.0;
    TimeGrid grid(0.0, horizon, 1000);
    auto traj = propagate_lindblad(gen, qubit_from_bloch(bloch0), grid);
    Matrix ref = analytic_reduced_state(spec, rates, bloch0, horizon);
    CHECK((traj.back() - ref).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("phase moment integrals against quadrature and small-argument limits") {
    double mu = 0.7, tau = 1.3;
    Cplx m0 = phase_integral(mu, tau, 0);
    Cplx closed = (std::exp(Cplx(0.0, mu * tau)) - 1.0) / Cplx(0.0, mu);
    CHECK(std::abs(m0 - closed) <= 1e-13);

    for (int power : {1, 2}) {
        Cplx m = phase_integral(mu, tau, power);
        auto re = [&](double s) {
            return std::pow(s, power) * std::cos(mu * s);
        };
        auto im = [&](double s) {
            return std::pow(s, power) * std::sin(mu * s);
        };
        double re_ref = integrate(re, 0.0, tau, 1e-13).value;
        double im_ref = integrate(im, 0.0, tau, 1e-13).value;
        CHECK(std::abs(m - Cplx(re_ref, im_ref)) <= 1e-11);
    }

    // Stability at vanishing frequency: M_p -> tau^{p+1}/(p+1).
    for (int power : {0, 1, 2}) {
        Cplx tiny = phase_integral(1e-9, tau, power);
        double limit = std::pow(tau, power + 1) / (power + 1);
        CHECK(std::abs(tiny - Cplx(limit, 0.0)) <= 1e-8);
    }
}

TEST_CASE("ordered double phase integral handles resonant pairs") {
    double tau = 0.9;
    // Generic pair against the reduction to single-phase moments:
    //   I(mu, nu) = [M_0(mu + nu) - M_0(mu)] / (i nu)
    double mu = 0.5, nu = 0.7;
    Cplx direct = double_phase_integral(mu, nu, tau);
    Cplx reduced = (phase_integral(mu + nu, tau, 0) -
                    phase_integral(mu, tau, 0)) /
                   Cplx(0.0, nu);
    CHECK(std::abs(direct - reduced) <= 1e-12);

    // Resonant pair mu = -nu, where the reduction above degenerates.
    Cplx resonant = double_phase_integral(0.8, -0.8, tau);
    Cplx res_reduced = (phase_integral(0.0, tau, 0) -
                        phase_integral(0.8, tau, 0)) /
                       Cplx(0.0, -0.8);
    CHECK(std::abs(resonant - res_reduced) <= 1e-12);

    // Both phases zero: the ordered integral is tau^2/2.
    CHECK(std::abs(double_phase_integral(0.0, 0.0, tau) -
                   Cplx(0.5 * tau * tau, 0.0)) <= 1e-13);
}

TEST_CASE("second-order expansion tracks the exact joint flow in the coupling") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.beta = 1.5;
    spec.modes = {{0.8, Cplx(0.5, 0.0)}, {1.3, Cplx(0.4, 0.0)}};
    spec.n_max = 2;
    double tau = 0.8;
    Matrix rho_s0 = qubit_from_bloch({0.6, 0.0, 0.5});

    auto residual_at = [&](double lambda) {
        ExchangeQubitSpec local = spec;
        local.lambda = lambda;
        ExchangeQubitModel model = make_exchange_qubit(local);
        PerturbativeJointStates dyson = dyson_second_order(model, rho_s0, tau);
        CHECK(std::abs(dyson.rho_sb.trace() - Cplx(1.0, 0.0)) <= 1e-12);
        CHECK((dyson.rho_s -
               partial_trace(dyson.rho_sb, model.system.layout(),
                             Subsystem::S))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-13);
        Matrix rho0 =
            tensor_product(rho_s0, thermal_bath_state(model));
        TimeGrid grid(0.0, tau, 8);
        auto states = propagate_exact(model.system, rho0, grid);
        return trace_distance(dyson.rho_sb, states.back().rho_sb());
    };

    double coarse = residual_at(0.04);
    double fine = residual_at(0.02);
    CHECK(coarse <= 1e-4);
    CHECK(fine <= 2e-5);
    // Third-order remainder: halving the coupling divides it by about 8.
    CHECK(coarse / fine > 5.0);
    CHECK(coarse / fine < 11.0);
}

TEST_CASE("late-time bath rates agree with the generator energy flow") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    EmissionRates rates = emission_rates(spec);
    LindbladGenerator gen = thermalizing_generator(spec, rates);
    Matrix h_bare = bare_qubit_hamiltonian(spec.omega0);

    for (auto bloch : {std::array<double, 3>{0.0, 0.0, 0.2},
                       std::array<double, 3>{0.4, -0.3, 0.1}}) {
        Matrix rho = qubit_from_bloch(bloch);
        LongTimeBathRates bath = longtime_bath_rates(spec, rates, rho);
        // The bath gains exactly what the qubit loses, measured against the
        // bare level splitting.
        double qubit_loss = -(gen.apply(rho) * h_bare).trace().real();
        CHECK(bath.du_b == doctest::Approx(qubit_loss).epsilon(1e-12));
        // Entropy flow at the bath temperature.
        CHECK(bath.ds_b ==
              doctest::Approx(spec.beta * bath.dq_b).epsilon(1e-13));
        // Heat differs from energy by the coherence term.
        double coh_sq = 0.25 * (bloch[0] * bloch[0] + bloch[1] * bloch[1]);
        CHECK(bath.du_b - bath.dq_b ==
              doctest::Approx(spec.omega0 * rates.gamma * coh_sq)
                  .epsilon(1e-13));
        CHECK(bath.t_pseudo_b ==
              doctest::Approx(bath.du_b / bath.ds_b).epsilon(1e-11));
    }
    // Without coherence the bath sits exactly at its own temperature.
    LongTimeBathRates diag = longtime_bath_rates(
        spec, rates, qubit_from_bloch({0.0, 0.0, 0.3}));
    CHECK(diag.t_pseudo_b == doctest::Approx(1.0 / spec.beta).epsilon(1e-13));
}

TEST_CASE("extended-temperature inverse matches the Gibbs inverse temperature") {
    double beta = 1.3, omega0 = 0.9;
    Matrix gibbs = gibbs_state(bare_qubit_hamiltonian(omega0), beta);
    CHECK(inverse_extended_temperature(omega0, bloch_vector(gibbs)) ==
          doctest::Approx(beta).epsilon(1e-12));
    CHECK(inverse_extended_temperature(omega0, {0.0, 0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(
        (void)inverse_extended_temperature(omega0, {0.0, 0.0, 1.0}),
        StateValidationError);
}

TEST_CASE("asymptotic pseudo-temperature against the analytic trajectory") {
    ExchangeQubitSpec spec;
    spec.omega0 = 1.0;
    spec.lambda = 0.2;
    spec.beta = 1.0;
    spec.spectral_density = ohmic_spectral_density();
    EmissionRates rates = emission_rates(spec);

    // Coherence-free relaxation ends at the bath temperature.
    CHECK(asymptotic_inverse_pseudo_temperature(spec, {0.0, 0.0, 0.3}) ==
          doctest::Approx(spec.beta).epsilon(1e-13));

    // Coherent initial state: compare with d s / d u evaluated late along the
    // closed-form trajectory (independent of the formula under test).
    std::array<double, 3> bloch0 = {0.3, 0.0, 0.3};
    double tau_late = 12.0 / rates.gamma_tilde;
    double delta = 1e-4;
    auto u_of = [&](double tau) {
        return 0.5 * spec.omega0 *
               analytic_bloch(spec, rates, bloch0, tau)[2];
    };
    auto s_of = [&](double tau) {
        return qubit_entropy(analytic_bloch(spec, rates, bloch0, tau));
    };
    double ds = s_of(tau_late + delta) - s_of(tau_late - delta);
    double du = u_of(tau_late + delta) - u_of(tau_late - delta);
    double inv_t_measured = ds / du;
    CHECK(asymptotic_inverse_pseudo_temperature(spec, bloch0) ==
          doctest::Approx(inv_t_measured).epsilon(1e-4));

    CHECK_THROWS_AS((void)asymptotic_inverse_pseudo_temperature(
                        spec, {0.3, 0.0, -std::tanh(0.5)}),
                    StateValidationError);
}

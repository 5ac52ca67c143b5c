#include "corrthermo/thermalizing_qubit.hpp"

#include <cmath>
#include <utility>

#include "corrthermo/errors.hpp"
#include "corrthermo/quadrature.hpp"

namespace corrthermo {

Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix sigma_y() {
    Matrix m(2, 2);
    m << Cplx(0, 0), Cplx(0, -1), Cplx(0, 1), Cplx(0, 0);
    return m;
}

Matrix sigma_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

Matrix sigma_minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

Matrix qubit_from_bloch(const std::array<double, 3>& bloch) {
    double r = std::sqrt(bloch[0] * bloch[0] + bloch[1] * bloch[1] +
                         bloch[2] * bloch[2]);
    if (r > 1.0 + 1e-12)
        throw StateValidationError("Bloch vector lies outside the unit ball");
    Matrix rho = 0.5 * (Matrix::Identity(2, 2) + bloch[0] * sigma_x() +
                        bloch[1] * sigma_y() + bloch[2] * sigma_z());
    return rho;
}

std::array<double, 3> bloch_vector(const Matrix& rho) {
    if (rho.rows() != 2 || rho.cols() != 2)
        throw DimensionError("Bloch vector needs a 2x2 state");
    return {(rho * sigma_x()).trace().real(),
            (rho * sigma_y()).trace().real(),
            (rho * sigma_z()).trace().real()};
}

double planck_occupation(double omega, double beta) {
    if (omega <= 0.0 || beta <= 0.0)
        throw StateValidationError(
            "occupation needs positive frequency and inverse temperature");
    return 1.0 / std::expm1(beta * omega);
}

std::function<double(double)> ohmic_spectral_density(double decay) {
    return [decay](double omega) { return omega * std::exp(-decay * omega); };
}

ExchangeQubitModel make_exchange_qubit(const ExchangeQubitSpec& spec) {
    if (spec.modes.empty())
        throw DimensionError("joint model needs at least one bath mode");
    BathSpace bath(spec.modes, spec.n_max);
    CompositeLayout layout(2, bath.dim());
    Matrix h_s = 0.5 * spec.omega0 * sigma_z();
    Matrix h_b = bath.hamiltonian();
    Matrix h_int = Matrix::Zero(layout.total(), layout.total());
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        Matrix a = bath.lowering(static_cast<Index>(k));
        Cplx f = spec.modes[k].coupling;
        h_int += spec.lambda * (std::conj(f) * tensor_product(sigma_plus(), a) +
                                f * tensor_product(sigma_minus(), a.adjoint()));
    }
    BipartiteSystem system(Operator::hermitian(h_s, "H_S"),
                           Operator::hermitian(h_b, "H_B"),
                           Operator::hermitian(h_int, "H_int"), layout);
    return {spec, std::move(bath), std::move(system)};
}

Matrix thermal_bath_state(const ExchangeQubitModel& model) {
    return model.bath.thermal_state(model.spec.beta);
}

namespace {

double coth_half(double beta, double omega) {
    double x = 0.5 * beta * omega;
    if (x < 1e-8) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
}

}  // namespace

EmissionRates emission_rates(const ExchangeQubitSpec& spec,
                             double pv_half_width) {
    if (!spec.spectral_density)
        throw StateValidationError(
            "weak-coupling rates need a spectral density");
    double j0 = spec.spectral_density(spec.omega0);
    EmissionRates out;
    out.gamma = 2.0 * M_PI * spec.lambda * spec.lambda * j0;
    out.occupation = planck_occupation(spec.omega0, spec.beta);
    out.gamma_tilde = out.gamma * (2.0 * out.occupation + 1.0);
    double h = pv_half_width > 0.0 ? pv_half_width : 1e-3 * spec.omega0;
    Integrand weighted = [&spec](double omega) {
        return spec.spectral_density(omega) * coth_half(spec.beta, omega);
    };
    PrincipalValueResult pv = principal_value_over_pole(
        weighted, spec.omega0, spec.spectral_decay, h, 1e-10);
    out.frequency_pull = spec.lambda * spec.lambda * pv.value;
    return out;
}

LindbladGenerator thermalizing_generator(const ExchangeQubitSpec& spec,
                                         const EmissionRates& rates) {
    Matrix h = 0.5 * (spec.omega0 + rates.frequency_pull) * sigma_z();
    std::vector<JumpTerm> jumps;
    jumps.push_back({sigma_minus(), rates.gamma * (rates.occupation + 1.0)});
    jumps.push_back({sigma_plus(), rates.gamma * rates.occupation});
    return LindbladGenerator(Operator::hermitian(h, "H"), std::move(jumps));
}

std::array<double, 3> analytic_bloch(const ExchangeQubitSpec& spec,
                                     const EmissionRates& rates,
                                     const std::array<double, 3>& bloch0,
                                     double tau) {
    double t0 = std::tanh(0.5 * spec.beta * spec.omega0);
    double decay = std::exp(-rates.gamma_tilde * tau);
    double z = bloch0[2] * decay + t0 * (decay - 1.0);
    Cplx xy = Cplx(bloch0[0], bloch0[1]) *
              std::exp(Cplx(0.0, (spec.omega0 + rates.frequency_pull) * tau)) *
              std::exp(-0.5 * rates.gamma_tilde * tau);
    return {xy.real(), xy.imag(), z};
}

Matrix analytic_reduced_state(const ExchangeQubitSpec& spec,
                              const EmissionRates& rates,
                              const std::array<double, 3>& bloch0,
                              double tau) {
    return qubit_from_bloch(analytic_bloch(spec, rates, bloch0, tau));
}

Cplx phase_integral(double mu, double tau, int power) {
    if (power < 0 || power > 3)
        throw ConvergenceError("phase integral supports powers 0..3");
    double x = mu * tau;
    if (std::abs(x) < 1e-4) {
        Cplx acc(0.0, 0.0);
        Cplx imu_pow(1.0, 0.0);
        double factorial = 1.0;
        for (int n = 0; n <= 4; ++n) {
            if (n > 0) {
                imu_pow *= Cplx(0.0, mu);
                factorial *= n;
            }
            acc += imu_pow * std::pow(tau, power + n + 1) /
                   (factorial * static_cast<double>(power + n + 1));
        }
        return acc;
    }
    if (power == 0) return (std::exp(Cplx(0.0, x)) - 1.0) / Cplx(0.0, mu);
    return (std::pow(tau, power) * std::exp(Cplx(0.0, x)) -
            static_cast<double>(power) * phase_integral(mu, tau, power - 1)) /
           Cplx(0.0, mu);
}

Cplx double_phase_integral(double mu, double nu, double tau) {
    if (std::abs(nu * tau) < 1e-4) {
        // inner integral expanded: s + i nu s^2/2 - nu^2 s^3/6
        Cplx acc = phase_integral(mu, tau, 1);
        acc += Cplx(0.0, 0.5 * nu) * phase_integral(mu, tau, 2);
        acc -= (nu * nu / 6.0) * phase_integral(mu, tau, 3);
        return acc;
    }
    return (phase_integral(mu + nu, tau, 0) - phase_integral(mu, tau, 0)) /
           Cplx(0.0, nu);
}

PerturbativeJointStates dyson_second_order(const ExchangeQubitModel& model,
                                           const Matrix& rho_s0, double tau) {
    const ExchangeQubitSpec& spec = model.spec;
    const CompositeLayout& layout = model.system.layout();
    require_density_matrix(rho_s0, "initial qubit state");
    Matrix rho0 = tensor_product(rho_s0, thermal_bath_state(model));

    // Interaction-picture coupling splits into terms with a pure phase each:
    // lambda conj(f_k) sigma_+ a_k rotates at omega0 - omega_k, the adjoint
    // at the opposite frequency.
    std::vector<Matrix> term;
    std::vector<double> phase;
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        Matrix a = model.bath.lowering(static_cast<Index>(k));
        Cplx f = spec.modes[k].coupling;
        Matrix lower = spec.lambda * std::conj(f) *
                       tensor_product(sigma_plus(), a);
        term.push_back(lower);
        phase.push_back(spec.omega0 - spec.modes[k].omega);
        term.push_back(lower.adjoint());
        phase.push_back(-(spec.omega0 - spec.modes[k].omega));
    }

    Matrix corrected = rho0;
    for (std::size_t a = 0; a < term.size(); ++a) {
        Cplx eta = phase_integral(phase[a], tau, 0);
        corrected += Cplx(0.0, -1.0) * eta * (term[a] * rho0 - rho0 * term[a]);
    }
    for (std::size_t a = 0; a < term.size(); ++a) {
        for (std::size_t b = 0; b < term.size(); ++b) {
            Cplx kernel = double_phase_integral(phase[a], phase[b], tau);
            Matrix inner = term[b] * rho0 - rho0 * term[b];
            corrected -= kernel * (term[a] * inner - inner * term[a]);
        }
    }
    corrected = 0.5 * (corrected + corrected.adjoint().eval());

    // Back to the Schroedinger picture.
    Matrix h0 = embed_s(model.system.h_s(), layout) +
                embed_b(model.system.h_b(), layout);
    PerturbativeJointStates out;
    out.rho_sb = evolve_unitary(corrected, h0, tau);
    out.rho_s = partial_trace(out.rho_sb, layout, Subsystem::S);
    out.rho_b = partial_trace(out.rho_sb, layout, Subsystem::B);
    return out;
}

LongTimeBathRates longtime_bath_rates(const ExchangeQubitSpec& spec,
                                      const EmissionRates& rates,
                                      const Matrix& rho_s) {
    if (rho_s.rows() != 2 || rho_s.cols() != 2)
        throw DimensionError("bath rates need a 2x2 qubit state");
    double p_excited = rho_s(0, 0).real();
    double p_ground = rho_s(1, 1).real();
    double coherence_sq = std::norm(rho_s(1, 0));
    double n = rates.occupation;
    double k1 = (n + 1.0) * p_excited - n * p_ground;
    double k2 = k1 - coherence_sq;
    LongTimeBathRates out;
    out.du_b = spec.omega0 * rates.gamma * k1;
    out.dq_b = spec.omega0 * rates.gamma * k2;
    out.ds_b = spec.beta * out.dq_b;
    out.t_pseudo_b = k1 / (spec.beta * k2);
    return out;
}

double inverse_extended_temperature(double omega0,
                                    const std::array<double, 3>& bloch) {
    double r = std::sqrt(bloch[0] * bloch[0] + bloch[1] * bloch[1] +
                         bloch[2] * bloch[2]);
    if (r < 1e-14) return 0.0;
    if (r >= 1.0)
        throw StateValidationError(
            "extended temperature diverges on pure states");
    return -(bloch[2] / (omega0 * r)) * std::log((1.0 + r) / (1.0 - r));
}

double asymptotic_inverse_pseudo_temperature(
    const ExchangeQubitSpec& spec, const std::array<double, 3>& bloch0) {
    double t0 = std::tanh(0.5 * spec.beta * spec.omega0);
    double gap = bloch0[2] + t0;
    if (std::abs(gap) < 1e-14)
        throw StateValidationError(
            "asymptotic temperature undefined when populations start "
            "equilibrated");
    double transverse = bloch0[0] * bloch0[0] + bloch0[1] * bloch0[1];
    return spec.beta * (1.0 - transverse / (2.0 * t0 * gap));
}

}  // namespace corrthermo

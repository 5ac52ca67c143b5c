#include "corrthermo/dephasing_qubit.hpp"

#include <cmath>
#include <utility>

#include "corrthermo/errors.hpp"
#include "corrthermo/quadrature.hpp"
#include "corrthermo/thermalizing_qubit.hpp"

namespace corrthermo {

namespace {

double coth_half(double beta, double omega) {
    double x = 0.5 * beta * omega;
    if (x < 1e-8) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
}

DephasingKernels discrete_kernels(const DephasingSpec& spec, double tau) {
    DephasingKernels out;
    for (const auto& mode : spec.modes) {
        double w = mode.omega;
        double f2 = std::norm(mode.coupling);
        double s = std::sin(0.5 * w * tau);
        double coth = coth_half(spec.beta, w);
        out.big_gamma += f2 * coth * s * s / (w * w);
        out.big_delta += f2 * s * s / w;
        out.dgamma += f2 * coth * std::sin(w * tau) / (2.0 * w);
        out.ddelta += 0.5 * f2 * std::sin(w * tau);
    }
    return out;
}

DephasingKernels continuum_kernels(const DephasingSpec& spec, double tau) {
    DephasingKernels out;
    double eps = spec.ohmic_epsilon;
    if (eps <= 0.0)
        throw ConvergenceError("ohmic continuum needs a positive cutoff");
    if (tau == 0.0) return out;

    // |f(w)|^2 = w exp(-eps w) admits closed displacement integrals.
    out.big_delta = tau * tau / (2.0 * eps * (eps * eps + tau * tau));
    out.ddelta = eps * tau / ((tau * tau + eps * eps) * (tau * tau + eps * eps));

    std::vector<double> breaks = {1.0 / spec.beta, 1.0 / std::abs(tau)};
    double period = 2.0 * M_PI / std::abs(tau);
    Integrand gamma_integrand = [&](double w) {
        double s = std::sin(0.5 * w * tau);
        return std::exp(-eps * w) * coth_half(spec.beta, w) * s * s / w;
    };
    out.big_gamma =
        integrate_to_infinity(gamma_integrand, 0.0, eps, 1e-10, breaks, period)
            .value;
    Integrand dgamma_integrand = [&](double w) {
        return 0.5 * std::exp(-eps * w) * coth_half(spec.beta, w) *
               std::sin(w * tau);
    };
    out.dgamma =
        integrate_to_infinity(dgamma_integrand, 0.0, eps, 1e-10, breaks, period)
            .value;
    return out;
}

}  // namespace

DephasingKernels dephasing_kernels(const DephasingSpec& spec, double tau) {
    if (spec.kind == DephasingSpec::BathKind::discrete) {
        if (spec.modes.empty())
            throw DimensionError("discrete kernels need bath modes");
        return discrete_kernels(spec, tau);
    }
    return continuum_kernels(spec, tau);
}

DephasingModel make_dephasing_qubit(const DephasingSpec& spec) {
    if (spec.kind != DephasingSpec::BathKind::discrete)
        throw DimensionError(
            "joint dephasing model needs a discrete bath");
    if (spec.modes.empty())
        throw DimensionError("joint model needs at least one bath mode");
    BathSpace bath(spec.modes, spec.n_max);
    CompositeLayout layout(2, bath.dim());
    Matrix h_s = 0.5 * spec.omega0 * sigma_z();
    Matrix h_b = bath.hamiltonian();
    Matrix displacement = Matrix::Zero(bath.dim(), bath.dim());
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        Matrix a = bath.lowering(static_cast<Index>(k));
        Cplx f = spec.modes[k].coupling;
        displacement += std::conj(f) * a + f * a.adjoint();
    }
    Matrix h_int = spec.lambda * tensor_product(sigma_z(), displacement);
    BipartiteSystem system(Operator::hermitian(h_s, "H_S"),
                           Operator::hermitian(h_b, "H_B"),
                           Operator::hermitian(h_int, "H_int"), layout);
    return {spec, std::move(bath), std::move(system)};
}

ExactDephasingStates exact_reduced_states(const DephasingModel& model,
                                          const Matrix& rho_s0, double tau) {
    require_density_matrix(rho_s0, "initial qubit state");
    const BathSpace& bath = model.bath;
    const DephasingSpec& spec = model.spec;

    Matrix displacement = Matrix::Zero(bath.dim(), bath.dim());
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        Matrix a = bath.lowering(static_cast<Index>(k));
        Cplx f = spec.modes[k].coupling;
        displacement += std::conj(f) * a + f * a.adjoint();
    }
    Matrix rho_beta = bath.thermal_state(spec.beta);

    // Indicator of any mode sitting at its truncation ceiling.
    std::vector<bool> top(static_cast<std::size_t>(bath.dim()), false);
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
        Matrix a = bath.lowering(static_cast<Index>(k));
        Eigen::VectorXd occ = (a.adjoint() * a).diagonal().real();
        for (Index i = 0; i < bath.dim(); ++i)
            if (occ(i) > static_cast<double>(bath.n_max()) - 0.5)
                top[static_cast<std::size_t>(i)] = true;
    }

    std::array<Matrix, 2> propagator;
    ExactDephasingStates out;
    out.rho_b = Matrix::Zero(bath.dim(), bath.dim());
    for (int sector = 0; sector < 2; ++sector) {
        double sign = sector == 0 ? 1.0 : -1.0;
        Matrix h_sector =
            bath.hamiltonian() + sign * spec.lambda * displacement;
        SpectralDecomposition s = hermitian_spectrum(h_sector);
        propagator[static_cast<std::size_t>(sector)] = apply_spectral(
            s, [tau](double e) { return std::exp(Cplx(0.0, -e * tau)); });
        const Matrix& u = propagator[static_cast<std::size_t>(sector)];
        Matrix evolved = u * rho_beta * u.adjoint();
        double leak = 0.0;
        for (Index i = 0; i < bath.dim(); ++i)
            if (top[static_cast<std::size_t>(i)])
                leak += evolved(i, i).real();
        out.truncation_leakage = std::max(out.truncation_leakage, leak);
        out.rho_b += rho_s0(sector, sector).real() * evolved;
    }

    Cplx overlap =
        (propagator[0] * rho_beta * propagator[1].adjoint()).trace();
    out.rho_s = Matrix(2, 2);
    out.rho_s(0, 0) = rho_s0(0, 0).real();
    out.rho_s(1, 1) = rho_s0(1, 1).real();
    out.rho_s(0, 1) =
        rho_s0(0, 1) * std::exp(Cplx(0.0, -spec.omega0 * tau)) * overlap;
    out.rho_s(1, 0) = std::conj(out.rho_s(0, 1));
    return out;
}

DephasingThermo closed_form_thermo(const DephasingSpec& spec,
                                   const Matrix& rho_s0, double tau,
                                   const EnergySplit& split) {
    return closed_form_thermo_from_kernels(spec, rho_s0, split,
                                           dephasing_kernels(spec, tau));
}

DephasingThermo closed_form_thermo_from_kernels(const DephasingSpec& spec,
                                                const Matrix& rho_s0,
                                                const EnergySplit& split,
                                                const DephasingKernels& k) {
    require_density_matrix(rho_s0, "initial qubit state");
    double lam2 = spec.lambda * spec.lambda;
    double z = (rho_s0(0, 0) - rho_s0(1, 1)).real();
    double coh0_sq = std::norm(rho_s0(0, 1));
    double alpha_s = split.alpha_s;
    double alpha_b = split.alpha_b();

    DephasingThermo out;
    out.u_s = 0.5 * spec.omega0 * z - 4.0 * lam2 * alpha_b * z * z * k.big_delta;
    out.u_b_shift = 4.0 * lam2 * (1.0 - alpha_s * z * z) * k.big_delta;
    out.u_chi = -4.0 * lam2 * (1.0 - z * z) * k.big_delta;
    out.u_tot = 0.5 * spec.omega0 * z;

    out.du_s = -4.0 * lam2 * alpha_b * z * z * k.ddelta;
    out.dw_s = out.du_s;
    out.dq_s = 0.0;
    out.du_b = 4.0 * lam2 * (1.0 - alpha_s * z * z) * k.ddelta;
    out.dq_b = 4.0 * lam2 * (1.0 - z * z) * k.ddelta;
    out.dw_b = 4.0 * lam2 * alpha_b * z * z * k.ddelta;
    out.du_chi = -4.0 * lam2 * (1.0 - z * z) * k.ddelta;

    out.ds_b = spec.beta * out.dq_b;
    out.s_b_shift = 4.0 * spec.beta * lam2 * (1.0 - z * z) * k.big_delta;

    double damp = std::exp(-16.0 * lam2 * k.big_gamma);
    out.coherence_magnitude = std::sqrt(coh0_sq * damp);
    double r = std::sqrt(z * z + 4.0 * coh0_sq * damp);
    out.bloch_radius = r;
    double p_plus = 0.5 * (1.0 + r);
    double p_minus = 0.5 * (1.0 - r);
    auto plogp = [](double p) { return p > 1e-15 ? p * std::log(p) : 0.0; };
    out.s_s = -plogp(p_plus) - plogp(p_minus);
    if (coh0_sq > 0.0 && k.dgamma != 0.0 && r > 1e-14 && r < 1.0 - 1e-14) {
        double b = (16.0 * coh0_sq / r) * damp *
                   std::log((1.0 + r) / (1.0 - r));
        out.ds_s = lam2 * b * k.dgamma;
    }

    if (1.0 - z * z > 1e-14) {
        out.t_pseudo_b =
            (1.0 - alpha_s * z * z) / (spec.beta * (1.0 - z * z));
        out.t_ext_b = 1.0 / spec.beta;
    }
    return out;
}

double markovian_dephasing_rate(const DephasingSpec& spec) {
    return 4.0 * M_PI * spec.lambda * spec.lambda / spec.beta;
}

LindbladGenerator dephasing_generator(const DephasingSpec& spec) {
    Matrix h = 0.5 * spec.omega0 * sigma_z();
    std::vector<JumpTerm> jumps;
    jumps.push_back({sigma_z(), 0.5 * markovian_dephasing_rate(spec)});
    return LindbladGenerator(Operator::hermitian(h, "H"), std::move(jumps));
}

}  // namespace corrthermo

#include "corrthermo/dynamics.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "corrthermo/config.hpp"

namespace corrthermo {

TimeGrid::TimeGrid(double t0_, double t1_, Index steps_)
    : t0(t0_), t1(t1_), steps(steps_) {
    if (!(t1 > t0))
        throw DimensionError("time grid needs t1 > t0");
    if (steps < 1) throw DimensionError("time grid needs at least one step");
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(static_cast<std::size_t>(nodes()));
    for (Index k = 0; k < nodes(); ++k)
        out[static_cast<std::size_t>(k)] = node(k);
    return out;
}

LindbladGenerator::LindbladGenerator(Operator hamiltonian,
                                     std::vector<JumpTerm> jumps)
    : hamiltonian_(std::move(hamiltonian)), jumps_(std::move(jumps)) {
    if (!hamiltonian_.is_hermitian())
        throw NonHermitianError("Lindblad Hamiltonian is not Hermitian");
    dissipator_quadratics_.reserve(jumps_.size());
    for (const auto& jump : jumps_) {
        if (jump.op.rows() != hamiltonian_.dim() ||
            jump.op.cols() != hamiltonian_.dim())
            throw DimensionError("jump operator does not match Hamiltonian");
        if (!(jump.rate >= 0.0))
            throw StateValidationError("jump rate must be nonnegative, got " +
                                       std::to_string(jump.rate));
        dissipator_quadratics_.push_back(jump.op.adjoint() * jump.op);
    }
}

Matrix LindbladGenerator::apply(const Matrix& rho) const {
    const Matrix& h = hamiltonian_.matrix();
    Matrix out = Cplx(0.0, -1.0) * (h * rho - rho * h);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        const Matrix& l = jumps_[k].op;
        const Matrix& ll = dissipator_quadratics_[k];
        out += jumps_[k].rate *
               (l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll));
    }
    return out;
}

std::vector<JointState> propagate_exact(const BipartiteSystem& system,
                                        const Matrix& rho0,
                                        const TimeGrid& grid) {
    if (system.time_dependent())
        throw InvariantViolation(
            "exact propagation needs a constant Hamiltonian");
    require_density_matrix(rho0, "initial joint state");
    SpectralDecomposition spec = hermitian_spectrum(system.h_total());
    const Matrix& v = spec.eigenvectors;
    Matrix w = v.adjoint() * rho0 * v;
    Index dim = rho0.rows();

    std::vector<JointState> out;
    out.reserve(static_cast<std::size_t>(grid.nodes()));
    for (Index k = 0; k < grid.nodes(); ++k) {
        double tau = grid.node(k) - grid.t0;
        Matrix phased(dim, dim);
        for (Index i = 0; i < dim; ++i)
            for (Index j = 0; j < dim; ++j)
                phased(i, j) =
                    w(i, j) * std::exp(Cplx(0.0, -(spec.eigenvalues(i) -
                                                   spec.eigenvalues(j)) *
                                                tau));
        Matrix rho = v * phased * v.adjoint();
        rho = 0.5 * (rho + rho.adjoint().eval());
        out.emplace_back(std::move(rho), system.layout(), grid.node(k));
    }
    return out;
}

std::vector<JointState> propagate_piecewise(const BipartiteSystem& system,
                                            const Matrix& rho0,
                                            const TimeGrid& grid,
                                            Index substeps) {
    if (substeps < 1)
        throw DimensionError("piecewise propagation needs substeps >= 1");
    require_density_matrix(rho0, "initial joint state");
    Matrix rho = rho0;
    std::vector<JointState> out;
    out.reserve(static_cast<std::size_t>(grid.nodes()));
    out.emplace_back(rho, system.layout(), grid.t0);
    double sub_dt = grid.dt() / static_cast<double>(substeps);
    for (Index k = 0; k < grid.steps; ++k) {
        double left = grid.node(k);
        for (Index s = 0; s < substeps; ++s) {
            double mid = left + (static_cast<double>(s) + 0.5) * sub_dt;
            TimeDependentHamiltonians h = system.at(mid);
            Matrix h_tot = embed_s(h.h_s, system.layout()) +
                           embed_b(h.h_b, system.layout()) + h.h_int;
            rho = evolve_unitary(rho, h_tot, sub_dt);
        }
        rho = 0.5 * (rho + rho.adjoint().eval());
        out.emplace_back(rho, system.layout(), grid.node(k + 1));
    }
    return out;
}

std::vector<Matrix> propagate_lindblad(const LindbladGenerator& generator,
                                       const Matrix& rho0,
                                       const TimeGrid& grid) {
    require_density_matrix(rho0, "initial reduced state");
    if (rho0.rows() != generator.dim())
        throw DimensionError("initial state does not match generator");
    constexpr double kTraceTol = 1e-10;
    constexpr double kPositivityFloor = -1e-8;

    double dt = grid.dt();
    Matrix rho = rho0;
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(grid.nodes()));
    out.push_back(rho);
    for (Index k = 0; k < grid.steps; ++k) {
        Matrix k1 = generator.apply(rho);
        Matrix k2 = generator.apply(rho + (0.5 * dt) * k1);
        Matrix k3 = generator.apply(rho + (0.5 * dt) * k2);
        Matrix k4 = generator.apply(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint().eval());

        double trace_drift = std::abs(rho.trace().real() - 1.0) +
                             std::abs(rho.trace().imag());
        if (trace_drift > kTraceTol)
            throw StepSizeError("master-equation trace drifted by " +
                                    std::to_string(trace_drift),
                                0.5 * dt);
        double min_eig = hermitian_spectrum(rho).eigenvalues.minCoeff();
        if (min_eig < kPositivityFloor)
            throw StepSizeError("master-equation state lost positivity (" +
                                    std::to_string(min_eig) + ")",
                                0.5 * dt);
        out.push_back(rho);
    }
    return out;
}

namespace {

double trapezoid_step(double dt, double left, double right) {
    return 0.5 * dt * (left + right);
}

}  // namespace

ThermoLedger ledger_from_states(const BipartiteSystem& system,
                                const std::vector<JointState>& states,
                                const TimeGrid& grid,
                                const AccountingOptions& options) {
    if (states.size() != static_cast<std::size_t>(grid.nodes()))
        throw DimensionError("trajectory length does not match grid");
    ThermoLedger ledger{grid, {}, {}, {}};
    ledger.snapshots.reserve(states.size());
    for (const auto& state : states)
        ledger.snapshots.push_back(make_snapshot(system, state, options));

    const auto& snaps = ledger.snapshots;
    LedgerTotals& tot = ledger.totals;
    ResidualMaxima& res = ledger.residuals;
    res.min_mutual_information = snaps.front().s_chi;

    double dt = grid.dt();
    double u_tot_integral = 0.0;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const FluxRates& r = snaps[k].rates;
        res.first_law_s = std::max(
            res.first_law_s,
            std::abs(r.du_s - r.dq_s - r.dw_s - r.drive_s));
        res.first_law_b = std::max(
            res.first_law_b,
            std::abs(r.du_b - r.dq_b - r.dw_b - r.drive_b));
        double interaction_drive = 0.0;
        if (system.time_dependent()) {
            TimeDependentHamiltonians dh =
                system.derivative_at(snaps[k].tau);
            interaction_drive =
                (tensor_product(states[k].rho_s(), states[k].rho_b()) *
                 dh.h_int)
                    .trace()
                    .real();
        }
        res.work_antisymmetry =
            std::max(res.work_antisymmetry,
                     std::abs(r.dw_s + r.dw_b - interaction_drive));
        res.heat_balance = std::max(res.heat_balance,
                                    std::abs(r.dq_s + r.dq_b + r.dq_chi));
        res.energy_conservation =
            std::max(res.energy_conservation,
                     std::abs(snaps[k].u_tot -
                              (snaps.front().u_tot + u_tot_integral)));
        res.min_mutual_information =
            std::min(res.min_mutual_information, snaps[k].s_chi);

        if (k + 1 < snaps.size()) {
            const FluxRates& rn = snaps[k + 1].rates;
            tot.delta_q_s += trapezoid_step(dt, r.dq_s, rn.dq_s);
            tot.delta_q_b += trapezoid_step(dt, r.dq_b, rn.dq_b);
            tot.delta_w_s += trapezoid_step(dt, r.dw_s, rn.dw_s);
            tot.delta_w_b += trapezoid_step(dt, r.dw_b, rn.dw_b);
            tot.delta_drive_s += trapezoid_step(dt, r.drive_s, rn.drive_s);
            tot.delta_drive_b += trapezoid_step(dt, r.drive_b, rn.drive_b);
            tot.delta_s_s += trapezoid_step(dt, r.ds_s, rn.ds_s);
            tot.delta_s_b += trapezoid_step(dt, r.ds_b, rn.ds_b);
            tot.delta_s_sb += trapezoid_step(dt, r.ds_sb, rn.ds_sb);
            tot.delta_u_chi += trapezoid_step(dt, r.du_chi, rn.du_chi);
            u_tot_integral += trapezoid_step(dt, r.du_tot, rn.du_tot);
        }
    }
    tot.delta_u_s = snaps.back().u_s - snaps.front().u_s;
    tot.delta_u_b = snaps.back().u_b - snaps.front().u_b;
    tot.delta_u_tot = snaps.back().u_tot - snaps.front().u_tot;
    return ledger;
}

ThermoLedger build_ledger(const BipartiteSystem& system, const Matrix& rho0,
                          const TimeGrid& grid,
                          const AccountingOptions& options) {
    std::vector<JointState> states =
        system.time_dependent() ? propagate_piecewise(system, rho0, grid)
                                : propagate_exact(system, rho0, grid);
    return ledger_from_states(system, states, grid, options);
}

}  // namespace corrthermo

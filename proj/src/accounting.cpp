#include "corrthermo/accounting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "corrthermo/config.hpp"
#include "corrthermo/dynamics.hpp"

namespace corrthermo {

namespace {

double re_trace(const Matrix& a, const Matrix& b) {
    return (a * b).trace().real();
}

Matrix assemble_total(const TimeDependentHamiltonians& h,
                      const CompositeLayout& layout) {
    return embed_s(h.h_s, layout) + embed_b(h.h_b, layout) + h.h_int;
}

}  // namespace

BipartiteSystem::BipartiteSystem(Operator h_s, Operator h_b, Operator h_int,
                                 CompositeLayout layout)
    : layout_(layout),
      h_s_(std::move(h_s)),
      h_b_(std::move(h_b)),
      h_int_(std::move(h_int)) {
    check_and_assemble();
}

BipartiteSystem::BipartiteSystem(HamiltonianHook hook, CompositeLayout layout,
                                 HamiltonianHook derivative_hook)
    : layout_(layout),
      hook_(std::move(hook)),
      derivative_hook_(std::move(derivative_hook)) {
    if (!hook_) throw DimensionError("time-dependent system needs a hook");
    TimeDependentHamiltonians h0 = hook_(0.0);
    h_s_ = Operator::hermitian(std::move(h0.h_s), "H_S");
    h_b_ = Operator::hermitian(std::move(h0.h_b), "H_B");
    h_int_ = Operator::hermitian(std::move(h0.h_int), "H_int");
    check_and_assemble();
}

void BipartiteSystem::check_and_assemble() {
    if (!h_s_.is_hermitian()) throw NonHermitianError("H_S is not Hermitian");
    if (!h_b_.is_hermitian()) throw NonHermitianError("H_B is not Hermitian");
    if (!h_int_.is_hermitian())
        throw NonHermitianError("H_int is not Hermitian");
    if (h_s_.dim() != layout_.dim_s)
        throw DimensionError("H_S does not match layout");
    if (h_b_.dim() != layout_.dim_b)
        throw DimensionError("H_B does not match layout");
    if (h_int_.dim() != layout_.total())
        throw DimensionError("H_int does not match layout");
    h_total_ = embed_s(h_s_.matrix(), layout_) + embed_b(h_b_.matrix(), layout_) +
               h_int_.matrix();
}

TimeDependentHamiltonians BipartiteSystem::at(double tau) const {
    if (!hook_) return {h_s(), h_b(), h_int()};
    TimeDependentHamiltonians h = hook_(tau);
    if (h.h_s.rows() != layout_.dim_s || h.h_b.rows() != layout_.dim_b ||
        h.h_int.rows() != layout_.total())
        throw DimensionError("hook returned mismatched dimensions");
    return h;
}

TimeDependentHamiltonians BipartiteSystem::derivative_at(double tau) const {
    if (!hook_) {
        Matrix zs = Matrix::Zero(layout_.dim_s, layout_.dim_s);
        Matrix zb = Matrix::Zero(layout_.dim_b, layout_.dim_b);
        Matrix zi = Matrix::Zero(layout_.total(), layout_.total());
        return {zs, zb, zi};
    }
    if (derivative_hook_) return derivative_hook_(tau);
    double h = 1e-6 * std::max(1.0, std::abs(tau));
    TimeDependentHamiltonians plus = hook_(tau + h);
    TimeDependentHamiltonians minus = hook_(tau - h);
    return {(plus.h_s - minus.h_s) / (2.0 * h),
            (plus.h_b - minus.h_b) / (2.0 * h),
            (plus.h_int - minus.h_int) / (2.0 * h)};
}

CorrelationSplit correlation_operator(const Matrix& rho_sb,
                                      const CompositeLayout& layout) {
    CorrelationSplit out;
    out.rho_s = partial_trace(rho_sb, layout, Subsystem::S);
    out.rho_b = partial_trace(rho_sb, layout, Subsystem::B);
    out.chi = rho_sb - tensor_product(out.rho_s, out.rho_b);
    return out;
}

JointState::JointState(Matrix rho_sb, const CompositeLayout& layout,
                       double tau)
    : layout_(layout), tau_(tau), rho_sb_(std::move(rho_sb)) {
    if (rho_sb_.rows() != layout_.total() ||
        rho_sb_.cols() != layout_.total())
        throw DimensionError("joint state does not match layout");
    if (config().validate_states)
        require_density_matrix(rho_sb_, "joint state");
    CorrelationSplit split = correlation_operator(rho_sb_, layout_);
    rho_s_ = std::move(split.rho_s);
    rho_b_ = std::move(split.rho_b);
    chi_ = std::move(split.chi);
    if (config().validate_states) {
        if (std::abs(chi_.trace()) > kStateTol)
            throw InvariantViolation("correlation operator has nonzero trace");
        double marg =
            std::max(partial_trace(chi_, layout_, Subsystem::S)
                         .cwiseAbs()
                         .maxCoeff(),
                     partial_trace(chi_, layout_, Subsystem::B)
                         .cwiseAbs()
                         .maxCoeff());
        if (marg > kStateTol)
            throw InvariantViolation(
                "correlation operator has nonvanishing marginals");
    }
}

EffectiveHamiltonians effective_hamiltonians(
    const TimeDependentHamiltonians& h, const CompositeLayout& layout,
    const JointState& state, const EnergySplit& split) {
    EffectiveHamiltonians out;
    Matrix mean_b = contract_b(h.h_int, layout, state.rho_b());  // on S
    Matrix mean_s = contract_s(h.h_int, layout, state.rho_s());  // on B
    out.h_s_meanfield = h.h_s + mean_b;
    out.h_b_meanfield = h.h_b + mean_s;
    out.mean_interaction = re_trace(state.rho_s(), mean_b);
    out.h_s_eff = out.h_s_meanfield -
                  split.alpha_s * out.mean_interaction *
                      Matrix::Identity(layout.dim_s, layout.dim_s);
    out.h_b_eff = out.h_b_meanfield -
                  split.alpha_b() * out.mean_interaction *
                      Matrix::Identity(layout.dim_b, layout.dim_b);
    out.h_int_eff = assemble_total(h, layout) - embed_s(out.h_s_eff, layout) -
                    embed_b(out.h_b_eff, layout);
    return out;
}

EffectiveHamiltonians effective_hamiltonians(const BipartiteSystem& system,
                                             const JointState& state,
                                             const EnergySplit& split) {
    return effective_hamiltonians(system.at(state.tau()), system.layout(),
                                  state, split);
}

InternalEnergies internal_energies(const BipartiteSystem& system,
                                   const JointState& state,
                                   const EnergySplit& split) {
    EffectiveHamiltonians eff = effective_hamiltonians(system, state, split);
    TimeDependentHamiltonians h = system.at(state.tau());
    InternalEnergies out{};
    out.u_s = re_trace(state.rho_s(), eff.h_s_eff);
    out.u_b = re_trace(state.rho_b(), eff.h_b_eff);
    out.u_chi = re_trace(state.chi(), eff.h_int_eff);
    out.u_tot = re_trace(state.rho_sb(), assemble_total(h, system.layout()));
    return out;
}

namespace {

FluxRates compute_flux_rates(const TimeDependentHamiltonians& h,
                             const TimeDependentHamiltonians* dh,
                             const CompositeLayout& layout,
                             const JointState& state,
                             const EnergySplit& split) {
    EffectiveHamiltonians eff = effective_hamiltonians(h, layout, state, split);
    Matrix h_tot = assemble_total(h, layout);

    const Matrix& rho = state.rho_sb();
    Matrix commutator = h_tot * rho - rho * h_tot;
    Matrix rho_dot = Cplx(0.0, -1.0) * commutator;
    Matrix rho_s_dot = partial_trace(rho_dot, layout, Subsystem::S);
    Matrix rho_b_dot = partial_trace(rho_dot, layout, Subsystem::B);
    Matrix chi_dot = rho_dot - tensor_product(rho_s_dot, state.rho_b()) -
                     tensor_product(state.rho_s(), rho_b_dot);

    FluxRates out;

    // Heats from the correlation-commutator form.
    Matrix hs_full = embed_s(eff.h_s_eff, layout);
    Matrix hb_full = embed_b(eff.h_b_eff, layout);
    Matrix comm_s = hs_full * h.h_int - h.h_int * hs_full;
    Matrix comm_b = hb_full * h.h_int - h.h_int * hb_full;
    out.dq_s = (Cplx(0.0, -1.0) * (state.chi() * comm_s).trace()).real();
    out.dq_b = (Cplx(0.0, -1.0) * (state.chi() * comm_b).trace()).real();

    // Works mediated by the interaction (and its explicit drive, if any).
    double x = re_trace(tensor_product(state.rho_s(), rho_b_dot), h.h_int);
    double y = re_trace(tensor_product(rho_s_dot, state.rho_b()), h.h_int);
    if (dh) {
        double z = re_trace(tensor_product(state.rho_s(), state.rho_b()),
                            dh->h_int);
        out.dw_s = split.alpha_b() * (x + z) - split.alpha_s * y;
        out.dw_b = split.alpha_s * (y + z) - split.alpha_b() * x;
        out.drive_s = re_trace(state.rho_s(), dh->h_s);
        out.drive_b = re_trace(state.rho_b(), dh->h_b);
    } else {
        double t1 = split.alpha_b() * x;
        double t2 = split.alpha_s * y;
        out.dw_s = t1 - t2;
        out.dw_b = t2 - t1;  // exact negation
    }

    // Internal-energy rates from the product rule on Tr[rho_X H_X^eff].
    out.du_s = re_trace(rho_s_dot, eff.h_s_eff) + out.dw_s + out.drive_s;
    out.du_b = re_trace(rho_b_dot, eff.h_b_eff) + out.dw_b + out.drive_b;
    out.du_chi = re_trace(chi_dot, eff.h_int_eff);
    out.dq_chi = re_trace(chi_dot, h.h_int);
    out.du_tot = re_trace(rho_dot, h_tot);
    if (dh) out.du_tot += re_trace(rho, assemble_total(*dh, layout));

    out.ds_s = entropy_rate(state.rho_s(), rho_s_dot);
    out.ds_b = entropy_rate(state.rho_b(), rho_b_dot);
    out.ds_sb = entropy_rate(rho, rho_dot);
    return out;
}

}  // namespace

FluxRates flux_rates(const BipartiteSystem& system, const JointState& state,
                     const EnergySplit& split) {
    TimeDependentHamiltonians h = system.at(state.tau());
    if (!system.time_dependent())
        return compute_flux_rates(h, nullptr, system.layout(), state, split);
    TimeDependentHamiltonians dh = system.derivative_at(state.tau());
    return compute_flux_rates(h, &dh, system.layout(), state, split);
}

FluxRates flux_rates_time_dependent(const BipartiteSystem& system,
                                    const JointState& state,
                                    const EnergySplit& split) {
    TimeDependentHamiltonians h = system.at(state.tau());
    TimeDependentHamiltonians dh = system.derivative_at(state.tau());
    return compute_flux_rates(h, &dh, system.layout(), state, split);
}

std::optional<double> pseudo_temperature(double ds_rate, double du_rate,
                                         double threshold) {
    if (std::abs(ds_rate) < threshold) return std::nullopt;
    return du_rate / ds_rate;
}

double entropy_production_tilde(double ds_rate, double dq_rate,
                                const std::optional<double>& pseudo_t) {
    if (!pseudo_t)
        throw InvariantViolation(
            "entropy production needs a defined pseudo-temperature");
    if (*pseudo_t == 0.0)
        throw InvariantViolation(
            "entropy production undefined at zero pseudo-temperature");
    return ds_rate - dq_rate / *pseudo_t;
}

double entropy_production_fixed_t(double ds_rate, double dq_rate,
                                  double t_ref) {
    if (std::isinf(t_ref) && t_ref > 0.0) return ds_rate;
    if (t_ref <= 0.0)
        throw InvariantViolation(
            "reference temperature must be positive, got " +
            std::to_string(t_ref));
    return ds_rate - dq_rate / t_ref;
}

std::optional<double> extended_temperature_estimate(double ds_rate,
                                                    double dq_rate,
                                                    double threshold) {
    if (std::abs(ds_rate) < threshold) return std::nullopt;
    // Heat-free entropy change is pure production; no temperature fits it.
    if (std::abs(dq_rate) < threshold) return std::nullopt;
    return dq_rate / ds_rate;
}

double lindblad_entropy_production(const Matrix& rho,
                                   const LindbladGenerator& generator,
                                   const Matrix& gibbs_reference) {
    Matrix stationarity = generator.apply(gibbs_reference);
    double drift = stationarity.cwiseAbs().maxCoeff();
    if (drift > 1e-8)
        throw InvariantViolation(
            "generator does not annihilate the Gibbs reference (max |L[ref]| " +
            std::to_string(drift) + ")");
    SpectralDecomposition ref_spec =
        hermitian_spectrum(gibbs_reference, kStateTol);
    if (ref_spec.eigenvalues.minCoeff() <= config().entropy_clamp)
        throw StateValidationError(
            "Gibbs reference must be full rank for entropy production");
    double clamp = config().entropy_clamp;
    auto log_clamped = [clamp](double p) {
        return Cplx(std::log(std::max(p, clamp)), 0.0);
    };
    Matrix ln_rho =
        apply_spectral(hermitian_spectrum(rho, kStateTol), log_clamped);
    Matrix ln_ref = apply_spectral(ref_spec, log_clamped);
    double value = -re_trace(generator.apply(rho), ln_rho - ln_ref);
    if (value < -1e-9)
        throw InvariantViolation("entropy production came out negative: " +
                                 std::to_string(value));
    return value;
}

ThermoSnapshot make_snapshot(const BipartiteSystem& system,
                             const JointState& state,
                             const AccountingOptions& options) {
    ThermoSnapshot snap;
    snap.tau = state.tau();
    InternalEnergies u = internal_energies(system, state, options.split);
    snap.u_s = u.u_s;
    snap.u_b = u.u_b;
    snap.u_chi = u.u_chi;
    snap.u_tot = u.u_tot;
    snap.s_s = von_neumann_entropy(state.rho_s());
    snap.s_b = von_neumann_entropy(state.rho_b());
    snap.s_sb = von_neumann_entropy(state.rho_sb());
    snap.s_chi = snap.s_s + snap.s_b - snap.s_sb;
    snap.rates = flux_rates(system, state, options.split);

    double thr = options.rate_threshold;
    snap.t_pseudo_s = pseudo_temperature(snap.rates.ds_s, snap.rates.du_s, thr);
    snap.t_pseudo_b = pseudo_temperature(snap.rates.ds_b, snap.rates.du_b, thr);
    snap.t_chi =
        pseudo_temperature(snap.rates.ds_chi(), snap.rates.du_chi, thr);
    snap.t_ext_s =
        extended_temperature_estimate(snap.rates.ds_s, snap.rates.dq_s, thr);
    snap.t_ext_b =
        extended_temperature_estimate(snap.rates.ds_b, snap.rates.dq_b, thr);
    if (snap.t_pseudo_s && *snap.t_pseudo_s != 0.0)
        snap.sigma_tilde_s = entropy_production_tilde(
            snap.rates.ds_s, snap.rates.dq_s, snap.t_pseudo_s);
    if (snap.t_pseudo_b && *snap.t_pseudo_b != 0.0)
        snap.sigma_tilde_b = entropy_production_tilde(
            snap.rates.ds_b, snap.rates.dq_b, snap.t_pseudo_b);
    if (options.beta_reference) {
        double beta = *options.beta_reference;
        if (std::isinf(beta)) {
            // Vacuum reference: dq/T vanishes.
            snap.sigma_s = snap.rates.ds_s;
            snap.sigma_b = snap.rates.ds_b;
        } else {
            snap.sigma_s = snap.rates.ds_s - beta * snap.rates.dq_s;
            snap.sigma_b = snap.rates.ds_b - beta * snap.rates.dq_b;
        }
    }
    return snap;
}

std::vector<TransportDiagnostic> energy_transport_check(
    const std::vector<ThermoSnapshot>& snapshots, double u_chi_rate_tol,
    double temperature_gap_tol) {
    std::vector<TransportDiagnostic> out;
    out.reserve(snapshots.size());
    for (const auto& snap : snapshots) {
        TransportDiagnostic diag;
        diag.tau = snap.tau;
        if (std::abs(snap.rates.du_chi) > u_chi_rate_tol) {
            diag.status = TransportDiagnostic::Status::skipped_u_chi_rate;
        } else if (!snap.t_pseudo_s || !snap.t_pseudo_b) {
            diag.status =
                TransportDiagnostic::Status::skipped_undefined_temperature;
        } else {
            double ts = *snap.t_pseudo_s;
            double tb = *snap.t_pseudo_b;
            double scale = std::max({1.0, std::abs(ts), std::abs(tb)});
            if (std::abs(ts - tb) <= temperature_gap_tol * scale) {
                diag.status =
                    TransportDiagnostic::Status::flagged_equal_temperatures;
            } else {
                // Driven variant; du_tot vanishes for constant Hamiltonians.
                double flow = snap.rates.ds_chi() - snap.rates.du_tot / ts;
                diag.residual =
                    snap.rates.du_b - ts * tb / (ts - tb) * flow;
            }
        }
        out.push_back(diag);
    }
    return out;
}

}  // namespace corrthermo

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "corrthermo/linalg.hpp"

namespace corrthermo {

class LindbladGenerator;  // dynamics.hpp

// How the scalar mean interaction energy is apportioned between the two
// effective local Hamiltonians; alpha_s + alpha_b = 1 by construction.
struct EnergySplit {
    double alpha_s = 1.0;
    double alpha_b() const { return 1.0 - alpha_s; }
};

struct TimeDependentHamiltonians {
    Matrix h_s, h_b, h_int;
};
using HamiltonianHook = std::function<TimeDependentHamiltonians(double)>;

// H_tot = H_S (x) I + I (x) H_B + H_int, all Hermitian. An optional hook makes
// the triple time dependent; the stored operators are then the tau = 0 values.
class BipartiteSystem {
  public:
    BipartiteSystem(Operator h_s, Operator h_b, Operator h_int,
                    CompositeLayout layout);
    // Hook variant; derivative_hook (optional) supplies dH/dtau analytically,
    // otherwise a central difference of the hook is used.
    BipartiteSystem(HamiltonianHook hook, CompositeLayout layout,
                    HamiltonianHook derivative_hook = nullptr);

    const CompositeLayout& layout() const { return layout_; }
    const Matrix& h_s() const { return h_s_.matrix(); }
    const Matrix& h_b() const { return h_b_.matrix(); }
    const Matrix& h_int() const { return h_int_.matrix(); }
    const Matrix& h_total() const { return h_total_; }

    bool time_dependent() const { return bool(hook_); }
    TimeDependentHamiltonians at(double tau) const;
    TimeDependentHamiltonians derivative_at(double tau) const;

  private:
    void check_and_assemble();
    CompositeLayout layout_;
    Operator h_s_, h_b_, h_int_;
    Matrix h_total_;
    HamiltonianHook hook_;
    HamiltonianHook derivative_hook_;
};

// Joint state with cached marginals and correlation operator
// chi = rho_SB - rho_S (x) rho_B. Immutable after construction. Validation
// (density-matrix checks, chi trace/marginal checks) runs when
// config().validate_states is set.
class JointState {
  public:
    JointState(Matrix rho_sb, const CompositeLayout& layout, double tau = 0.0);

    double tau() const { return tau_; }
    const Matrix& rho_sb() const { return rho_sb_; }
    const Matrix& rho_s() const { return rho_s_; }
    const Matrix& rho_b() const { return rho_b_; }
    const Matrix& chi() const { return chi_; }
    const CompositeLayout& layout() const { return layout_; }

  private:
    CompositeLayout layout_;
    double tau_;
    Matrix rho_sb_, rho_s_, rho_b_, chi_;
};

struct CorrelationSplit {
    Matrix rho_s, rho_b, chi;
};
CorrelationSplit correlation_operator(const Matrix& rho_sb,
                                      const CompositeLayout& layout);

// Effective Hamiltonians of the split
//   H_S^eff = H_S + Tr_B[rho_B H_int] - alpha_s <H_int> I
//   H_B^eff = H_B + Tr_S[rho_S H_int] - alpha_b <H_int> I
//   H_int^eff = H_tot - H_S^eff (x) I - I (x) H_B^eff
// with <H_int> = Tr[(rho_S (x) rho_B) H_int]. By construction
// Tr_S[rho_S H_int^eff] = Tr_B[rho_B H_int^eff] = 0.
struct EffectiveHamiltonians {
    Matrix h_s_meanfield;  // H_S + Tr_B[rho_B H_int] (alpha-independent)
    Matrix h_b_meanfield;
    Matrix h_s_eff, h_b_eff, h_int_eff;
    double mean_interaction = 0.0;
};
EffectiveHamiltonians effective_hamiltonians(const BipartiteSystem& system,
                                             const JointState& state,
                                             const EnergySplit& split);
// Time-dependent variant evaluated with the instantaneous Hamiltonians.
EffectiveHamiltonians effective_hamiltonians(
    const TimeDependentHamiltonians& h, const CompositeLayout& layout,
    const JointState& state, const EnergySplit& split);

struct InternalEnergies {
    double u_s, u_b, u_chi, u_tot;
};
InternalEnergies internal_energies(const BipartiteSystem& system,
                                   const JointState& state,
                                   const EnergySplit& split);

// Instantaneous rates along the closed-system evolution
// d rho_SB/dtau = -i [H_tot, rho_SB]:
//   dq_s = -i Tr[chi [H_S^eff (x) I, H_int]]      (and symmetrically for B)
//   dw_s = alpha_b Tr[(rho_S (x) drho_B) H_int] - alpha_s Tr[(drho_S (x) rho_B) H_int]
//   du_x from the product rule on Tr[rho_X H_X^eff]
//   du_chi = Tr[dchi H_int^eff]
// For constant Hamiltonians du_x = dq_x + dw_x and dq_s + dq_b = -du_chi.
// With a time-dependent hook, drive_x = Tr[rho_X dH_X/dtau] is reported
// separately so that dw_s + dw_b = Tr[(rho_S (x) rho_B) dH_int/dtau] holds and
// the driven first law reads du_x = dq_x + dw_x + drive_x.
struct FluxRates {
    double du_s = 0, du_b = 0, du_chi = 0, du_tot = 0;
    double dq_s = 0, dq_b = 0;
    double dw_s = 0, dw_b = 0;
    double dq_chi = 0;  // Tr[dchi H_int]; equals -(dq_s + dq_b)
    double drive_s = 0, drive_b = 0;
    double ds_s = 0, ds_b = 0, ds_sb = 0;
    double ds_chi() const { return ds_s + ds_b - ds_sb; }
};
FluxRates flux_rates(const BipartiteSystem& system, const JointState& state,
                     const EnergySplit& split);
FluxRates flux_rates_time_dependent(const BipartiteSystem& system,
                                    const JointState& state,
                                    const EnergySplit& split);

// T = du/ds; empty when |ds| < threshold.
std::optional<double> pseudo_temperature(double ds_rate, double du_rate,
                                         double threshold = 1e-12);

// dSigma~ = ds - dq/T with T the pseudo-temperature; throws on an undefined
// or zero temperature.
double entropy_production_tilde(double ds_rate, double dq_rate,
                                const std::optional<double>& pseudo_t);

// dSigma = ds - dq/t_ref at a fixed reference temperature; t_ref = +infinity
// (vacuum reference) gives dSigma = ds. Throws on t_ref <= 0.
double entropy_production_fixed_t(double ds_rate, double dq_rate,
                                  double t_ref);

// Zero-production branch of the extended temperature: T = dq/ds. Empty when
// |ds| < threshold, or when dq vanishes while ds does not (pure-production
// regime, temperature undefined).
std::optional<double> extended_temperature_estimate(double ds_rate,
                                                    double dq_rate,
                                                    double threshold = 1e-12);

// Spohn entropy-production rate -Tr[L[rho](ln rho - ln rho_ref)] for a
// generator with full-rank stationary Gibbs reference rho_ref. Checks that the
// generator annihilates the reference (1e-8) and that the result is
// nonnegative down to -1e-9.
double lindblad_entropy_production(const Matrix& rho,
                                   const LindbladGenerator& generator,
                                   const Matrix& gibbs_reference);

// One fully evaluated thermodynamic record at a grid node.
struct ThermoSnapshot {
    double tau = 0;
    double u_s = 0, u_b = 0, u_chi = 0, u_tot = 0;
    double s_s = 0, s_b = 0, s_sb = 0, s_chi = 0;
    FluxRates rates;
    std::optional<double> t_pseudo_s, t_pseudo_b, t_chi;
    std::optional<double> t_ext_s, t_ext_b;
    std::optional<double> sigma_tilde_s, sigma_tilde_b;
    std::optional<double> sigma_s, sigma_b;  // need a reference temperature
};

struct AccountingOptions {
    EnergySplit split;
    // Inverse reference temperature for the fixed-T entropy productions;
    // +infinity encodes a vacuum reference, empty leaves sigma_x unset.
    std::optional<double> beta_reference;
    double rate_threshold = 1e-12;
};

ThermoSnapshot make_snapshot(const BipartiteSystem& system,
                             const JointState& state,
                             const AccountingOptions& options);

// Diagnostic for the two-temperature energy-transport relation
//   du_b = T_S T_B/(T_S - T_B) ds_chi            (constant Hamiltonians)
//   du_b = T_S T_B/(T_S - T_B) (ds_chi - du_tot/T_S)   (driven variant)
// evaluated only where |du_chi| < u_chi_rate_tol and both pseudo-temperatures
// are defined and distinct.
struct TransportDiagnostic {
    enum class Status {
        evaluated,
        skipped_u_chi_rate,          // |du_chi| too large for the relation
        skipped_undefined_temperature,
        flagged_equal_temperatures,
    };
    double tau = 0;
    Status status = Status::evaluated;
    double residual = 0;
};
std::vector<TransportDiagnostic> energy_transport_check(
    const std::vector<ThermoSnapshot>& snapshots,
    double u_chi_rate_tol = 1e-9, double temperature_gap_tol = 1e-9);

}  // namespace corrthermo

#pragma once

#include <vector>

#include "corrthermo/accounting.hpp"
#include "corrthermo/errors.hpp"
#include "corrthermo/linalg.hpp"

namespace corrthermo {

// Uniform time grid with steps+1 nodes; node(steps) lands on t1 exactly.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    Index steps = 100;

    TimeGrid(double t0_, double t1_, Index steps_);
    double dt() const { return (t1 - t0) / static_cast<double>(steps); }
    Index nodes() const { return steps + 1; }
    double node(Index k) const {
        return t0 + (t1 - t0) * (static_cast<double>(k) /
                                 static_cast<double>(steps));
    }
    std::vector<double> times() const;
};

struct JumpTerm {
    Matrix op;
    double rate = 0.0;
};

// dρ/dτ = −i[H,ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})
class LindbladGenerator {
  public:
    LindbladGenerator(Operator hamiltonian, std::vector<JumpTerm> jumps);

    Matrix apply(const Matrix& rho) const;
    const Operator& hamiltonian() const { return hamiltonian_; }
    const std::vector<JumpTerm>& jumps() const { return jumps_; }
    Index dim() const { return hamiltonian_.dim(); }

  private:
    Operator hamiltonian_;
    std::vector<JumpTerm> jumps_;
    std::vector<Matrix> dissipator_quadratics_;  // L†L per jump
};

// Closed evolution under a constant Hamiltonian. Every node is computed
// directly from rho0 in the eigenbasis, so there is no step-to-step error
// accumulation.
std::vector<JointState> propagate_exact(const BipartiteSystem& system,
                                        const Matrix& rho0,
                                        const TimeGrid& grid);

// Closed evolution under a time-dependent Hamiltonian, piecewise-constant at
// the midpoint of each substep (second-order accurate in dt/substeps).
std::vector<JointState> propagate_piecewise(const BipartiteSystem& system,
                                            const Matrix& rho0,
                                            const TimeGrid& grid,
                                            Index substeps = 1);

// Classical fourth-order Runge-Kutta on the master equation. Throws
// StepSizeError with a halved suggestion when trace or positivity drifts out
// of tolerance.
std::vector<Matrix> propagate_lindblad(const LindbladGenerator& generator,
                                       const Matrix& rho0,
                                       const TimeGrid& grid);

struct LedgerTotals {
    // Trapezoidal integrals of the corresponding rates.
    double delta_q_s = 0.0;
    double delta_q_b = 0.0;
    double delta_w_s = 0.0;
    double delta_w_b = 0.0;
    double delta_drive_s = 0.0;
    double delta_drive_b = 0.0;
    double delta_s_s = 0.0;
    double delta_s_b = 0.0;
    double delta_s_sb = 0.0;
    double delta_u_chi = 0.0;
    // Endpoint differences of the corresponding state functions.
    double delta_u_s = 0.0;
    double delta_u_b = 0.0;
    double delta_u_tot = 0.0;
};

struct ResidualMaxima {
    double first_law_s = 0.0;        // max |dU_S − dQ_S − dW_S − drive_S|
    double first_law_b = 0.0;
    double work_antisymmetry = 0.0;  // max |dW_S + dW_B − interaction drive|
    double heat_balance = 0.0;       // max |dQ_S + dQ_B + dQ_χ|
    double energy_conservation = 0.0;  // max |U_tot − (U_tot(0) + ∫ dU_tot)|
    double min_mutual_information = 0.0;
};

struct ThermoLedger {
    TimeGrid grid;
    std::vector<ThermoSnapshot> snapshots;
    LedgerTotals totals;
    ResidualMaxima residuals;
};

// Snapshot + integrate an already-propagated trajectory.
ThermoLedger ledger_from_states(const BipartiteSystem& system,
                                const std::vector<JointState>& states,
                                const TimeGrid& grid,
                                const AccountingOptions& options = {});

// Propagate (exactly when the Hamiltonian is constant, piecewise otherwise)
// and account every node.
ThermoLedger build_ledger(const BipartiteSystem& system, const Matrix& rho0,
                          const TimeGrid& grid,
                          const AccountingOptions& options = {});

}  // namespace corrthermo

#pragma once

#include <optional>
#include <vector>

#include "corrthermo/accounting.hpp"
#include "corrthermo/bosons.hpp"
#include "corrthermo/dynamics.hpp"
#include "corrthermo/linalg.hpp"

namespace corrthermo {

// Qubit whose sigma_z couples to bath displacements:
//   H = (omega0/2) sigma_z + sum_k omega_k a_k^dag a_k
//       + lambda sigma_z (x) sum_k (conj(f_k) a_k + f_k a_k^dag)
// Populations are conserved; coherences decay by a closed-form factor.
struct DephasingSpec {
    enum class BathKind { discrete, ohmic_continuum };
    BathKind kind = BathKind::discrete;
    double omega0 = 1.0;
    double lambda = 0.1;
    double beta = 1.0;
    // Discrete bath (joint simulation and exact sector solution).
    std::vector<BosonicMode> modes;
    Index n_max = 1;
    // Continuum |f(omega)|^2 = omega exp(-epsilon omega).
    double ohmic_epsilon = 0.1;
};

// Decoherence and displacement kernels and their time derivatives:
//   big_gamma  = sum |f|^2 coth(beta w/2) sin^2(w tau/2) / w^2
//   big_delta  = sum |f|^2 sin^2(w tau/2) / w
// (integrals over the continuum density in the ohmic case).
struct DephasingKernels {
    double big_gamma = 0.0;
    double big_delta = 0.0;
    double dgamma = 0.0;
    double ddelta = 0.0;
};
DephasingKernels dephasing_kernels(const DephasingSpec& spec, double tau);

struct DephasingModel {
    DephasingSpec spec;
    BathSpace bath;
    BipartiteSystem system;
};
// Discrete baths only; the continuum has no joint representation.
DephasingModel make_dephasing_qubit(const DephasingSpec& spec);

// Exact reduced states from the conserved-sector solution: the bath evolves
// under one displaced Hamiltonian per qubit population, and the coherence
// picks up the overlap of the two sector propagators.
struct ExactDephasingStates {
    Matrix rho_s;
    Matrix rho_b;
    double truncation_leakage = 0.0;  // worst top-level occupancy per sector
};
ExactDephasingStates exact_reduced_states(const DephasingModel& model,
                                          const Matrix& rho_s0, double tau);

// Closed-form ledger entries at time tau for a given initial qubit state.
// Bath energies and entropies are reported as shifts from their initial
// values. Everything is exact in lambda except ds_b, which is the leading
// thermal-response term.
struct DephasingThermo {
    double u_s = 0.0;
    double u_b_shift = 0.0;
    double u_chi = 0.0;
    double u_tot = 0.0;
    double s_s = 0.0;
    double s_b_shift = 0.0;
    double du_s = 0.0;
    double du_b = 0.0;
    double du_chi = 0.0;
    double dq_s = 0.0;
    double dq_b = 0.0;
    double dw_s = 0.0;
    double dw_b = 0.0;
    double ds_s = 0.0;
    double ds_b = 0.0;
    double coherence_magnitude = 0.0;
    double bloch_radius = 0.0;
    std::optional<double> t_pseudo_b;
    std::optional<double> t_ext_b;
};
DephasingThermo closed_form_thermo(const DephasingSpec& spec,
                                   const Matrix& rho_s0, double tau,
                                   const EnergySplit& split = {});
// Same bookkeeping but with caller-supplied kernels, so an independently
// integrated kernel set can be pushed through identical formulas.
DephasingThermo closed_form_thermo_from_kernels(const DephasingSpec& spec,
                                                const Matrix& rho_s0,
                                                const EnergySplit& split,
                                                const DephasingKernels& kernels);

// High-temperature late-time limit: pure dephasing at 4 pi lambda^2 / beta.
double markovian_dephasing_rate(const DephasingSpec& spec);
LindbladGenerator dephasing_generator(const DephasingSpec& spec);

}  // namespace corrthermo

#pragma once

#include <vector>

#include "corrthermo/linalg.hpp"

namespace corrthermo {

// One truncated bosonic mode coupled to the qubit.
struct BosonicMode {
    double omega = 0.0;
    Cplx coupling{0.0, 0.0};  // f_k
};

// Truncated multimode Fock space; every mode keeps levels 0..n_max.
class BathSpace {
  public:
    BathSpace(std::vector<BosonicMode> modes, int n_max);

    Index dim() const { return dim_; }
    int n_max() const { return n_max_; }
    int levels() const { return n_max_ + 1; }
    const std::vector<BosonicMode>& modes() const { return modes_; }

    // Annihilation operator of mode k embedded in the full bath space.
    const Matrix& lowering(std::size_t k) const { return lowering_[k]; }
    // sum_k omega_k a_k^dagger a_k
    const Matrix& hamiltonian() const { return h_b_; }

    // Truncated Gibbs state at inverse temperature beta.
    Matrix thermal_state(double beta) const;

  private:
    std::vector<BosonicMode> modes_;
    int n_max_;
    Index dim_;
    std::vector<Matrix> lowering_;
    Matrix h_b_;
};

// Single-mode annihilation operator on `levels` Fock levels.
Matrix mode_lowering(int levels);

// Moments of the truncated single-mode Gibbs state. On the cutoff space
// <a a^dagger> != <a^dagger a> + 1; both are needed for cutoff-consistent
// perturbation theory.
double thermal_occupation_truncated(double omega, double beta, int levels);
double thermal_antioccupation_truncated(double omega, double beta, int levels);

}  // namespace corrthermo

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "doctest.h"

#include "corrthermo/accounting.hpp"
#include "corrthermo/dynamics.hpp"
#include "corrthermo/scenario.hpp"

namespace testhelp {

using namespace corrthermo;

struct RandomSystem {
    CompositeLayout layout;
    BipartiteSystem system;
    Matrix rho_correlated;
    Matrix rho_product;
};

// Deterministic qubit-times-qutrit testbed with unit-norm local Hamiltonians
// and a scaled random Hermitian interaction.
inline RandomSystem random_system(std::uint64_t seed, Index dim_s = 2,
                                  Index dim_b = 3, double scale = 0.3) {
    ScenarioRng rng(seed);
    CompositeLayout layout(dim_s, dim_b);
    Matrix h_s = seeded_hermitian(dim_s, rng);
    Matrix h_b = seeded_hermitian(dim_b, rng);
    Matrix h_int = scale * seeded_hermitian(layout.total(), rng);
    Matrix rho_corr = seeded_density(layout.total(), rng);
    Matrix rho_prod =
        tensor_product(seeded_density(dim_s, rng), seeded_density(dim_b, rng));
    return RandomSystem{layout,
                        BipartiteSystem(Operator::hermitian(h_s, "H_S"),
                                        Operator::hermitian(h_b, "H_B"),
                                        Operator::hermitian(h_int, "H_int"),
                                        layout),
                        rho_corr, rho_prod};
}

// Limiting closed forms of the pure-dephasing decoherence kernel, derived
// independently of the library's quadrature:
//   zero-temperature:  Gamma = (1/4) ln(1 + tau^2/eps^2)
//   small cutoff:      Gamma ~ (1/4) ln(1 + tau^2/eps^2)
//                              + (1/2) ln( sinh(pi tau/beta) / (pi tau/beta) )
inline double gamma_vacuum(double tau, double eps) {
    return 0.25 * std::log(1.0 + tau * tau / (eps * eps));
}

inline double gamma_thermal_smallcutoff(double tau, double beta, double eps) {
    double x = M_PI * tau / beta;
    return gamma_vacuum(tau, eps) + 0.5 * std::log(std::sinh(x) / x);
}

}  // namespace testhelp

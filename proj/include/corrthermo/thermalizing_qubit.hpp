#pragma once

#include <array>
#include <functional>
#include <vector>

#include "corrthermo/accounting.hpp"
#include "corrthermo/bosons.hpp"
#include "corrthermo/dynamics.hpp"
#include "corrthermo/linalg.hpp"

namespace corrthermo {

// Qubit basis: index 0 = excited, index 1 = ground, so sigma_z = diag(1,-1)
// and the excited population is (1+z)/2 for Bloch component z.
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Matrix sigma_plus();   // |e><g|
Matrix sigma_minus();  // |g><e|

Matrix qubit_from_bloch(const std::array<double, 3>& bloch);
std::array<double, 3> bloch_vector(const Matrix& rho);

double planck_occupation(double omega, double beta);

// Qubit exchanging excitations with a bosonic bath:
//   H = (omega0/2) sigma_z + sum_k omega_k a_k^dag a_k
//       + lambda sum_k (conj(f_k) sigma_+ a_k + f_k sigma_- a_k^dag)
struct ExchangeQubitSpec {
    double omega0 = 1.0;
    double lambda = 0.1;
    double beta = 1.0;
    // Discrete bath, used by the joint simulation.
    std::vector<BosonicMode> modes;
    Index n_max = 1;
    // Continuum |f(omega)|^2, used by the weak-coupling description.
    std::function<double(double)> spectral_density;
    double spectral_decay = 1.0;  // exponential falloff scale of the density
};

// Ohmic default |f(omega)|^2 = omega * exp(-omega).
std::function<double(double)> ohmic_spectral_density(double decay = 1.0);

struct ExchangeQubitModel {
    ExchangeQubitSpec spec;
    BathSpace bath;
    BipartiteSystem system;
};

ExchangeQubitModel make_exchange_qubit(const ExchangeQubitSpec& spec);
Matrix thermal_bath_state(const ExchangeQubitModel& model);

// Weak-coupling constants: golden-rule emission rate, the principal-value
// frequency pull, the total relaxation rate, and the thermal occupation at
// the qubit frequency.
struct EmissionRates {
    double gamma = 0.0;
    double frequency_pull = 0.0;
    double gamma_tilde = 0.0;
    double occupation = 0.0;
};
EmissionRates emission_rates(const ExchangeQubitSpec& spec,
                             double pv_half_width = 0.0);

LindbladGenerator thermalizing_generator(const ExchangeQubitSpec& spec,
                                         const EmissionRates& rates);

// Closed-form weak-coupling trajectory of the Bloch vector.
std::array<double, 3> analytic_bloch(const ExchangeQubitSpec& spec,
                                     const EmissionRates& rates,
                                     const std::array<double, 3>& bloch0,
                                     double tau);
Matrix analytic_reduced_state(const ExchangeQubitSpec& spec,
                              const EmissionRates& rates,
                              const std::array<double, 3>& bloch0, double tau);

// moment integral M_p = int_0^tau s^p exp(i mu s) ds, stable near mu = 0.
Cplx phase_integral(double mu, double tau, int power);
// int_0^tau ds int_0^s ds' exp(i mu s) exp(i nu s'), stable near zeros.
Cplx double_phase_integral(double mu, double nu, double tau);

// Second-order short-time expansion of the joint state (exact on the
// truncated bath space up to the cubic term in lambda).
struct PerturbativeJointStates {
    Matrix rho_sb;
    Matrix rho_s;
    Matrix rho_b;
};
PerturbativeJointStates dyson_second_order(const ExchangeQubitModel& model,
                                           const Matrix& rho_s0, double tau);

// Late-time bath-side rates of the weak-coupling description, evaluated at a
// given instantaneous reduced state of the qubit.
struct LongTimeBathRates {
    double du_b = 0.0;
    double dq_b = 0.0;
    double ds_b = 0.0;
    double t_pseudo_b = 0.0;
};
LongTimeBathRates longtime_bath_rates(const ExchangeQubitSpec& spec,
                                      const EmissionRates& rates,
                                      const Matrix& rho_s);

// 1/T estimated from heat over entropy flow for a qubit with Bloch vector
// (x, y, z); exact when the state is diagonal.
double inverse_extended_temperature(double omega0,
                                    const std::array<double, 3>& bloch);

// Asymptotic 1/T of internal energy over entropy along relaxation, as a
// function of the initial Bloch vector.
double asymptotic_inverse_pseudo_temperature(
    const ExchangeQubitSpec& spec, const std::array<double, 3>& bloch0);

}  // namespace corrthermo

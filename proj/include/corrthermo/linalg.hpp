#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

#include "corrthermo/errors.hpp"

namespace corrthermo {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kStateTol = 1e-10;

// Index bookkeeping for a bipartite space S (x) B with the S factor first:
// flat = i_s * dim_b + i_b.
struct CompositeLayout {
    CompositeLayout(Index s, Index b);
    Index dim_s;
    Index dim_b;
    Index total() const { return dim_s * dim_b; }
    Index flat(Index i_s, Index i_b) const { return i_s * dim_b + i_b; }
};

enum class Subsystem { S, B };

// Dense square complex operator with a cached hermiticity classification.
class Operator {
  public:
    Operator() = default;
    explicit Operator(Matrix m);
    // As above but throws NonHermitianError when the check fails.
    static Operator hermitian(Matrix m, const char* what = "operator");

    Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    bool is_hermitian() const { return hermitian_; }

  private:
    Matrix mat_;
    bool hermitian_ = false;
};

bool is_hermitian(const Matrix& m, double tol = kHermitianTol);
void require_hermitian(const Matrix& m, const char* what,
                       double tol = kHermitianTol);
// Trace ~1, Hermitian, eigenvalues >= -tol. Throws StateValidationError.
void require_density_matrix(const Matrix& rho, const char* what,
                            double tol = kStateTol);

// Kronecker product A (x) B; throws DimensionError if the result would exceed
// config().max_total_dimension.
Matrix tensor_product(const Matrix& a, const Matrix& b);

Matrix identity(Index dim);

// Embed an S-local (resp. B-local) operator into the composite space.
Matrix embed_s(const Matrix& op_s, const CompositeLayout& layout);
Matrix embed_b(const Matrix& op_b, const CompositeLayout& layout);

Matrix partial_trace(const Matrix& op, const CompositeLayout& layout,
                     Subsystem keep);

// Weighted partial traces used for mean-field Hamiltonians:
//   contract_b(O, sigma_b) = Tr_B[(I (x) sigma_b) O]   (operator on S)
//   contract_s(O, sigma_s) = Tr_S[(sigma_s (x) I) O]   (operator on B)
Matrix contract_b(const Matrix& op, const CompositeLayout& layout,
                  const Matrix& sigma_b);
Matrix contract_s(const Matrix& op, const CompositeLayout& layout,
                  const Matrix& sigma_s);

struct SpectralDecomposition {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // columns; unitary
};

// Throws NonHermitianError on non-Hermitian input.
SpectralDecomposition hermitian_spectrum(const Matrix& h,
                                         double tol = kHermitianTol);

// f applied through the spectral decomposition: V f(diag) V^dagger.
Matrix apply_spectral(const SpectralDecomposition& spec,
                      const std::function<Cplx(double)>& f);

// rho -> U rho U^dagger with U = exp(-i H dt), H Hermitian.
Matrix evolve_unitary(const Matrix& rho, const Matrix& h, double dt);
Matrix evolve_unitary(const Matrix& rho, const SpectralDecomposition& spec,
                      double dt);

// -Tr[rho ln rho]; eigenvalues below config().entropy_clamp are dropped;
// eigenvalues below -1e-8 raise StateValidationError.
double von_neumann_entropy(const Matrix& rho);

// d/dtau of the von Neumann entropy: -Tr[rho_dot ln rho], evaluated in the
// eigenbasis of rho with the same clamp policy.
double entropy_rate(const Matrix& rho, const Matrix& rho_dot);

// Tr[rho (ln rho - ln sigma)]; +infinity when supp(rho) is not contained in
// supp(sigma) (within the clamp).
double relative_entropy(const Matrix& rho, const Matrix& sigma);

double trace_distance(const Matrix& a, const Matrix& b);
double purity(const Matrix& rho);

// exp(-beta H)/Z for Hermitian H.
Matrix gibbs_state(const Matrix& h, double beta);

}  // namespace corrthermo

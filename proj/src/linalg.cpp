#include "corrthermo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "corrthermo/config.hpp"

namespace corrthermo {

CompositeLayout::CompositeLayout(Index s, Index b) : dim_s(s), dim_b(b) {
    if (s < 2)
        throw DimensionError("composite layout needs dim_s >= 2, got " +
                             std::to_string(s));
    if (b < 1)
        throw DimensionError("composite layout needs dim_b >= 1, got " +
                             std::to_string(b));
    if (s * b > config().max_total_dimension)
        throw DimensionError("composite dimension " + std::to_string(s * b) +
                             " exceeds configured maximum " +
                             std::to_string(config().max_total_dimension));
}

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_hermitian(const Matrix& m, const char* what, double tol) {
    if (m.rows() != m.cols())
        throw NonHermitianError(std::string(what) + " is not square");
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol)
        throw NonHermitianError(std::string(what) +
                                " is not Hermitian (max deviation " +
                                std::to_string(dev) + ")");
}

void require_density_matrix(const Matrix& rho, const char* what, double tol) {
    if (rho.rows() != rho.cols())
        throw StateValidationError(std::string(what) + " is not square");
    double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol)
        throw StateValidationError(std::string(what) +
                                   " is not Hermitian (max deviation " +
                                   std::to_string(herm) + ")");
    double tr_err = std::abs(rho.trace() - Cplx(1.0, 0.0));
    if (tr_err > tol)
        throw StateValidationError(std::string(what) + " trace deviates by " +
                                   std::to_string(tr_err));
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho,
                                             Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -tol)
        throw StateValidationError(std::string(what) +
                                   " has negative eigenvalue " +
                                   std::to_string(min_eig));
}

Operator::Operator(Matrix m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
        throw DimensionError("operator matrix must be square");
    hermitian_ = corrthermo::is_hermitian(mat_, kHermitianTol);
}

Operator Operator::hermitian(Matrix m, const char* what) {
    require_hermitian(m, what);
    return Operator(std::move(m));
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    Index rows = a.rows() * b.rows();
    Index cols = a.cols() * b.cols();
    if (std::max(rows, cols) > config().max_total_dimension)
        throw DimensionError("tensor product dimension " +
                             std::to_string(std::max(rows, cols)) +
                             " exceeds configured maximum " +
                             std::to_string(config().max_total_dimension));
    Matrix out(rows, cols);
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

Matrix identity(Index dim) { return Matrix::Identity(dim, dim); }

Matrix embed_s(const Matrix& op_s, const CompositeLayout& layout) {
    if (op_s.rows() != layout.dim_s)
        throw DimensionError("embed_s: operator dimension mismatch");
    return tensor_product(op_s, identity(layout.dim_b));
}

Matrix embed_b(const Matrix& op_b, const CompositeLayout& layout) {
    if (op_b.rows() != layout.dim_b)
        throw DimensionError("embed_b: operator dimension mismatch");
    return tensor_product(identity(layout.dim_s), op_b);
}

Matrix partial_trace(const Matrix& op, const CompositeLayout& layout,
                     Subsystem keep) {
    if (op.rows() != layout.total() || op.cols() != layout.total())
        throw DimensionError("partial_trace: operator does not match layout");
    if (keep == Subsystem::S) {
        Matrix out = Matrix::Zero(layout.dim_s, layout.dim_s);
        for (Index i = 0; i < layout.dim_s; ++i)
            for (Index j = 0; j < layout.dim_s; ++j) {
                Cplx sum = 0.0;
                for (Index b = 0; b < layout.dim_b; ++b)
                    sum += op(layout.flat(i, b), layout.flat(j, b));
                out(i, j) = sum;
            }
        return out;
    }
    Matrix out = Matrix::Zero(layout.dim_b, layout.dim_b);
    for (Index i = 0; i < layout.dim_b; ++i)
        for (Index j = 0; j < layout.dim_b; ++j) {
            Cplx sum = 0.0;
            for (Index s = 0; s < layout.dim_s; ++s)
                sum += op(layout.flat(s, i), layout.flat(s, j));
            out(i, j) = sum;
        }
    return out;
}

Matrix contract_b(const Matrix& op, const CompositeLayout& layout,
                  const Matrix& sigma_b) {
    if (op.rows() != layout.total())
        throw DimensionError("contract_b: operator does not match layout");
    if (sigma_b.rows() != layout.dim_b)
        throw DimensionError("contract_b: weight does not match layout");
    // out(i,j) = sum_{b,b'} sigma_b(b,b') op((i,b'),(j,b))
    Matrix out = Matrix::Zero(layout.dim_s, layout.dim_s);
    for (Index i = 0; i < layout.dim_s; ++i)
        for (Index j = 0; j < layout.dim_s; ++j) {
            Cplx sum = 0.0;
            for (Index b = 0; b < layout.dim_b; ++b)
                for (Index bp = 0; bp < layout.dim_b; ++bp)
                    sum += sigma_b(b, bp) * op(layout.flat(i, bp),
                                               layout.flat(j, b));
            out(i, j) = sum;
        }
    return out;
}

Matrix contract_s(const Matrix& op, const CompositeLayout& layout,
                  const Matrix& sigma_s) {
    if (op.rows() != layout.total())
        throw DimensionError("contract_s: operator does not match layout");
    if (sigma_s.rows() != layout.dim_s)
        throw DimensionError("contract_s: weight does not match layout");
    Matrix out = Matrix::Zero(layout.dim_b, layout.dim_b);
    for (Index i = 0; i < layout.dim_b; ++i)
        for (Index j = 0; j < layout.dim_b; ++j) {
            Cplx sum = 0.0;
            for (Index s = 0; s < layout.dim_s; ++s)
                for (Index sp = 0; sp < layout.dim_s; ++sp)
                    sum += sigma_s(s, sp) * op(layout.flat(sp, i),
                                               layout.flat(s, j));
            out(i, j) = sum;
        }
    return out;
}

SpectralDecomposition hermitian_spectrum(const Matrix& h, double tol) {
    require_hermitian(h, "spectrum input", tol);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("eigensolver failed to converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

Matrix apply_spectral(const SpectralDecomposition& spec,
                      const std::function<Cplx(double)>& f) {
    Eigen::VectorXcd d(spec.eigenvalues.size());
    for (Index i = 0; i < d.size(); ++i) d(i) = f(spec.eigenvalues(i));
    return spec.eigenvectors * d.asDiagonal() * spec.eigenvectors.adjoint();
}

Matrix evolve_unitary(const Matrix& rho, const SpectralDecomposition& spec,
                      double dt) {
    Matrix u = apply_spectral(
        spec, [dt](double e) { return std::exp(Cplx(0.0, -e * dt)); });
    return u * rho * u.adjoint();
}

Matrix evolve_unitary(const Matrix& rho, const Matrix& h, double dt) {
    return evolve_unitary(rho, hermitian_spectrum(h), dt);
}

double von_neumann_entropy(const Matrix& rho) {
    require_hermitian(rho, "entropy input", kStateTol);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    double clamp = config().entropy_clamp;
    double s = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        double p = es.eigenvalues()(i);
        if (p < -1e-8)
            throw StateValidationError("entropy input has eigenvalue " +
                                       std::to_string(p));
        if (p > clamp) s -= p * std::log(p);
    }
    return s;
}

double entropy_rate(const Matrix& rho, const Matrix& rho_dot) {
    SpectralDecomposition spec = hermitian_spectrum(rho, kStateTol);
    Matrix in_basis =
        spec.eigenvectors.adjoint() * rho_dot * spec.eigenvectors;
    double clamp = config().entropy_clamp;
    double rate = 0.0;
    for (Index i = 0; i < spec.eigenvalues.size(); ++i) {
        double p = spec.eigenvalues(i);
        if (p > clamp) rate -= in_basis(i, i).real() * std::log(p);
    }
    return rate;
}

double relative_entropy(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows())
        throw DimensionError("relative_entropy: dimension mismatch");
    SpectralDecomposition sr = hermitian_spectrum(rho, kStateTol);
    SpectralDecomposition ss = hermitian_spectrum(sigma, kStateTol);
    double clamp = config().entropy_clamp;
    double value = 0.0;
    for (Index i = 0; i < sr.eigenvalues.size(); ++i) {
        double p = sr.eigenvalues(i);
        if (p > clamp) value += p * std::log(p);
    }
    // -Tr[rho ln sigma] = -sum_j ln(q_j) <v_j| rho |v_j>
    for (Index j = 0; j < ss.eigenvalues.size(); ++j) {
        double q = ss.eigenvalues(j);
        double weight =
            (ss.eigenvectors.col(j).adjoint() * rho * ss.eigenvectors.col(j))(0)
                .real();
        if (q > clamp) {
            value -= weight * std::log(q);
        } else if (weight > clamp) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return value;
}

double trace_distance(const Matrix& a, const Matrix& b) {
    Matrix d = a - b;
    require_hermitian(d, "trace_distance difference", kStateTol);
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

Matrix gibbs_state(const Matrix& h, double beta) {
    SpectralDecomposition spec = hermitian_spectrum(h);
    // Shift by the ground energy before exponentiating to avoid overflow.
    double e0 = spec.eigenvalues.minCoeff();
    Matrix unnorm = apply_spectral(spec, [beta, e0](double e) {
        return Cplx(std::exp(-beta * (e - e0)), 0.0);
    });
    return unnorm / unnorm.trace().real();
}

}  // namespace corrthermo

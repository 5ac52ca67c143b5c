#include "corrthermo/bosons.hpp"

#include <cmath>
#include <string>

#include "corrthermo/config.hpp"

namespace corrthermo {

Matrix mode_lowering(int levels) {
    if (levels < 1) throw DimensionError("mode needs at least one level");
    Matrix a = Matrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

namespace {

Matrix single_mode_thermal(double omega, double beta, int levels) {
    Eigen::VectorXd p(levels);
    for (int n = 0; n < levels; ++n) p(n) = std::exp(-beta * omega * n);
    p /= p.sum();
    return p.cast<Cplx>().asDiagonal();
}

}  // namespace

BathSpace::BathSpace(std::vector<BosonicMode> modes, int n_max)
    : modes_(std::move(modes)), n_max_(n_max) {
    if (modes_.empty()) throw DimensionError("bath needs at least one mode");
    if (n_max_ < 1) throw DimensionError("bath cutoff n_max must be >= 1");
    for (const auto& m : modes_)
        if (m.omega <= 0.0)
            throw DimensionError("mode frequency must be positive, got " +
                                 std::to_string(m.omega));
    Index levels = n_max_ + 1;
    dim_ = 1;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        if (dim_ * levels > config().max_total_dimension)
            throw DimensionError(
                "bath dimension exceeds configured maximum " +
                std::to_string(config().max_total_dimension));
        dim_ *= levels;
    }
    Matrix a = mode_lowering(int(levels));
    lowering_.reserve(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        Matrix op = Matrix::Identity(1, 1);
        for (std::size_t j = 0; j < modes_.size(); ++j)
            op = tensor_product(op, j == k ? a : identity(levels));
        lowering_.push_back(std::move(op));
    }
    h_b_ = Matrix::Zero(dim_, dim_);
    for (std::size_t k = 0; k < modes_.size(); ++k)
        h_b_ += modes_[k].omega * (lowering_[k].adjoint() * lowering_[k]);
}

Matrix BathSpace::thermal_state(double beta) const {
    if (beta <= 0.0)
        throw DimensionError("thermal state needs beta > 0");
    Matrix rho = Matrix::Identity(1, 1);
    for (const auto& m : modes_)
        rho = tensor_product(rho,
                             single_mode_thermal(m.omega, beta, levels()));
    return rho;
}

double thermal_occupation_truncated(double omega, double beta, int levels) {
    Matrix rho = single_mode_thermal(omega, beta, levels);
    Matrix a = mode_lowering(levels);
    return (rho * a.adjoint() * a).trace().real();
}

double thermal_antioccupation_truncated(double omega, double beta,
                                        int levels) {
    Matrix rho = single_mode_thermal(omega, beta, levels);
    Matrix a = mode_lowering(levels);
    return (rho * a * a.adjoint()).trace().real();
}

}  // namespace corrthermo

// linalg.hpp — Shared matrix aliases and small dense helpers

#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace rcpump {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Mat3 = Eigen::Matrix3cd;
using Op8 = Eigen::Matrix<cplx, 8, 8>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

// exp(-i K) for Hermitian K.
template <class M>
M expm_hermitian(const M& K) {
    Eigen::SelfAdjointEigenSolver<M> es(K);
    using Vec = typename Eigen::SelfAdjointEigenSolver<M>::RealVectorType;
    const Vec& w = es.eigenvalues();
    Eigen::Matrix<cplx, M::RowsAtCompileTime, 1> phase(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::exp(-kI * w(i));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

// General matrix exponential (scaling and squaring, Pade 13).
MatX expm(const MatX& A);

template <class M>
double unitarity_error(const M& U) {
    return (U.adjoint() * U - M::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

} // namespace rcpump

// floquet.cpp

#include "rcpump/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace rcpump {

namespace {

constexpr std::array<std::array<int, 3>, 4> kBlocks = {{{0, -1, -1}, {1, 2, 4}, {3, 5, 6}, {7, -1, -1}}};
constexpr std::array<int, 4> kBlockSize = {1, 3, 3, 1};

} // namespace

PeriodPropagation propagate_period(const HamiltonianFn& H, double omega, int n_t) {
    if (!(omega > 0.0)) throw std::invalid_argument("driving frequency must be positive");
    if (n_t < 4) throw std::invalid_argument("time grid needs at least 4 points");
    PeriodPropagation out;
    out.omega = omega;
    out.n_t = n_t;
    out.U.resize(n_t + 1);
    out.U[0] = Op8::Identity();
    const double dt = out.period() / n_t;
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    const double k2 = std::sqrt(3.0) / 12.0 * dt * dt;
    for (int j = 0; j < n_t; ++j) {
        const double t = j * dt;
        const Op8 H1 = H(t + c1 * dt);
        const Op8 H2 = H(t + c2 * dt);
        Op8 K = 0.5 * dt * (H1 + H2) + kI * k2 * (H1 * H2 - H2 * H1);
        K = 0.5 * (K + K.adjoint()).eval();
        out.U[j + 1] = expm_hermitian(K) * out.U[j];
        out.unitarity_error = std::max(out.unitarity_error, unitarity_error(out.U[j + 1]));
    }
    if (out.unitarity_error > 1e-10)
        throw ConvergenceError("propagator lost unitarity (" + std::to_string(out.unitarity_error) +
                               "); increase the time grid");
    return out;
}

double fold_quasienergy(double eps, double omega) {
    double e = std::remainder(eps, omega);  // in [-omega/2, omega/2]
    if (e <= -0.5 * omega + 1e-13 * omega) e += omega;
    return e;
}

FloquetBasis floquet_modes(const PeriodPropagation& prop) {
    FloquetBasis b;
    b.omega = prop.omega;
    b.n_t = prop.n_t;
    b.period_map = prop.U.back();
    const double T = prop.period();

    Op8 R0 = Op8::Zero();
    int col = 0;
    for (int blk = 0; blk < 4; ++blk) {
        const int m = kBlockSize[blk];
        MatX sub(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) sub(i, j) = b.period_map(kBlocks[blk][i], kBlocks[blk][j]);
        Eigen::ComplexSchur<MatX> schur(sub);
        const MatX& Q = schur.matrixU();
        const MatX& Tm = schur.matrixT();
        std::vector<double> eps(m);
        for (int i = 0; i < m; ++i) eps[i] = fold_quasienergy(-std::arg(Tm(i, i)) / T, b.omega);
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return eps[a] < eps[c]; });
        for (int i = 0; i + 1 < m; ++i) {
            const double gap = std::abs(std::remainder(eps[order[i + 1]] - eps[order[i]], b.omega));
            if (gap < 1e-8) b.degenerate = true;
        }
        for (int i : order) {
            VecX v = Q.col(i);
            Eigen::Index imax = 0;
            v.cwiseAbs().maxCoeff(&imax);
            v *= std::conj(v(imax)) / std::abs(v(imax));
            for (int r = 0; r < m; ++r) R0(kBlocks[blk][r], col) = v(r);
            b.quasienergy[col] = eps[i];
            b.particle_number[col] = blk;
            ++col;
        }
    }

    b.modes.resize(prop.n_t);
    for (int j = 0; j < prop.n_t; ++j) {
        const double t = T * j / prop.n_t;
        Op8 M = prop.U[j] * R0;
        for (int r = 0; r < 8; ++r) M.col(r) *= std::exp(kI * b.quasienergy[r] * t);
        b.modes[j] = M;
    }
    return b;
}

FloquetBasis solve_floquet(const TQDParams& p, int n_t) {
    p.validate();
    const auto H = [&p](double t) { return fock_lift(p, t); };
    return floquet_modes(propagate_period(H, p.driving.frequency, n_t));
}

FloquetBasis regauge(const FloquetBasis& basis, const std::array<double, 8>& phases) {
    FloquetBasis b = basis;
    for (auto& M : b.modes)
        for (int r = 0; r < 8; ++r) M.col(r) *= std::exp(kI * phases[r]);
    return b;
}

FloquetBasis shift_branch(const FloquetBasis& basis, int r, int m) {
    FloquetBasis b = basis;
    b.quasienergy[r] += m * b.omega;
    for (int j = 0; j < b.n_t; ++j) b.modes[j].col(r) *= std::exp(kI * (m * b.omega * b.time(j)));
    return b;
}

namespace {

HarmonicOperator decompose_samples(const std::vector<Op8>& samples, const FloquetBasis& basis, int n_h) {
    const int n_t = basis.n_t;
    if (2 * n_h + 1 > n_t) throw ConvergenceError("harmonic cutoff exceeds time-grid resolution; increase n_t");
    HarmonicOperator h;
    h.omega = basis.omega;
    h.n_h = n_h;
    h.quasienergy = basis.quasienergy;
    h.coeff.assign(2 * n_h + 1, Op8::Zero());
    std::vector<cplx> phase(n_t);
    for (int n = -n_h; n <= n_h; ++n) {
        for (int j = 0; j < n_t; ++j) phase[j] = std::polar(1.0 / n_t, -kTwoPi * n * j / n_t);
        Op8 acc = Op8::Zero();
        for (int j = 0; j < n_t; ++j) acc += phase[j] * samples[j];
        h.coeff[n + n_h] = acc;
    }
    double res = 0.0;
    for (int j = 0; j < n_t; ++j) {
        Op8 rec = Op8::Zero();
        for (int n = -n_h; n <= n_h; ++n) rec += std::polar(1.0, kTwoPi * n * j / n_t) * h.coeff[n + n_h];
        res = std::max(res, (rec - samples[j]).cwiseAbs().maxCoeff());
    }
    h.residual = res;
    return h;
}

std::vector<Op8> project_samples(const Op8& S, const FloquetBasis& basis) {
    std::vector<Op8> out(basis.n_t);
    for (int j = 0; j < basis.n_t; ++j) out[j] = basis.modes[j].adjoint() * S * basis.modes[j];
    return out;
}

} // namespace

HarmonicOperator decompose_operator(const Op8& S, const FloquetBasis& basis, int n_h) {
    if (n_h < 0) throw std::invalid_argument("harmonic cutoff must be non-negative");
    return decompose_samples(project_samples(S, basis), basis, n_h);
}

HarmonicOperator decompose_operator_adaptive(const Op8& S, const FloquetBasis& basis, double tol, int max_n_h) {
    const auto samples = project_samples(S, basis);
    max_n_h = std::min(max_n_h, (basis.n_t - 1) / 2);
    HarmonicOperator h;
    for (int n_h = 8;; n_h *= 2) {
        h = decompose_samples(samples, basis, std::min(n_h, max_n_h));
        if (h.residual < tol) return h;
        if (n_h >= max_n_h)
            throw ConvergenceError("harmonic residual " + std::to_string(h.residual) + " above tolerance at n_h=" +
                                   std::to_string(h.n_h) + "; increase n_h or the time grid");
    }
}

} // namespace rcpump

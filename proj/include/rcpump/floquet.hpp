// floquet.hpp — Floquet modes of the driven TQD and harmonic decomposition of
// system operators in the Floquet basis.
//
// Modes are built stroboscopically: the one-period propagator U(T) is
// diagonalized and |r(t_j)> = exp(i eps_r t_j) U(t_j) |r(0)> on a uniform grid
// of n_t points per period. Quasienergies are folded into (-omega/2, omega/2].

#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rcpump/hamiltonian.hpp"
#include "rcpump/linalg.hpp"

namespace rcpump {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using HamiltonianFn = std::function<Op8(double)>;

struct PeriodPropagation {
    double omega{1.0};
    int n_t{0};
    std::vector<Op8> U;  // U(t_j) for j = 0..n_t; U.back() is the monodromy U(T)
    double unitarity_error{0.0};

    double period() const { return kTwoPi / omega; }
};

// Fourth-order Magnus steps (two Gauss points) between grid points; each step
// is an exact exponential of a Hermitian generator. Throws ConvergenceError if
// any U(t_j) is non-unitary beyond 1e-10.
PeriodPropagation propagate_period(const HamiltonianFn& H, double omega, int n_t);

inline constexpr int kDefaultGrid = 1024;

struct FloquetBasis {
    double omega{1.0};
    int n_t{0};
    std::array<double, 8> quasienergy{};
    std::array<int, 8> particle_number{};
    std::vector<Op8> modes;  // modes[j].col(r) = |r(t_j)>, j in [0, n_t)
    Op8 period_map = Op8::Identity();
    bool degenerate{false};

    double period() const { return kTwoPi / omega; }
    double time(int j) const { return period() * j / n_t; }
};

double fold_quasienergy(double eps, double omega);

FloquetBasis floquet_modes(const PeriodPropagation& prop);

FloquetBasis solve_floquet(const TQDParams& p, int n_t = kDefaultGrid);

// Same physical basis with |r> -> exp(i phase_r)|r>.
FloquetBasis regauge(const FloquetBasis& basis, const std::array<double, 8>& phases);
// Same physical basis with eps_r -> eps_r + m omega and |r(t)> -> exp(i m omega t)|r(t)>.
FloquetBasis shift_branch(const FloquetBasis& basis, int r, int m);

struct HarmonicOperator {
    double omega{1.0};
    int n_h{0};
    std::array<double, 8> quasienergy{};
    std::vector<Op8> coeff;  // coeff[n + n_h](k, l) = s_{k,l,n}
    double residual{0.0};    // max reconstruction error on the grid

    cplx s(int k, int l, int n) const { return coeff[n + n_h](k, l); }
    // Delta_{k,l,n} = eps_k - eps_l + n omega
    double transition(int k, int l, int n) const { return quasienergy[k] - quasienergy[l] + n * omega; }
};

// s_{k,l,n} = (1/T) int_0^T <k(t)|S|l(t)> exp(-i n omega t) dt, |n| <= n_h.
HarmonicOperator decompose_operator(const Op8& S, const FloquetBasis& basis, int n_h);

// Raises n_h until the reconstruction residual drops below tol. Throws
// ConvergenceError (advising a larger n_h or n_t) when max_n_h is not enough.
HarmonicOperator decompose_operator_adaptive(const Op8& S, const FloquetBasis& basis, double tol = 1e-8,
                                             int max_n_h = 256);

} // namespace rcpump

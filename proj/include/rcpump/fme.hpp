// fme.hpp — Non-secular Floquet master equation for the TQD coupled to flat
// residual reservoirs at the two reaction coordinates, with a counting field on
// the left reservoir, solved for its periodic long-time state in the harmonic
// domain.
//
// Density matrices conserve the total particle number block structure, so the
// generator acts on the 20-dimensional space of block-diagonal 8x8 matrices
// (pairs (a, b) of Fock states with equal particle number).

#pragma once

#include <array>
#include <vector>

#include "rcpump/fcs.hpp"
#include "rcpump/floquet.hpp"
#include "rcpump/hamiltonian.hpp"
#include "rcpump/model.hpp"

namespace rcpump {

namespace block {

inline constexpr int kDim = 20;

struct Pair {
    int row;
    int col;
};

const std::array<Pair, kDim>& pairs();
int index(int row, int col);  // -1 when the pair mixes particle numbers

VecX vec(const Op8& rho);
Op8 unvec(const VecX& v);
const VecX& trace_row();

// Matrix of rho -> A rho B on the block space.
MatX sandwich(const Op8& A, const Op8& B);

} // namespace block

struct Reservoirs {
    ReservoirSpec left;
    ReservoirSpec right;

    const ReservoirSpec& operator[](Lead l) const { return l == Lead::Left ? left : right; }
};

// Equal temperature and chemical potential on both sides.
Reservoirs equal_reservoirs(double beta, double mu);

// Dissipative operators of one residual reservoir attached to an RC site. With
// s_{k,l,n} the harmonics of d_nu and E = -(eps_k - eps_l + n omega) the energy
// of the exchanged electron,
//   absorb(t) = sum J(E) f(E)/2     s_{k,l,n} e^{i n omega t} |k(t)><l(t)|
//   emit(t)   = sum J(E) (1-f(E))/2 s_{k,l,n} e^{i n omega t} |k(t)><l(t)|
// and the *_energy variants carry an extra factor E. Secular rates collect
// sum_n J(E) f(E) |s_{k,l,n}|^2 (and 1-f) per mode pair.
struct LeadRates {
    Lead lead{Lead::Left};
    Op8 d;
    std::vector<Op8> absorb, emit, absorb_energy, emit_energy;
    Eigen::Matrix<double, 8, 8> secular_in, secular_out, secular_in_energy, secular_out_energy;
    int harmonics{0};
    double decomposition_residual{0.0};
};

struct DressedRates {
    FloquetBasis basis;
    std::array<LeadRates, 2> leads;
    std::vector<Op8> hamiltonian;  // H(t_j)

    const LeadRates& operator[](Lead l) const { return leads[static_cast<int>(l)]; }
};

DressedRates build_dressed_rates(const FloquetBasis& basis, const TQDParams& p, const Reservoirs& res,
                                 double harmonic_tol = 1e-8);

struct HarmonicSeries {
    double omega{1.0};
    int K{0};
    std::vector<MatX> c;  // c[k + K]
    double residual{0.0};

    MatX at(double t) const;
    const MatX& operator[](int k) const { return c[k + K]; }
};

// Fourier coefficients of grid samples (uniform grid over one period), kept up
// to the smallest K whose reconstruction error is below tol (relative to the
// largest sample), capped at max_K.
HarmonicSeries fourier_series(const std::vector<MatX>& samples, double omega, double tol, int max_K);

struct LiouvillianHarmonics {
    double omega{1.0};
    bool secular{false};
    HarmonicSeries L;
    std::array<HarmonicSeries, 2> jump_in, jump_out, energy_in, energy_out;

    int K() const { return L.K; }
    // L(t) + (e^{i xi} - 1) J_in,L(t) + (e^{-i xi} - 1) J_out,L(t)
    MatX generator(double t, double xi) const;
    CountingGenerator counting(Lead lead = Lead::Left) const;
};

struct LiouvillianOptions {
    bool secular{false};
    double tol{1e-10};
    int max_harmonics{160};
};

LiouvillianHarmonics build_liouvillian(const DressedRates& rates, const LiouvillianOptions& opt = {});

// Generator samples on the Floquet grid before Fourier analysis.
struct GeneratorSamples {
    std::vector<MatX> L;
    std::array<std::vector<MatX>, 2> jump_in, jump_out, energy_in, energy_out;
};
GeneratorSamples sample_generator(const DressedRates& rates, bool secular);

struct PeriodicState {
    double omega{1.0};
    int N{0};
    std::vector<VecX> rho;  // rho[n + N], block vectors
    double tail_norm{0.0};
    double hermiticity_error{0.0};
    double min_population{0.0};  // smallest eigenvalue of rho(t) on the grid

    VecX at(double t) const;
    Op8 density(double t) const { return block::unvec(at(t)); }
    const VecX& operator[](int n) const { return rho[n + N]; }
};

// Harmonic balance i n omega rho_n = sum_k L_k rho_{n-k}, |n| <= N, with the
// vacuum-population equation of n = 0 replaced by Tr rho_0 = 1. Banded LU.
PeriodicState solve_periodic_state(const LiouvillianHarmonics& L, int N, int n_check = 256);

// Doubles N from max(16, 2K) until the tail norm drops below tail_tol.
PeriodicState solve_periodic_state_adaptive(const LiouvillianHarmonics& L, double tail_tol = 1e-9, int max_N = 512,
                                            int n_check = 256);

struct CurrentTrace {
    std::vector<double> t;
    std::vector<double> value;
    double integral{0.0};  // over one period
};

// Electrons (or energy) per unit time leaving reservoir `lead` into the system.
CurrentTrace matter_current(const PeriodicState& rho, const LiouvillianHarmonics& L, Lead lead, int n_grid = 512);
CurrentTrace energy_current(const PeriodicState& rho, const LiouvillianHarmonics& L, Lead lead, int n_grid = 512);

struct FMEOptions {
    int n_t{kDefaultGrid};
    double harmonic_tol{1e-8};
    LiouvillianOptions liouvillian{};
    double tail_tol{1e-9};
    int max_state_harmonics{512};
    int fixed_state_harmonics{0};  // > 0 disables the adaptive search
    bool noise{false};
    StepControl noise_control{};
    int noise_grid{256};
};

struct FMEResult {
    double Q{0.0};        // charge per period leaving the left reservoir
    double Q_right{0.0};  // charge per period leaving the right reservoir
    double dQ2{0.0};      // only when noise is requested
    double energy_left{0.0};
    double energy_right{0.0};
    double tail_norm{0.0};
    double min_population{0.0};
    double hermiticity_error{0.0};
    int state_harmonics{0};
    int generator_harmonics{0};
};

FMEResult run_fme(const TQDParams& p, const Reservoirs& res, const FMEOptions& opt = {});

} // namespace rcpump

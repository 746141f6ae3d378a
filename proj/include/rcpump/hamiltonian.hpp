// hamiltonian.hpp — Driven triple-quantum-dot (dot plus two reaction coordinates)
// as a 3x3 single-particle matrix and as an 8x8 Fock-space operator.
//
// Single-particle basis order: (d_L, d, d_R).
// Fock basis: occupation bitstrings (n_L, n, n_R), index = 4 n_L + 2 n + n_R,
// Jordan-Wigner string ordered L -> center -> R.

#pragma once

#include <array>

#include "rcpump/linalg.hpp"
#include "rcpump/model.hpp"

namespace rcpump {

enum class Site { Left = 0, Center = 1, Right = 2 };

struct TQDParams {
    DrivingProtocol driving;
    RCParameters rc_left;
    RCParameters rc_right;
    double energy_bias{0.0};  // eps_R - eps_L
    // Sign of the dot-RC hopping in the 3x3 matrix. -1 reproduces the printed
    // matrix; +1 is the gauge d -> -d. Observables do not depend on it.
    double hopping_sign{-1.0};

    void validate() const;
};

// Lorentzian reservoirs centred at eps0 -/+ bias/2 with equal width, mapped to
// RCs of coupling rc_coupling and flat residual density 2*width.
TQDParams make_tqd(const DrivingProtocol& drive, double rc_coupling, double width, double bias);

struct DriveValues {
    double dot_energy;
    double coupling_left;
    double coupling_right;
};

DriveValues driving_eval(const TQDParams& p, double t);

Mat3 tqd_matrix(const TQDParams& p, double t);

namespace fock {

inline constexpr int kDim = 8;

int occupation(int state, Site site);
int particle_number(int state);
const Op8& annihilation(Site site);
const Op8& number_operator();

// sum_ij h_ij a_i^dagger a_j
Op8 lift(const Mat3& h);

} // namespace fock

Op8 fock_lift(const TQDParams& p, double t);

} // namespace rcpump

// oracle.hpp — Exact dynamics of the full quadratic model: each reservoir is
// discretized into N_k levels and the single-particle density matrix
// G_nm = <a_m^dagger a_n> of system plus baths is propagated, dG/dt = -i[h(t), G].
//
// Two representations of the same physics are available: the original dot
// coupled to two structured reservoirs with driven tunnelling amplitudes, and
// the triple dot (dot + reaction coordinates) coupled to flat residual
// reservoirs. In both, the time dependence of h(t) is confined to a
// three-dimensional subspace, so a Strang step needs the static eigenbasis once
// and only rank-3 updates afterwards.

#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rcpump/fme.hpp"
#include "rcpump/hamiltonian.hpp"
#include "rcpump/linalg.hpp"
#include "rcpump/model.hpp"

namespace rcpump {

// Uniform levels eps_k on [center - W, center + W] (midpoint rule),
// t_k = sqrt(J(eps_k) d_eps / 2 pi).
struct DiscretizedBath {
    std::vector<double> energy;
    std::vector<double> coupling;
    double spacing{0.0};

    int size() const { return static_cast<int>(energy.size()); }
    double coupling_weight() const;  // sum_k t_k^2
    double revival_time() const { return kTwoPi / spacing; }
};

DiscretizedBath discretize(const SpectralDensity& sd, int n_k, double center, double half_width);

// Reservoir nu is the set of sites `reservoir`; it is attached to the rest of
// the model only through h_{k,site}(t) = modulation(t) * coupling_k.
struct Contact {
    Lead lead{Lead::Left};
    int site{0};
    std::vector<int> reservoir;
    Eigen::VectorXd coupling;  // length n, supported on the reservoir
    std::function<double(double)> modulation;
};

// h(t) = h_static + frame * drive(t) * frame^T with orthonormal frame columns.
struct QuadraticModel {
    Eigen::MatrixXd h_static;
    Eigen::MatrixXd frame;
    std::function<Eigen::MatrixXd(double)> drive;
    std::array<Contact, 2> contacts;
    std::vector<int> system_sites;
    Eigen::VectorXd initial_occupation;  // diagonal of G(0)
    double period{1.0};
    double revival_time{0.0};  // 2 pi / (finest level spacing)

    int size() const { return static_cast<int>(h_static.rows()); }
    Eigen::MatrixXd hamiltonian(double t) const;
};

struct OracleOptions {
    int n_k{400};
    double original_half_width{4.0};  // around each Lorentzian centre
    double residual_half_width{8.0};  // around the chemical potential
    int steps_per_period{256};
    int relaxation_periods{20};
};

// Dot with the Lorentzian reservoirs that map onto the triple dot
// (Gamma = 2 lambda^2 / delta, centred at the RC energies).
QuadraticModel original_model(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt);
// Triple dot with flat residual reservoirs; the RCs start empty. Reservoir nu
// is the RC together with its residual levels, so the counted current is the
// dot-RC bond current, the same observable as in the original model.
QuadraticModel mapped_model(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt);

struct OracleRun {
    double Q{0.0};               // electrons leaving the left reservoir over the measured period
    double Q_right{0.0};
    double Q_symmetric{0.0};     // (Q - Q_right) / 2, insensitive to charge stored in the system
    double Q_integrated{0.0};    // same from the integrated left current
    std::vector<double> t;       // measured period, relative to its start
    std::array<std::vector<double>, 2> current;  // I_nu(t), positive = leaving bath nu
    std::vector<double> system_occupation;       // total <N_sys>(t)
    double trace_drift{0.0};
    double hermiticity_error{0.0};
    double min_eigenvalue{0.0};
    double max_eigenvalue{0.0};
    double conservation_error{0.0};  // max |I_L + I_R - dN_sys/dt| (finite differences)
    double horizon{0.0};
    double revival_time{0.0};
};

// Thermal baths and the initial system occupation, then relaxation_periods + 1
// periods with a Strang splitting of static and driven parts. Throws
// std::runtime_error if the horizon exceeds half the revival time.
OracleRun run_oracle(const QuadraticModel& m, const OracleOptions& opt);

struct OracleComparison {
    OracleRun original;
    OracleRun mapped;
    double max_current_deviation{0.0};  // max_t |I_L^orig - I_L^mapped| over the measured period
    double relative_charge_deviation{0.0};  // on Q_symmetric
};

OracleComparison compare_representations(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt = {});

// Convenience: mapped representation only.
OracleRun run_mapped_oracle(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt = {});

} // namespace rcpump

// fcs.hpp — Full counting statistics for periodically driven linear generators.
//
// A CountingGenerator supplies, at any time t, the full generator L(t) at zero
// counting field together with the counted jump parts J_in(t) and J_out(t).
// With the field attached,
//     L(xi, t) = L(t) + (e^{i xi} - 1) J_in(t) + (e^{-i xi} - 1) J_out(t),
// so J'(t) = J_in - J_out and J''(t) = J_in + J_out. One jump "in" moves one
// electron out of the counted reservoir into the system.
//
// All propagation uses fourth-order Magnus exponential steps, which are exact
// for frozen generators and therefore insensitive to stiffness.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rcpump/linalg.hpp"

namespace rcpump {

struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeneratorSample {
    MatX L;
    MatX jump_in;
    MatX jump_out;
};

struct CountingGenerator {
    int dim{0};
    double omega{1.0};
    std::function<GeneratorSample(double)> at;
    VecX trace;  // Tr x = trace.transpose() * x

    double period() const { return kTwoPi / omega; }
    cplx trace_of(const VecX& x) const { return (trace.transpose() * x)(0); }
    MatX counting_matrix(double t, double xi) const;
};

struct StepControl {
    double rel_tol{1e-10};     // local error per step, relative to the propagator norm
    double initial_step{0.0};  // 0: period / 64
    double min_step{0.0};      // 0: period * 1e-12
    std::int64_t max_steps{50'000'000};
};

// Evolution operator of z' = A(t) z from t0 to t1 with adaptive step doubling.
// `step` carries the step size between calls; 0 lets the controller choose.
MatX propagate_adaptive(const std::function<MatX(double)>& A, double t0, double t1, const StepControl& ctl,
                        double& step, std::int64_t* steps_taken = nullptr);

// Same with n fixed steps.
MatX propagate_fixed(const std::function<MatX(double)>& A, double t0, double t1, int n);

struct CumulantRecord {
    std::vector<double> t;        // grid t_j = j T / n, j = 0..n
    std::vector<double> current;  // I(t_j) = Tr J' rho
    std::vector<double> noise;    // S(t_j) = Tr J'' rho + 2 Tr J' X
    std::vector<VecX> rho;
    std::vector<VecX> aux;        // traceless X(t_j)
    double Q{0.0};                // integral of I over one period
    double dQ2{0.0};              // integral of S over one period
    double trace_drift{0.0};      // max |Tr X| before projection
    double period_residual{0.0};  // ||X(T) - X(0)||
    std::int64_t steps{0};
};

// Periodic regime with a prescribed periodic state rho(t): X' = L X + (J' - I) rho,
// X(0) chosen as the periodic fixed point of the affine period map.
CumulantRecord cumulants_periodic(const CountingGenerator& gen, const std::function<VecX(double)>& rho, int n_grid,
                                  const StepControl& ctl = {});

// Same quantities from the linear system (rho, Y) with Y = d rho(xi) / d(i xi):
// computes the periodic state itself, then X = Y - (Tr Y) rho.
CumulantRecord cumulants_joint(const CountingGenerator& gen, int n_grid, const StepControl& ctl = {});

// X(t) from X(0) = X0 at the requested times (ascending, starting at >= 0).
std::vector<VecX> propagate_auxiliary(const CountingGenerator& gen, const std::function<VecX(double)>& rho,
                                      const VecX& X0, const std::vector<double>& times, const StepControl& ctl = {});

// Exact mean and variance of the transferred charge on [0, horizon] from an
// initial state rho0, obtained from the first two derivatives of rho(xi, t).
struct FiniteHorizon {
    double mean{0.0};
    double variance{0.0};
};
FiniteHorizon finite_horizon_cumulants(const CountingGenerator& gen, const VecX& rho0, double horizon,
                                       const StepControl& ctl = {});

// Dominant eigenvalue of the one-period propagator of L(xi, t) with n fixed
// steps, returned as its complex logarithm (cumulant generating rate per period).
cplx log_generating_rate(const CountingGenerator& gen, double xi, int n_steps);

// Cumulants per period from central finite differences of log_generating_rate.
struct FiniteDifferenceCumulants {
    double Q{0.0};
    double dQ2{0.0};
};
FiniteDifferenceCumulants finite_difference_cumulants(const CountingGenerator& gen, double h, int n_steps);

// Trajectory sampling for classical (diagonal) generators. Jumps are drawn by
// thinning against a rate bound sampled over one period.
struct MonteCarloResult {
    double mean_rate{0.0};
    double mean_rate_error{0.0};
    double variance{0.0};  // Var(n) over the horizon
    double variance_error{0.0};
    double variance_rate{0.0};
    double variance_rate_error{0.0};
    double horizon{0.0};
    int samples{0};
    std::uint64_t seed{0};
};
MonteCarloResult mc_trajectory_oracle(const CountingGenerator& gen, const VecX& p0, double horizon, int n_samples,
                                      std::uint64_t seed);

// Trapezoid rule on a uniform grid including both endpoints.
double trapezoid_uniform(const std::vector<double>& y, double dt);

} // namespace rcpump

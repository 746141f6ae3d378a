// test_oracle.cpp — discretized reservoirs and exact density-matrix propagation

#include "doctest.h"

#include <cmath>

#include "rcpump/oracle.hpp"

using namespace rcpump;

namespace {

TQDParams still_point(double lambda, double bias, double frequency = 0.1) {
    DrivingProtocol d;
    d.frequency = frequency;
    d.dot_amplitude = 0.0;
    d.amp_left = 0.0;
    d.amp_right = 0.0;
    return make_tqd(d, lambda, 0.05, bias);
}

// exact weight of a Lorentzian inside [c - W, c + W], divided by 2 pi
double window_weight(double gamma, double delta, double W) { return gamma * delta * std::atan(W / delta) / kPi; }

} // namespace

TEST_CASE("bath discretization") {
    const auto sd = SpectralDensity::lorentzian(2.5, 0.05, 1.0);
    const auto b = discretize(sd, 400, 1.0, 2.0);
    CHECK(b.size() == 400);
    CHECK(b.spacing == doctest::Approx(0.01));
    CHECK(b.energy.front() == doctest::Approx(-0.995));
    CHECK(b.revival_time() == doctest::Approx(kTwoPi / 0.01));
    // total weight approaches lambda^2 = 0.0625 up to the tails outside the window
    CHECK(std::abs(b.coupling_weight() - 0.0625) / 0.0625 < 0.02);

    // midpoint rule: second-order convergence to the windowed integral
    const double exact = window_weight(2.5, 0.05, 2.0);
    const double e1 = std::abs(discretize(sd, 100, 1.0, 2.0).coupling_weight() - exact);
    const double e2 = std::abs(discretize(sd, 200, 1.0, 2.0).coupling_weight() - exact);
    CHECK(e2 < e1 / 3.0);

    const auto none = discretize(SpectralDensity::flat(0.0), 50, 0.0, 1.0);
    for (double t : none.coupling) CHECK(t == 0.0);
    CHECK_THROWS_AS(discretize(sd, 0, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(discretize(sd, 10, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("model layout") {
    OracleOptions opt;
    opt.n_k = 40;
    const auto p = still_point(0.25, 1.0);
    const auto res = equal_reservoirs(3.3, 1.0);
    const auto orig = original_model(p, res, opt);
    const auto map = mapped_model(p, res, opt);
    CHECK(orig.size() == 81);
    CHECK(map.size() == 83);
    for (const auto* m : {&orig, &map}) {
        CHECK((m->frame.transpose() * m->frame - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
        const Eigen::MatrixXd h = m->hamiltonian(0.3);
        CHECK((h - h.transpose()).norm() < 1e-14);
    }
    // original: the dot couples to the discretized Lorentzian of its RC
    const auto bath = discretize(SpectralDensity::lorentzian(2.5, 0.05, 0.5), 40, 0.5, opt.original_half_width);
    CHECK(orig.contacts[0].coupling.squaredNorm() == doctest::Approx(bath.coupling_weight()).epsilon(1e-14));
    // mapped: the triple-dot block is the 3x3 matrix
    const Mat3 tqd = tqd_matrix(p, 0.3);
    CHECK((map.hamiltonian(0.3).topLeftCorner(3, 3) - tqd.real()).norm() < 1e-14);
    CHECK(map.initial_occupation(0) == 0.0);
    CHECK(map.initial_occupation(2) == 0.0);
}

TEST_CASE("horizon beyond half the revival time is refused") {
    OracleOptions opt;
    opt.n_k = 20;
    opt.relaxation_periods = 20;
    const auto p = still_point(0.25, 0.0, 0.1);
    CHECK_THROWS_AS(run_mapped_oracle(p, equal_reservoirs(3.3, 1.0), opt), std::runtime_error);
}

TEST_CASE("uncoupled dot keeps its initial state") {
    OracleOptions opt;
    opt.n_k = 60;
    opt.relaxation_periods = 2;
    opt.steps_per_period = 32;
    DrivingProtocol d;
    d.frequency = 1.9;
    d.dot_amplitude = 2.5;
    d.phase = 0.4;
    const auto p = make_tqd(d, 0.0, 0.05, 1.0);
    const auto run = run_oracle(original_model(p, equal_reservoirs(3.3, 1.0), opt), opt);
    CHECK(std::abs(run.Q) < 1e-13);
    CHECK(std::abs(run.Q_right) < 1e-13);
    for (double n : run.system_occupation) CHECK(std::abs(n) < 1e-13);
    for (int l = 0; l < 2; ++l)
        for (double i : run.current[l]) CHECK(std::abs(i) < 1e-13);
}

TEST_CASE("weak coupling: the dot thermalizes and carries no current") {
    OracleOptions opt;
    opt.n_k = 400;
    opt.original_half_width = 2.0;
    opt.relaxation_periods = 3;
    opt.steps_per_period = 128;
    const auto res = equal_reservoirs(3.3, 0.5);
    const auto run = run_oracle(original_model(still_point(0.02, 0.0), res, opt), opt);
    const double f = fermi(1.0, res.left);
    CHECK(run.system_occupation.back() == doctest::Approx(f).epsilon(0.02));
    CHECK(std::abs(run.Q) < 1e-3);
    CHECK(std::abs(run.Q_symmetric) < 1e-3);

    CHECK(run.trace_drift < 1e-10);
    CHECK(run.hermiticity_error < 1e-12);
    CHECK(run.min_eigenvalue > -1e-10);
    CHECK(run.max_eigenvalue < 1.0 + 1e-10);
}

TEST_CASE("static bias: both representations carry the same current") {
    OracleOptions opt;
    opt.n_k = 600;
    opt.original_half_width = 4.0;
    opt.residual_half_width = 4.0;
    opt.relaxation_periods = 6;
    opt.steps_per_period = 64;
    Reservoirs res = equal_reservoirs(3.3, 1.0);
    res.left.mu = 1.5;
    res.right.mu = 0.5;
    const auto p = still_point(0.25, 0.0, 0.2);
    const auto orig = run_oracle(original_model(p, res, opt), opt);
    const auto map = run_oracle(mapped_model(p, res, opt), opt);
    CHECK(orig.Q_symmetric > 0.05);  // electrons leave the reservoir with the higher chemical potential
    CHECK(map.Q_symmetric == doctest::Approx(orig.Q_symmetric).epsilon(0.02));
    for (const auto* r : {&orig, &map}) {
        CHECK(r->Q_integrated == doctest::Approx(r->Q).epsilon(1e-2));
        CHECK(r->conservation_error < 1e-2 * std::abs(r->current[0][0]) + 1e-6);
        CHECK(r->trace_drift < 1e-9);
    }
}

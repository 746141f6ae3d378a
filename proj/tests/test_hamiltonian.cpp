// test_hamiltonian.cpp — TQD matrices and the Fock-space lift

#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rcpump/hamiltonian.hpp"

using namespace rcpump;

namespace {

DrivingProtocol fig2_drive(double phase) {
    DrivingProtocol d;
    d.frequency = 1.9;
    d.dot_amplitude = 2.5;
    d.phase = phase;
    return d;
}

Op8 commutator(const Op8& a, const Op8& b) { return a * b - b * a; }

} // namespace

TEST_CASE("driving values") {
    auto p = make_tqd(fig2_drive(0.7), 0.25, 0.05, 1.0);
    const double T = p.driving.period();
    auto v = driving_eval(p, T / 4);
    CHECK(v.coupling_left == doctest::Approx(0.25));
    CHECK(v.coupling_right == doctest::Approx(0.25));
    CHECK(v.dot_energy == doctest::Approx(1.0 + 2.5 * std::sin(0.7)));
    p.driving.phase_sign = 1.0;
    CHECK(driving_eval(p, T / 4).dot_energy == doctest::Approx(1.0 - 2.5 * std::sin(0.7)));

    p.driving.phase = 0.0;
    CHECK(driving_eval(p, 0.0).dot_energy == doctest::Approx(3.5));

    p.driving.dot_amplitude = p.driving.amp_left = p.driving.amp_right = 0.0;
    for (double t : {0.0, 0.3, 1.7}) {
        v = driving_eval(p, t);
        CHECK(v.dot_energy == 1.0);
        CHECK(v.coupling_left == 0.25);
        CHECK(v.coupling_right == 0.25);
    }
}

TEST_CASE("RC energies follow the bias") {
    const auto p = make_tqd(fig2_drive(0.0), 0.5, 0.05, 3.0);
    CHECK(p.rc_left.energy == doctest::Approx(-0.5));
    CHECK(p.rc_right.energy == doctest::Approx(2.5));
    CHECK(p.rc_left.coupling == 0.5);
    CHECK(sd_eval(p.rc_left.residual, 0.0) == doctest::Approx(0.1));
    auto bad = p;
    bad.rc_left.energy += 0.1;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("3x3 matrix structure") {
    const auto p = make_tqd(fig2_drive(1.1), 0.4, 0.05, 2.0);
    for (double t : {0.0, 0.9, 2.3}) {
        const Mat3 h = tqd_matrix(p, t);
        CHECK((h - h.adjoint()).norm() == 0.0);
        CHECK(h(0, 2) == cplx{0.0});
        const auto v = driving_eval(p, t);
        CHECK(h(0, 1).real() == doctest::Approx(-v.coupling_left));
        CHECK(h(1, 2).real() == doctest::Approx(-v.coupling_right));
        Eigen::SelfAdjointEigenSolver<Mat3> es(h);
        CHECK(es.eigenvalues().sum() == doctest::Approx(p.rc_left.energy + v.dot_energy + p.rc_right.energy));
    }
    auto decoupled = make_tqd(fig2_drive(1.1), 0.0, 0.05, 2.0);
    const Mat3 h = tqd_matrix(decoupled, 0.5);
    CHECK(h.isDiagonal());
}

TEST_CASE("zero bias dark state stays at eps0") {
    const auto p = make_tqd(fig2_drive(0.4), 0.5, 0.05, 0.0);
    for (int j = 0; j < 64; ++j) {
        const double t = p.driving.period() * j / 64;
        const auto v = driving_eval(p, t);
        Eigen::Vector3cd x(v.coupling_right, 0.0, -v.coupling_left);
        const Eigen::Vector3cd r = tqd_matrix(p, t) * x - p.driving.dot_energy * x;
        CHECK(r.norm() < 1e-14);
    }
}

TEST_CASE("canonical anticommutation relations") {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Op8& a = fock::annihilation(static_cast<Site>(i));
            const Op8& b = fock::annihilation(static_cast<Site>(j));
            const Op8 ab_dag = a * b.adjoint() + b.adjoint() * a;
            const Op8 expect = (i == j) ? Op8(Op8::Identity()) : Op8(Op8::Zero());
            CHECK((ab_dag - expect).norm() == 0.0);
            CHECK((a * b + b * a).norm() == 0.0);
        }
}

TEST_CASE("Fock lift") {
    const auto p = make_tqd(fig2_drive(2.0), 0.3, 0.05, 1.5);
    const std::array<int, 3> one = {4, 2, 1};  // L, center, R occupied
    for (double t : {0.0, 0.77, 2.9}) {
        const Op8 H = fock_lift(p, t);
        CHECK((H - H.adjoint()).norm() < 1e-15);
        CHECK(commutator(H, fock::number_operator()).norm() < 1e-14);
        CHECK(std::abs(H(0, 0)) == 0.0);
        const auto v = driving_eval(p, t);
        CHECK(H(7, 7).real() == doctest::Approx(p.rc_left.energy + v.dot_energy + p.rc_right.energy));
        const Mat3 h = tqd_matrix(p, t);
        Mat3 block;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) block(a, b) = H(one[a], one[b]);
        CHECK((block - h).norm() < 1e-15);
        // number blocks: no element couples different particle numbers
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b)
                if (fock::particle_number(a) != fock::particle_number(b)) CHECK(H(a, b) == cplx{0.0});
    }
}

TEST_CASE("mirror symmetry of the driven family") {
    // L <-> R, bias -> -bias, t -> t + T/2, phase -> phase + pi
    const auto p = make_tqd(fig2_drive(0.9), 0.35, 0.05, 1.7);
    const auto q = make_tqd(fig2_drive(0.9 + std::numbers::pi), 0.35, 0.05, -1.7);
    Eigen::Matrix3d P;
    P << 0, 0, 1, 0, 1, 0, 1, 0, 0;
    const double half = p.driving.period() / 2;
    for (double t : {0.0, 0.4, 1.3, 2.2}) {
        const Mat3 a = tqd_matrix(p, t);
        const Mat3 b = P.cast<cplx>() * tqd_matrix(q, t + half) * P.cast<cplx>().transpose();
        CHECK((a - b).norm() < 1e-13);
    }
}

TEST_CASE("hopping sign is a gauge choice") {
    auto p = make_tqd(fig2_drive(0.3), 0.4, 0.05, 0.8);
    auto q = p;
    q.hopping_sign = 1.0;
    const Mat3 G = Eigen::Vector3cd(1.0, -1.0, 1.0).asDiagonal();
    for (double t : {0.1, 1.2}) CHECK((G * tqd_matrix(p, t) * G - tqd_matrix(q, t)).norm() < 1e-15);
}

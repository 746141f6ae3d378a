// test_adiabatic.cpp — instantaneous channels and their two-state cumulants

#include "doctest.h"

#include <cmath>

#include "rcpump/adiabatic.hpp"

using namespace rcpump;

namespace {

constexpr double kSlow = 5e-5;

TQDParams slow_point(double lambda, double bias, double phase, double omega = kSlow) {
    DrivingProtocol d;
    d.frequency = omega;
    d.dot_amplitude = 2.5;
    d.phase = phase;
    return make_tqd(d, lambda, 0.03, bias);
}

const Reservoirs kRes = equal_reservoirs(4.0, 1.0);

} // namespace

TEST_CASE("central channel energy is pinned at zero bias") {
    const auto dec = decompose_channels(slow_point(0.5, 0.0, kPi / 2));
    double err = 0.0;
    for (const auto& s : dec.samples) err = std::max(err, std::abs(s.energy[1] - 1.0));
    CHECK(err < 1e-12);
    CHECK(dec.ambiguous.empty());
}

TEST_CASE("channel transformation is unitary and rates sum to the flat width") {
    for (double bias : {-3.0, 0.0, 2.0, 5.0}) {
        const auto dec = decompose_channels(slow_point(0.5, bias, kPi / 2));
        double unit = 0.0, sum = 0.0;
        for (const auto& s : dec.samples) {
            unit = std::max(unit, (s.T * s.T.adjoint() - Mat3::Identity()).norm());
            for (int nu = 0; nu < 2; ++nu)
                sum = std::max(sum, std::abs(s.rate[0][nu] + s.rate[1][nu] + s.rate[2][nu] - 0.06));
            CHECK(s.energy[0] >= s.energy[1] - 1e-12);
            CHECK(s.energy[1] >= s.energy[2] - 1e-12);
        }
        CHECK(unit < 1e-12);
        CHECK(sum < 1e-10);
        CHECK(dec.min_overlap > 0.99);
    }
}

TEST_CASE("at() reproduces the grid samples") {
    const auto dec = decompose_channels(slow_point(0.5, 2.0, kPi / 2), 512);
    for (int j : {0, 17, 300, 511}) {
        const auto s = dec.at(dec.t[j]);
        for (int i = 0; i < 3; ++i) CHECK(s.energy[i] == doctest::Approx(dec.samples[j].energy[i]).epsilon(1e-14));
        CHECK((s.T - dec.samples[j].T).norm() < 1e-12);
    }
}

TEST_CASE("weak coupling leaves the bare dots as channels") {
    const auto dec = decompose_channels(slow_point(1e-9, 6.0, 0.3), 1024);
    for (const auto& s : dec.samples) {
        for (int i = 0; i < 3; ++i) CHECK(s.T.row(i).cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
        // the dot channel (center label at this bias) exchanges nothing with either reservoir
        CHECK(s.T.row(1).cwiseAbs()(1) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.rate[1][0] < 1e-15);
        CHECK(s.rate[1][1] < 1e-15);
    }
}

TEST_CASE("adiabaticity metric") {
    DrivingProtocol still;
    still.frequency = 1.0;
    still.dot_amplitude = 0.0;
    still.amp_left = 0.0;
    still.amp_right = 0.0;
    CHECK(adiabaticity_metric(decompose_channels(make_tqd(still, 0.5, 0.03, 2.0), 256)) == 0.0);

    CHECK(adiabaticity_metric(decompose_channels(slow_point(0.5, 5.0, kPi / 2))) < 1e-2);
    CHECK(adiabaticity_metric(decompose_channels(slow_point(0.5, 0.0, kPi / 2))) < 1e-2);
    const auto fast = decompose_channels(slow_point(0.25, 1.9, 0.5, 1.9), 1024);
    CHECK(adiabaticity_metric(fast) > 1.0);
    CHECK_THROWS_AS(total_cumulants(fast, kRes), AdiabaticityError);
    AdiabaticOptions opt;
    opt.allow_nonadiabatic = true;
    opt.n_grid = 256;
    CHECK_NOTHROW(total_cumulants(fast, kRes, opt));
}

TEST_CASE("closed-form channel equations agree with the generic engine") {
    const auto dec = decompose_channels(slow_point(0.5, 3.0, kPi / 2));
    AdiabaticOptions opt;
    opt.n_grid = 2048;
    opt.control.rel_tol = 1e-13;
    for (Channel ch : {Channel::Upper, Channel::Center}) {
        const auto gen = channel_cumulants(dec, ch, kRes, opt);
        const auto cf = channel_cumulants_closed_form(dec, ch, kRes, opt.n_grid, 1e-14);
        CHECK(std::abs(gen.Q - cf.Q) < 1e-8);
        CHECK(std::abs(gen.dQ2 - cf.dQ2) < 1e-8 * std::max(1.0, std::abs(cf.dQ2)));
        double occ = 0.0;
        for (int j = 0; j <= opt.n_grid; ++j) occ = std::max(occ, std::abs(gen.rho[j](1).real() - cf.occupation[j]));
        CHECK(occ < 1e-8);
    }
}

TEST_CASE("frozen rates carry no current") {
    DrivingProtocol still;
    still.frequency = 0.01;
    still.dot_amplitude = 0.0;
    still.amp_left = 0.0;
    still.amp_right = 0.0;
    const auto dec = decompose_channels(make_tqd(still, 0.5, 0.03, 2.0), 256);
    for (int i = 0; i < 3; ++i) {
        const auto cf = channel_cumulants_closed_form(dec, static_cast<Channel>(i), kRes, 256);
        CHECK(std::abs(cf.Q) < 1e-12);
        CHECK(cf.dQ2 > 0.0);
        const double f = fermi(dec.samples[0].energy[i], kRes.left);
        for (double n : cf.occupation) CHECK(n == doctest::Approx(f).epsilon(1e-10));
    }
}

TEST_CASE("zero bias: silent central channel with large fluctuations") {
    const auto dec = decompose_channels(slow_point(0.5, 0.0, kPi / 2));
    const auto c = channel_cumulants_closed_form(dec, Channel::Center, kRes);
    CHECK(std::abs(c.Q) < 1e-8);
    CHECK(c.dQ2 > 0.05);
    const auto u = channel_cumulants_closed_form(dec, Channel::Upper, kRes);
    const auto d = channel_cumulants_closed_form(dec, Channel::Lower, kRes);
    CHECK(u.Q == doctest::Approx(d.Q).epsilon(1e-8));
    CHECK(u.dQ2 == doctest::Approx(d.dQ2).epsilon(1e-8));
    for (const auto* r : {&c, &u, &d})
        for (double n : r->occupation) {
            CHECK(n >= -1e-12);
            CHECK(n <= 1.0 + 1e-12);
        }
}

TEST_CASE("large bias: only the central channel pumps") {
    const auto dec = decompose_channels(slow_point(0.5, 6.0, kPi / 2));
    const auto tot = total_cumulants(dec, kRes, {.n_grid = 2048});
    CHECK(std::abs(tot.Q_channel[0]) + std::abs(tot.Q_channel[2]) < 1e-3);
    CHECK(tot.Q == doctest::Approx(tot.Q_channel[1]).epsilon(1e-3));
    CHECK(tot.Q > 0.9);
    CHECK(tot.dQ2 >= 0.0);
}

TEST_CASE("strong coupling reverses the central channel") {
    for (double lambda : {0.003, 0.3}) {
        const auto dec = decompose_channels(slow_point(lambda, 5.0, 1.52 * kPi));
        const auto c = channel_cumulants_closed_form(dec, Channel::Center, kRes);
        if (lambda < 0.01)
            CHECK(c.Q > 0.5);
        else
            CHECK(c.Q < -0.5);
    }
}

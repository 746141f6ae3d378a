// test_model.cpp — spectral densities, Fermi function, RC map

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "rcpump/model.hpp"

using namespace rcpump;

namespace {

// Lorentzian sampled on w = c + d tan(theta), which clusters points near the peak.
SpectralDensity tan_grid_lorentzian(double gamma, double width, double center, int n, double theta_max) {
    std::vector<double> w(n), j(n);
    for (int i = 0; i < n; ++i) {
        const double th = -theta_max + 2.0 * theta_max * i / (n - 1);
        w[i] = center + width * std::tan(th);
        const double x = w[i] - center;
        j[i] = gamma * width * width / (x * x + width * width);
    }
    return SpectralDensity::tabulated(w, j);
}

} // namespace

TEST_CASE("Lorentzian evaluation") {
    const auto sd = SpectralDensity::lorentzian(2.5, 0.05, 1.0);
    CHECK(sd_eval(sd, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(sd_eval(sd, 1.05) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(sd_eval(sd, 0.95) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(sd_eval(SpectralDensity::lorentzian(0.05, 0.05, 0.5), 0.5) == doctest::Approx(0.05));
    CHECK_THROWS(SpectralDensity::lorentzian(1.0, 0.0, 0.0));
}

TEST_CASE("tabulated evaluation interpolates and rejects off-grid points") {
    const auto sd = SpectralDensity::tabulated({0.0, 1.0, 3.0}, {0.0, 2.0, 1.0});
    CHECK(sd_eval(sd, 0.5) == doctest::Approx(1.0));
    CHECK(sd_eval(sd, 2.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(sd_eval(sd, 3.5), std::out_of_range);
    CHECK(sd.value_or_zero(3.5) == 0.0);
    CHECK_THROWS(SpectralDensity::tabulated({0.0, 0.0}, {1.0, 1.0}));
    CHECK_THROWS(SpectralDensity::tabulated({0.0, 1.0}, {1.0, -1.0}));
}

TEST_CASE("tabulated file loader") {
    const char* path = "test_model_sd.txt";
    {
        std::ofstream f(path);
        f << "# omega J\n0 1\n\n1 2\n2 0.5\n";
    }
    const auto sd = load_tabulated(path);
    CHECK(sd.as_tabulated().omega.size() == 3);
    CHECK(sd_eval(sd, 1.5) == doctest::Approx(1.25));
    {
        std::ofstream f(path);
        f << "0 1\n1 x\n";
    }
    CHECK_THROWS(load_tabulated(path));
    std::remove(path);
}

TEST_CASE("Fermi function") {
    CHECK(fermi(1.0, 3.3, 1.0) == doctest::Approx(0.5));
    CHECK(fermi(2.0, 3.3, 1.0) == doctest::Approx(1.0 / (std::exp(3.3) + 1.0)).epsilon(1e-14));
    CHECK(fermi(2.0, 3.3, 1.0) == doctest::Approx(0.03557).epsilon(1e-3));
    CHECK(fermi(1e6, 10.0, 0.0) == 0.0);
    CHECK(fermi(-1e6, 10.0, 0.0) == 1.0);
    double prev = 1.0;
    for (int i = -200; i <= 200; ++i) {
        const double x = 0.05 * i;
        const double f = fermi(0.3 + x, 4.0, 0.3);
        CHECK(f <= prev);
        prev = f;
        CHECK(std::abs(f + fermi(0.3 - x, 4.0, 0.3) - 1.0) < 1e-15);
    }
}

TEST_CASE("closed-form RC map") {
    const auto rc = rc_map_lorentzian(SpectralDensity::lorentzian(2.5, 0.05, 1.0));
    CHECK(std::abs(rc.coupling - 0.25) < 1e-15);
    CHECK(rc.energy == 1.0);
    CHECK(std::abs(sd_eval(rc.residual, -7.0) - 0.1) < 1e-15);
    CHECK(rc_map_lorentzian(SpectralDensity::lorentzian(10.0, 0.05, 0.0)).coupling == doctest::Approx(0.5));
    CHECK(rc_map_lorentzian(SpectralDensity::lorentzian(0.0, 0.05, 0.0)).coupling == 0.0);
    CHECK(gamma_for_coupling(0.25, 0.05) == doctest::Approx(2.5));
}

TEST_CASE("quadrature RC map reproduces the closed form for a Lorentzian") {
    const auto sd = tan_grid_lorentzian(2.5, 0.05, 1.0, 8001, 0.5 * std::numbers::pi - 3e-4);
    const auto rc = rc_map_generic(sd);
    CHECK(std::abs(rc.coupling - 0.25) < 1e-4);
    CHECK(std::abs(rc.energy - 1.0) < 1e-6);
    const auto& tab = sd.as_tabulated();
    const double lo = tab.omega.front(), hi = tab.omega.back();
    const double margin = 0.05 * (hi - lo);
    const auto& res = rc.residual.as_tabulated();
    double worst = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < res.omega.size(); ++i) {
        if (res.omega[i] < lo + margin || res.omega[i] > hi - margin) continue;
        worst = std::max(worst, std::abs(res.value[i] - 0.1) / 0.1);
        ++used;
    }
    CHECK(used > 1000);
    CHECK(worst < 0.01);
}

TEST_CASE("quadrature RC map: flat band, symmetry, scaling") {
    const double g0 = 0.7, W = 4.0;
    std::vector<double> w, j;
    for (int i = 0; i <= 2000; ++i) {
        w.push_back(-W / 2 + W * i / 2000.0);
        j.push_back(g0);
    }
    const auto flat = SpectralDensity::tabulated(w, j);
    const auto rc = rc_map_generic(flat);
    CHECK(rc.coupling == doctest::Approx(std::sqrt(g0 * W / (2.0 * std::numbers::pi))).epsilon(1e-12));
    CHECK(std::abs(rc.energy) < 1e-12);

    const auto sym = tan_grid_lorentzian(1.0, 0.2, 0.7, 801, 1.5);
    CHECK(rc_map_generic(sym).energy == doctest::Approx(0.7).epsilon(1e-10));

    const auto base = rc_map_generic(sym);
    const auto scaled = rc_map_generic(sym.scaled(9.0));
    CHECK(scaled.coupling == doctest::Approx(3.0 * base.coupling).epsilon(1e-12));
    CHECK(scaled.energy == doctest::Approx(base.energy).epsilon(1e-12));

    CHECK_THROWS_AS(rc_map_generic(SpectralDensity::tabulated({0.0, 1.0}, {0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("zeroth moment matches lambda squared") {
    const auto sd = tan_grid_lorentzian(3.0, 0.1, -0.4, 2001, 1.55);
    const auto& t = sd.as_tabulated();
    double m0 = 0.0;
    for (std::size_t i = 0; i + 1 < t.omega.size(); ++i)
        m0 += 0.5 * (t.value[i] + t.value[i + 1]) * (t.omega[i + 1] - t.omega[i]);
    const double lam = rc_map_generic(sd).coupling;
    CHECK(lam * lam == doctest::Approx(m0 / (2.0 * std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("driving protocol") {
    DrivingProtocol d;
    d.frequency = 1.9;
    d.dot_amplitude = 2.5;
    d.phase = 0.0;
    CHECK(d.dot_energy_at(0.0) == doctest::Approx(3.5));
    CHECK(d.period() == doctest::Approx(2.0 * std::numbers::pi / 1.9));
    const double tq = d.period() / 4;
    CHECK(d.coupling_modulation(Lead::Left, tq) == doctest::Approx(1.0));
    CHECK(d.coupling_modulation(Lead::Right, 0.0) == doctest::Approx(2.0));
    CHECK(d.coupling_modulation(Lead::Left, 0.0) == doctest::Approx(0.0));
    d.frequency = 0.0;
    CHECK_THROWS(d.validate());
}

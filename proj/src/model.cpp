// model.cpp — Spectral densities and the reaction-coordinate map

#include "rcpump/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rcpump {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double interpolate(const Tabulated& tab, double omega) {
    const auto& x = tab.omega;
    auto it = std::upper_bound(x.begin(), x.end(), omega);
    std::size_t i = (it == x.end()) ? x.size() - 1 : static_cast<std::size_t>(it - x.begin());
    if (i == 0) i = 1;
    const double x0 = x[i - 1], x1 = x[i];
    const double s = (omega - x0) / (x1 - x0);
    return (1.0 - s) * tab.value[i - 1] + s * tab.value[i];
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    return acc;
}

} // namespace

SpectralDensity SpectralDensity::lorentzian(double coupling, double width, double center) {
    if (!(coupling >= 0.0)) throw std::invalid_argument("Lorentzian coupling must be non-negative");
    if (!(width > 0.0)) throw std::invalid_argument("Lorentzian width must be positive");
    return SpectralDensity(Lorentzian{coupling, width, center});
}

SpectralDensity SpectralDensity::flat(double value) {
    if (!(value >= 0.0)) throw std::invalid_argument("flat spectral density must be non-negative");
    return SpectralDensity(FlatBand{value});
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> omega, std::vector<double> value) {
    if (omega.size() != value.size()) throw std::invalid_argument("tabulated density: column size mismatch");
    if (omega.size() < 2) throw std::invalid_argument("tabulated density needs at least two samples");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(value[i]))
            throw std::invalid_argument("tabulated density: non-finite sample");
        if (value[i] < 0.0) throw std::invalid_argument("tabulated density: negative sample");
        if (i > 0 && !(omega[i] > omega[i - 1]))
            throw std::invalid_argument("tabulated density: grid not strictly increasing");
    }
    return SpectralDensity(Tabulated{std::move(omega), std::move(value)});
}

double SpectralDensity::operator()(double omega) const {
    if (const auto* tab = std::get_if<Tabulated>(&shape_)) {
        if (omega < tab->omega.front() || omega > tab->omega.back())
            throw std::out_of_range("tabulated density evaluated outside its grid");
    }
    return value_or_zero(omega);
}

double SpectralDensity::value_or_zero(double omega) const {
    return std::visit(
        [omega](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Lorentzian>) {
                const double x = omega - s.center;
                return s.coupling * s.width * s.width / (x * x + s.width * s.width);
            } else if constexpr (std::is_same_v<S, FlatBand>) {
                return s.value;
            } else {
                if (omega < s.omega.front() || omega > s.omega.back()) return 0.0;
                return interpolate(s, omega);
            }
        },
        shape_);
}

SpectralDensity SpectralDensity::scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("scale factor must be non-negative");
    return std::visit(
        [c](auto s) -> SpectralDensity {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Lorentzian>) {
                s.coupling *= c;
            } else if constexpr (std::is_same_v<S, FlatBand>) {
                s.value *= c;
            } else {
                for (auto& v : s.value) v *= c;
            }
            return SpectralDensity(std::move(s));
        },
        shape_);
}

double sd_eval(const SpectralDensity& sd, double omega) { return sd(omega); }

SpectralDensity load_tabulated(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spectral density file: " + path);
    std::vector<double> w, j;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        double a, b;
        if (!(ss >> a >> b))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
        w.push_back(a);
        j.push_back(b);
    }
    return SpectralDensity::tabulated(std::move(w), std::move(j));
}

double fermi(double omega, double beta, double mu) {
    const double x = beta * (omega - mu);
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double DrivingProtocol::period() const { return kTwoPi / frequency; }

double DrivingProtocol::dot_energy_at(double t) const {
    return dot_energy + dot_amplitude * std::cos(frequency * t + phase_sign * phase);
}

double DrivingProtocol::coupling_modulation(Lead lead, double t) const {
    const double c = std::cos(frequency * t);
    return lead == Lead::Left ? 1.0 - amp_left * c : 1.0 + amp_right * c;
}

void DrivingProtocol::validate() const {
    if (!(frequency > 0.0) || !std::isfinite(frequency)) throw std::invalid_argument("driving frequency must be positive");
    for (double v : {phase, dot_amplitude, amp_left, amp_right, dot_energy})
        if (!std::isfinite(v)) throw std::invalid_argument("driving protocol has a non-finite parameter");
    if (phase_sign != 1.0 && phase_sign != -1.0) throw std::invalid_argument("phase_sign must be +1 or -1");
}

RCParameters rc_map_lorentzian(const SpectralDensity& sd) {
    if (!sd.is_lorentzian()) throw std::invalid_argument("rc_map_lorentzian needs a Lorentzian density");
    const auto& l = sd.as_lorentzian();
    RCParameters rc;
    rc.coupling = std::sqrt(l.coupling * l.width / 2.0);
    rc.energy = l.center;
    rc.residual = SpectralDensity::flat(2.0 * l.width);
    return rc;
}

RCParameters rc_map_generic(const SpectralDensity& sd) {
    if (!sd.is_tabulated()) throw std::invalid_argument("rc_map_generic needs a tabulated density");
    const auto& tab = sd.as_tabulated();
    const auto& x = tab.omega;
    const auto& J = tab.value;
    const std::size_t n = x.size();

    const double m0 = trapezoid(x, J);
    if (!(m0 > 0.0)) throw std::invalid_argument("spectral density has no weight; reaction coordinate undefined");
    std::vector<double> wJ(n);
    for (std::size_t i = 0; i < n; ++i) wJ[i] = x[i] * J[i];
    const double m1 = trapezoid(x, wJ);

    RCParameters rc;
    const double lambda2 = m0 / kTwoPi;
    rc.coupling = std::sqrt(lambda2);
    rc.energy = m1 / m0;

    // Principal value P int J(w')/(w'-w) dw' by singularity subtraction:
    // int [J(w') - J(w)]/(w' - w) dw' + J(w) ln((b - w)/(w - a)).
    const double a = x.front(), b = x.back();
    std::vector<double> residual(n, 0.0);
    std::vector<double> g(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (J[i] == 0.0) continue;
        const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        const double slope = (hm * hm * J[i + 1] - hp * hp * J[i - 1] + (hp * hp - hm * hm) * J[i]) /
                             (hm * hp * (hm + hp));
        for (std::size_t k = 0; k < n; ++k)
            g[k] = (k == i) ? slope : (J[k] - J[i]) / (x[k] - x[i]);
        const double pv = trapezoid(x, g) + J[i] * std::log((b - x[i]) / (x[i] - a));
        const double hilbert = pv / std::numbers::pi;
        residual[i] = 4.0 * lambda2 * J[i] / (hilbert * hilbert + J[i] * J[i]);
    }
    rc.residual = SpectralDensity::tabulated(x, std::move(residual));
    return rc;
}

} // namespace rcpump

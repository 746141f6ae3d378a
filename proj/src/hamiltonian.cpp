// hamiltonian.cpp

#include "rcpump/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace rcpump {

void TQDParams::validate() const {
    driving.validate();
    const double eps0 = driving.dot_energy;
    const double scale = 1.0 + std::abs(eps0) + std::abs(energy_bias);
    if (std::abs(rc_left.energy + rc_right.energy - 2.0 * eps0) > 1e-12 * scale)
        throw std::invalid_argument("RC energies must satisfy eps_L + eps_R = 2 eps0");
    if (std::abs(rc_right.energy - rc_left.energy - energy_bias) > 1e-12 * scale)
        throw std::invalid_argument("RC energies must satisfy eps_R - eps_L = bias");
    if (rc_left.coupling < 0.0 || rc_right.coupling < 0.0)
        throw std::invalid_argument("RC couplings must be non-negative");
    if (std::abs(std::abs(hopping_sign) - 1.0) > 0.0) throw std::invalid_argument("hopping_sign must be +1 or -1");
}

TQDParams make_tqd(const DrivingProtocol& drive, double rc_coupling, double width, double bias) {
    const double eps0 = drive.dot_energy;
    const double gamma = gamma_for_coupling(rc_coupling, width);
    TQDParams p;
    p.driving = drive;
    p.rc_left = rc_map_lorentzian(SpectralDensity::lorentzian(gamma, width, eps0 - bias / 2.0));
    p.rc_right = rc_map_lorentzian(SpectralDensity::lorentzian(gamma, width, eps0 + bias / 2.0));
    p.rc_left.coupling = rc_coupling;
    p.rc_right.coupling = rc_coupling;
    p.energy_bias = bias;
    p.validate();
    return p;
}

DriveValues driving_eval(const TQDParams& p, double t) {
    return {p.driving.dot_energy_at(t),
            p.rc_left.coupling * p.driving.coupling_modulation(Lead::Left, t),
            p.rc_right.coupling * p.driving.coupling_modulation(Lead::Right, t)};
}

Mat3 tqd_matrix(const TQDParams& p, double t) {
    const auto v = driving_eval(p, t);
    const double s = p.hopping_sign;
    Mat3 h = Mat3::Zero();
    h(0, 0) = p.rc_left.energy;
    h(1, 1) = v.dot_energy;
    h(2, 2) = p.rc_right.energy;
    h(0, 1) = h(1, 0) = s * v.coupling_left;
    h(1, 2) = h(2, 1) = s * v.coupling_right;
    return h;
}

namespace fock {

namespace {

int bit(Site site) { return 2 - static_cast<int>(site); }

Op8 build_annihilation(Site site) {
    Op8 a = Op8::Zero();
    const int j = static_cast<int>(site);
    for (int s = 0; s < kDim; ++s) {
        if (!occupation(s, site)) continue;
        int parity = 0;
        for (int i = 0; i < j; ++i) parity += occupation(s, static_cast<Site>(i));
        const int target = s & ~(1 << bit(site));
        a(target, s) = (parity % 2 == 0) ? 1.0 : -1.0;
    }
    return a;
}

} // namespace

int occupation(int state, Site site) { return (state >> bit(site)) & 1; }

int particle_number(int state) {
    return occupation(state, Site::Left) + occupation(state, Site::Center) + occupation(state, Site::Right);
}

const Op8& annihilation(Site site) {
    static const std::array<Op8, 3> ops = {build_annihilation(Site::Left), build_annihilation(Site::Center),
                                           build_annihilation(Site::Right)};
    return ops[static_cast<int>(site)];
}

const Op8& number_operator() {
    static const Op8 n = [] {
        Op8 m = Op8::Zero();
        for (int s = 0; s < kDim; ++s) m(s, s) = particle_number(s);
        return m;
    }();
    return n;
}

Op8 lift(const Mat3& h) {
    Op8 H = Op8::Zero();
    for (int i = 0; i < 3; ++i) {
        const Op8& ai = annihilation(static_cast<Site>(i));
        for (int j = 0; j < 3; ++j) {
            if (h(i, j) == cplx{0.0}) continue;
            H += h(i, j) * ai.adjoint() * annihilation(static_cast<Site>(j));
        }
    }
    return H;
}

} // namespace fock

Op8 fock_lift(const TQDParams& p, double t) { return fock::lift(tqd_matrix(p, t)); }

} // namespace rcpump

// adiabatic.cpp — Instantaneous channel decomposition and two-state channel cumulants

#include "rcpump/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace rcpump {

namespace {

using Perm = std::array<int, 3>;

constexpr std::array<Perm, 6> kPerms = {{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

void fix_gauge(Eigen::Vector3cd& v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v(imax)) / std::abs(v(imax));
}

struct Eigen3 {
    Eigen::Vector3d energy;
    Mat3 vectors;  // columns
};

Eigen3 diagonalize(const TQDParams& p, double t) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(tqd_matrix(p, t));
    return {es.eigenvalues(), es.eigenvectors()};
}

// Column permutation of `next` that best continues the labelled columns of `prev`.
Perm match(const Mat3& prev, const Mat3& next, double* min_overlap = nullptr) {
    const Eigen::Matrix3d ov = (prev.adjoint() * next).cwiseAbs2();
    Perm best = kPerms[0];
    double best_score = -1.0;
    for (const auto& pm : kPerms) {
        const double s = ov(0, pm[0]) + ov(1, pm[1]) + ov(2, pm[2]);
        if (s > best_score) {
            best_score = s;
            best = pm;
        }
    }
    if (min_overlap) {
        double m = 1.0;
        for (int i = 0; i < 3; ++i) m = std::min(m, std::sqrt(ov(i, best[i])));
        *min_overlap = m;
    }
    return best;
}

ChannelSample make_sample(const TQDParams& p, const Eigen3& e, const Perm& perm) {
    ChannelSample s;
    Mat3 V;
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3cd v = e.vectors.col(perm[i]);
        fix_gauge(v);
        V.col(i) = v;
        s.energy[i] = e.energy(perm[i]);
    }
    s.T = V.adjoint();
    for (int i = 0; i < 3; ++i) {
        s.rate[i][0] = p.rc_left.residual.value_or_zero(s.energy[i]) * std::norm(V(0, i));
        s.rate[i][1] = p.rc_right.residual.value_or_zero(s.energy[i]) * std::norm(V(2, i));
    }
    return s;
}

double min_gap(const ChannelSample& s) {
    return std::min({std::abs(s.energy[0] - s.energy[1]), std::abs(s.energy[0] - s.energy[2]),
                     std::abs(s.energy[1] - s.energy[2])});
}

} // namespace

ChannelDecomposition decompose_channels(const TQDParams& p, int n_t) {
    p.validate();
    if (n_t < 8) throw std::invalid_argument("channel grid needs at least 8 points");
    ChannelDecomposition dec;
    dec.params = p;
    dec.omega = p.driving.frequency;
    dec.n_t = n_t;
    dec.t.resize(n_t);
    dec.samples.resize(n_t);
    const double T = dec.period();

    Mat3 prev;
    dec.min_gap = 1e300;
    double amb_start = -1.0;
    for (int j = 0; j < n_t; ++j) {
        const double t = T * j / n_t;
        dec.t[j] = t;
        const auto e = diagonalize(p, t);
        Perm perm;
        if (j == 0) {
            perm = {2, 1, 0};  // descending energy: upper, center, lower
        } else {
            double ov = 1.0;
            perm = match(prev, e.vectors, &ov);
            dec.min_overlap = std::min(dec.min_overlap, ov);
        }
        dec.samples[j] = make_sample(p, e, perm);
        prev = dec.samples[j].T.adjoint();
        const double gap = min_gap(dec.samples[j]);
        dec.min_gap = std::min(dec.min_gap, gap);
        if (gap < kDegeneracyThreshold && amb_start < 0.0) amb_start = t;
        if (gap >= kDegeneracyThreshold && amb_start >= 0.0) {
            dec.ambiguous.emplace_back(amb_start, t);
            amb_start = -1.0;
        }
    }
    if (amb_start >= 0.0) dec.ambiguous.emplace_back(amb_start, T);
    double wrap = 1.0;
    match(prev, dec.samples[0].T.adjoint(), &wrap);
    dec.min_overlap = std::min(dec.min_overlap, wrap);
    return dec;
}

ChannelSample ChannelDecomposition::at(double t) const {
    const double T = period();
    double tt = std::fmod(t, T);
    if (tt < 0.0) tt += T;
    const int j = static_cast<int>(std::lround(tt / T * n_t)) % n_t;
    const auto e = diagonalize(params, t);
    return make_sample(params, e, match(samples[j].T.adjoint(), e.vectors));
}

double adiabaticity_metric(const ChannelDecomposition& dec) {
    const int n = dec.n_t;
    const double dt = dec.period() / n;
    double metric = 0.0;
    for (int j = 0; j < n; ++j) {
        const Mat3& T0 = dec.samples[j].T;
        Mat3 Tp = dec.samples[(j + 1) % n].T;
        Mat3 Tm = dec.samples[(j + n - 1) % n].T;
        // align the row phases of the neighbours with the centre sample
        for (int i = 0; i < 3; ++i) {
            const cplx op = Tp.row(i).dot(T0.row(i));
            const cplx om = Tm.row(i).dot(T0.row(i));
            if (std::abs(op) > 0.0) Tp.row(i) *= op / std::abs(op);
            if (std::abs(om) > 0.0) Tm.row(i) *= om / std::abs(om);
        }
        const Mat3 A = (Tp - Tm) / (2.0 * dt) * T0.adjoint();
        const auto& e = dec.samples[j].energy;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                const double gap = std::abs(e[a] - e[b]);
                metric = std::max(metric, gap > 0.0 ? std::abs(A(a, b)) / gap : 1e300);
            }
    }
    return metric;
}

CountingGenerator channel_generator(const ChannelDecomposition& dec, Channel ch, const Reservoirs& res) {
    const int i = static_cast<int>(ch);
    CountingGenerator gen;
    gen.dim = 2;
    gen.omega = dec.omega;
    gen.trace = VecX::Ones(2);
    gen.at = [&dec, &res, i](double t) {
        const auto s = dec.at(t);
        const double e = s.energy[i];
        const double gl = s.rate[i][0], gr = s.rate[i][1];
        const double fl = fermi(e, res.left), fr = fermi(e, res.right);
        GeneratorSample g;
        g.L = MatX::Zero(2, 2);
        g.L(1, 0) = fl * gl + fr * gr;
        g.L(0, 0) = -(fl * gl + fr * gr);
        g.L(0, 1) = (1.0 - fl) * gl + (1.0 - fr) * gr;
        g.L(1, 1) = -((1.0 - fl) * gl + (1.0 - fr) * gr);
        g.jump_in = MatX::Zero(2, 2);
        g.jump_in(1, 0) = fl * gl;
        g.jump_out = MatX::Zero(2, 2);
        g.jump_out(0, 1) = (1.0 - fl) * gl;
        return g;
    };
    return gen;
}

namespace {

void require_adiabatic(const ChannelDecomposition& dec, const AdiabaticOptions& opt, double* metric_out) {
    const double m = adiabaticity_metric(dec);
    if (metric_out) *metric_out = m;
    if (m > opt.threshold && !opt.allow_nonadiabatic)
        throw AdiabaticityError("adiabaticity metric " + std::to_string(m) + " exceeds threshold " +
                                std::to_string(opt.threshold) + "; the parallel-channel picture does not apply");
}

} // namespace

CumulantRecord channel_cumulants(const ChannelDecomposition& dec, Channel ch, const Reservoirs& res,
                                 const AdiabaticOptions& opt) {
    require_adiabatic(dec, opt, nullptr);
    return cumulants_joint(channel_generator(dec, ch, res), opt.n_grid, opt.control);
}

ClosedFormCumulants channel_cumulants_closed_form(const ChannelDecomposition& dec, Channel ch,
                                                  const Reservoirs& res, int n_grid, double tol) {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;  // (n, x)
    const int i = static_cast<int>(ch);
    struct Coeffs {
        double fill, empty, in_left, gamma_left, f_left;
    };
    const auto coeffs = [&](double t) {
        const auto s = dec.at(t);
        const double e = s.energy[i];
        const double gl = s.rate[i][0], gr = s.rate[i][1];
        const double fl = fermi(e, res.left), fr = fermi(e, res.right);
        return Coeffs{fl * gl + fr * gr, (1.0 - fl) * gl + (1.0 - fr) * gr, fl * gl, gl, fl};
    };
    // n' = A (1 - n) - B n ;  I = Gamma_L (f_L - n) ;  x' = -(A + B) x + f_L Gamma_L (1 - n) - I n
    const auto rhs = [&](const State& z, State& dz, double t) {
        const auto c = coeffs(t);
        const double I = c.gamma_left * (c.f_left - z[0]);
        dz[0] = c.fill * (1.0 - z[0]) - c.empty * z[0];
        dz[1] = -(c.fill + c.empty) * z[1] + c.in_left * (1.0 - z[0]) - I * z[0];
    };
    const double T = dec.period();
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>());
    const auto run_period = [&](State z) {
        ode::integrate_adaptive(stepper, rhs, z, 0.0, T, T / n_grid);
        return z;
    };
    // the period map is affine: z(T) = M z(0) + c
    const State c0 = run_period({0.0, 0.0});
    const State c1 = run_period({1.0, 0.0});
    const State c2 = run_period({0.0, 1.0});
    const double m00 = c1[0] - c0[0], m10 = c1[1] - c0[1];
    const double m01 = c2[0] - c0[0], m11 = c2[1] - c0[1];
    const double a = 1.0 - m00, b = -m01, c = -m10, d = 1.0 - m11;
    const double det = a * d - b * c;
    State z{(d * c0[0] - b * c0[1]) / det, (a * c0[1] - c * c0[0]) / det};

    ClosedFormCumulants out;
    out.periods = 4;
    out.t.resize(n_grid + 1);
    out.occupation.resize(n_grid + 1);
    out.current.resize(n_grid + 1);
    out.noise.resize(n_grid + 1);
    for (int j = 0; j <= n_grid; ++j) {
        const double t = T * j / n_grid;
        if (j > 0) ode::integrate_adaptive(stepper, rhs, z, T * (j - 1) / n_grid, t, T / n_grid);
        const auto k = coeffs(t);
        out.t[j] = t;
        out.occupation[j] = z[0];
        out.current[j] = k.gamma_left * (k.f_left - z[0]);
        out.noise[j] = k.gamma_left * (k.f_left * (1.0 - z[0]) + (1.0 - k.f_left) * z[0]) - 2.0 * k.gamma_left * z[1];
    }
    const double dt = T / n_grid;
    out.Q = trapezoid_uniform(out.current, dt);
    out.dQ2 = trapezoid_uniform(out.noise, dt);
    return out;
}

TotalCumulants total_cumulants(const ChannelDecomposition& dec, const Reservoirs& res, const AdiabaticOptions& opt) {
    TotalCumulants tot;
    require_adiabatic(dec, opt, &tot.metric);
    for (int i = 0; i < 3; ++i) {
        const auto rec = cumulants_joint(channel_generator(dec, static_cast<Channel>(i), res), opt.n_grid, opt.control);
        tot.Q_channel[i] = rec.Q;
        tot.dQ2_channel[i] = rec.dQ2;
        tot.Q += rec.Q;
        tot.dQ2 += rec.dQ2;
    }
    return tot;
}

} // namespace rcpump

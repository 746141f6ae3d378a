// fcs.cpp

#include "rcpump/fcs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace rcpump {

namespace {

const double kC1 = 0.5 - std::sqrt(3.0) / 6.0;
const double kC2 = 0.5 + std::sqrt(3.0) / 6.0;
const double kComm = std::sqrt(3.0) / 12.0;

MatX magnus_step(const std::function<MatX(double)>& A, double t, double h) {
    const MatX A1 = A(t + kC1 * h);
    const MatX A2 = A(t + kC2 * h);
    const MatX Om = 0.5 * h * (A1 + A2) + (kComm * h * h) * (A2 * A1 - A1 * A2);
    return Om.exp();
}

// Solves (I - M) x = rhs restricted to Tr x = trace_value.
VecX solve_constrained(const MatX& M, const VecX& rhs, const VecX& trace, cplx trace_value) {
    const Eigen::Index d = M.rows();
    MatX A(d + 1, d);
    A.topRows(d) = MatX::Identity(d, d) - M;
    A.row(d) = trace.transpose();
    VecX b(d + 1);
    b.head(d) = rhs;
    b(d) = trace_value;
    return A.colPivHouseholderQr().solve(b);
}

std::vector<double> uniform_grid(double T, int n) {
    std::vector<double> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = T * j / n;
    return t;
}

} // namespace

MatX CountingGenerator::counting_matrix(double t, double xi) const {
    const auto g = at(t);
    return g.L + (std::exp(kI * xi) - 1.0) * g.jump_in + (std::exp(-kI * xi) - 1.0) * g.jump_out;
}

MatX propagate_adaptive(const std::function<MatX(double)>& A, double t0, double t1, const StepControl& ctl,
                        double& step, std::int64_t* steps_taken) {
    const MatX probe = A(t0);
    const Eigen::Index d = probe.rows();
    MatX P = MatX::Identity(d, d);
    if (t1 <= t0) return P;
    const double span = t1 - t0;
    const double h_min = ctl.min_step > 0.0 ? ctl.min_step : 1e-12 * span;
    double h = step > 0.0 ? step : (ctl.initial_step > 0.0 ? ctl.initial_step : span / 8.0);
    double t = t0;
    std::int64_t count = 0;
    while (t < t1) {
        const bool last = (t + h >= t1);
        const double hh = last ? t1 - t : h;
        const MatX full = magnus_step(A, t, hh);
        const MatX half = magnus_step(A, t + 0.5 * hh, 0.5 * hh) * magnus_step(A, t, 0.5 * hh);
        const double scale = std::max(1.0, half.cwiseAbs().maxCoeff());
        const double err = (full - half).cwiseAbs().maxCoeff() / (15.0 * scale);
        const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(ctl.rel_tol / err, 0.2), 0.2, 4.0) : 4.0;
        if (err <= ctl.rel_tol || hh <= h_min) {
            if (err > ctl.rel_tol)
                throw StiffnessError("step size underflow at t=" + std::to_string(t) + " (local error " +
                                     std::to_string(err) + ")");
            P = half * P;
            t = last ? t1 : t + hh;
            if (!last || factor < 1.0) h = hh * factor;
            if (++count > ctl.max_steps) throw StiffnessError("step budget exhausted");
        } else {
            h = hh * factor;
        }
    }
    step = h;
    if (steps_taken) *steps_taken += count;
    return P;
}

MatX propagate_fixed(const std::function<MatX(double)>& A, double t0, double t1, int n) {
    const Eigen::Index d = A(t0).rows();
    MatX P = MatX::Identity(d, d);
    const double h = (t1 - t0) / n;
    for (int j = 0; j < n; ++j) P = magnus_step(A, t0 + j * h, h) * P;
    return P;
}

double trapezoid_uniform(const std::vector<double>& y, double dt) {
    if (y.size() < 2) return 0.0;
    double acc = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * dt;
}

CumulantRecord cumulants_periodic(const CountingGenerator& gen, const std::function<VecX(double)>& rho, int n_grid,
                                  const StepControl& ctl) {
    const int D = gen.dim;
    const double T = gen.period();
    const auto A = [&](double t) {
        const auto g = gen.at(t);
        const MatX J1 = g.jump_in - g.jump_out;
        const VecX r = rho(t);
        const cplx I = gen.trace_of(J1 * r);
        MatX a = MatX::Zero(D + 1, D + 1);
        a.topLeftCorner(D, D) = g.L;
        a.topRightCorner(D, 1) = J1 * r - I * r;
        return a;
    };

    CumulantRecord rec;
    rec.t = uniform_grid(T, n_grid);
    std::vector<MatX> P(n_grid + 1);
    P[0] = MatX::Identity(D + 1, D + 1);
    double h = 0.0;
    for (int j = 0; j < n_grid; ++j) P[j + 1] = propagate_adaptive(A, rec.t[j], rec.t[j + 1], ctl, h, &rec.steps) * P[j];

    const MatX M = P[n_grid].topLeftCorner(D, D);
    const VecX c = P[n_grid].topRightCorner(D, 1);
    const VecX X0 = solve_constrained(M, c, gen.trace, 0.0);

    rec.rho.resize(n_grid + 1);
    rec.aux.resize(n_grid + 1);
    rec.current.resize(n_grid + 1);
    rec.noise.resize(n_grid + 1);
    for (int j = 0; j <= n_grid; ++j) {
        VecX X = P[j].topLeftCorner(D, D) * X0 + P[j].topRightCorner(D, 1);
        const VecX r = rho(rec.t[j]);
        const cplx tr = gen.trace_of(X);
        rec.trace_drift = std::max(rec.trace_drift, std::abs(tr));
        if (j == n_grid) rec.period_residual = (X - X0).norm();
        X -= tr * r;
        const auto g = gen.at(rec.t[j]);
        const MatX J1 = g.jump_in - g.jump_out;
        const MatX J2 = g.jump_in + g.jump_out;
        rec.current[j] = gen.trace_of(J1 * r).real();
        rec.noise[j] = (gen.trace_of(J2 * r) + 2.0 * gen.trace_of(J1 * X)).real();
        rec.rho[j] = r;
        rec.aux[j] = X;
    }
    const double dt = T / n_grid;
    rec.Q = trapezoid_uniform(rec.current, dt);
    rec.dQ2 = trapezoid_uniform(rec.noise, dt);
    return rec;
}

CumulantRecord cumulants_joint(const CountingGenerator& gen, int n_grid, const StepControl& ctl) {
    const int D = gen.dim;
    const double T = gen.period();
    const auto A = [&](double t) {
        const auto g = gen.at(t);
        MatX a = MatX::Zero(2 * D, 2 * D);
        a.topLeftCorner(D, D) = g.L;
        a.bottomRightCorner(D, D) = g.L;
        a.bottomLeftCorner(D, D) = g.jump_in - g.jump_out;
        return a;
    };

    CumulantRecord rec;
    rec.t = uniform_grid(T, n_grid);
    std::vector<MatX> P(n_grid + 1);
    P[0] = MatX::Identity(2 * D, 2 * D);
    double h = 0.0;
    for (int j = 0; j < n_grid; ++j) P[j + 1] = propagate_adaptive(A, rec.t[j], rec.t[j + 1], ctl, h, &rec.steps) * P[j];

    const MatX& PT = P[n_grid];
    const MatX M = PT.topLeftCorner(D, D);
    const VecX rho0 = solve_constrained(M, VecX::Zero(D), gen.trace, 1.0);
    const VecX m21 = PT.bottomLeftCorner(D, D) * rho0;
    const cplx Qexact = gen.trace_of(m21);
    const VecX X0 = solve_constrained(PT.bottomRightCorner(D, D), m21 - Qexact * rho0, gen.trace, 0.0);

    rec.rho.resize(n_grid + 1);
    rec.aux.resize(n_grid + 1);
    rec.current.resize(n_grid + 1);
    rec.noise.resize(n_grid + 1);
    for (int j = 0; j <= n_grid; ++j) {
        const VecX r = P[j].topLeftCorner(D, D) * rho0;
        const VecX homog = P[j].bottomRightCorner(D, D) * X0;
        rec.trace_drift = std::max(rec.trace_drift, std::abs(gen.trace_of(homog)));
        const VecX Y = P[j].bottomLeftCorner(D, D) * rho0 + homog;
        const VecX X = Y - gen.trace_of(Y) * r;
        if (j == n_grid) rec.period_residual = (X - X0).norm();
        const auto g = gen.at(rec.t[j]);
        const MatX J1 = g.jump_in - g.jump_out;
        const MatX J2 = g.jump_in + g.jump_out;
        rec.current[j] = gen.trace_of(J1 * r).real();
        rec.noise[j] = (gen.trace_of(J2 * r) + 2.0 * gen.trace_of(J1 * X)).real();
        rec.rho[j] = r;
        rec.aux[j] = X;
    }
    const double dt = T / n_grid;
    rec.Q = trapezoid_uniform(rec.current, dt);
    rec.dQ2 = trapezoid_uniform(rec.noise, dt);
    return rec;
}

std::vector<VecX> propagate_auxiliary(const CountingGenerator& gen, const std::function<VecX(double)>& rho,
                                      const VecX& X0, const std::vector<double>& times, const StepControl& ctl) {
    const int D = gen.dim;
    const auto A = [&](double t) {
        const auto g = gen.at(t);
        const MatX J1 = g.jump_in - g.jump_out;
        const VecX r = rho(t);
        const cplx I = gen.trace_of(J1 * r);
        MatX a = MatX::Zero(D + 1, D + 1);
        a.topLeftCorner(D, D) = g.L;
        a.topRightCorner(D, 1) = J1 * r - I * r;
        return a;
    };
    VecX z(D + 1);
    z.head(D) = X0;
    z(D) = 1.0;
    std::vector<VecX> out;
    out.reserve(times.size());
    double t = 0.0, h = 0.0;
    for (double tk : times) {
        z = propagate_adaptive(A, t, tk, ctl, h) * z;
        t = tk;
        VecX X = z.head(D);
        X -= gen.trace_of(X) * rho(tk);
        z.head(D) = X;
        out.push_back(X);
    }
    return out;
}

FiniteHorizon finite_horizon_cumulants(const CountingGenerator& gen, const VecX& rho0, double horizon,
                                       const StepControl& ctl) {
    const int D = gen.dim;
    const auto A = [&](double t) {
        const auto g = gen.at(t);
        const MatX J1 = g.jump_in - g.jump_out;
        MatX a = MatX::Zero(3 * D, 3 * D);
        for (int b = 0; b < 3; ++b) a.block(b * D, b * D, D, D) = g.L;
        a.block(D, 0, D, D) = J1;
        a.block(2 * D, 0, D, D) = g.jump_in + g.jump_out;
        a.block(2 * D, D, D, D) = 2.0 * J1;
        return a;
    };
    VecX z = VecX::Zero(3 * D);
    z.head(D) = rho0;
    const double T = gen.period();
    double t = 0.0, h = 0.0;
    while (t < horizon) {
        const double t1 = std::min(horizon, t + T);
        z = propagate_adaptive(A, t, t1, ctl, h) * z;
        t = t1;
    }
    FiniteHorizon out;
    out.mean = gen.trace_of(z.segment(D, D)).real();
    out.variance = gen.trace_of(z.segment(2 * D, D)).real() - out.mean * out.mean;
    return out;
}

cplx log_generating_rate(const CountingGenerator& gen, double xi, int n_steps) {
    const auto A = [&](double t) { return gen.counting_matrix(t, xi); };
    const MatX P = propagate_fixed(A, 0.0, gen.period(), n_steps);
    Eigen::ComplexEigenSolver<MatX> es(P, false);
    const auto& ev = es.eigenvalues();
    Eigen::Index imax = 0;
    ev.cwiseAbs().maxCoeff(&imax);
    return std::log(ev(imax));
}

FiniteDifferenceCumulants finite_difference_cumulants(const CountingGenerator& gen, double h, int n_steps) {
    const cplx lp = log_generating_rate(gen, h, n_steps);
    const cplx l0 = log_generating_rate(gen, 0.0, n_steps);
    const cplx lm = log_generating_rate(gen, -h, n_steps);
    FiniteDifferenceCumulants out;
    out.Q = ((lp - lm) / (2.0 * h)).imag();
    out.dQ2 = -((lp - 2.0 * l0 + lm) / (h * h)).real();
    return out;
}

MonteCarloResult mc_trajectory_oracle(const CountingGenerator& gen, const VecX& p0, double horizon, int n_samples,
                                      std::uint64_t seed) {
    const int D = gen.dim;
    const double T = gen.period();
    double bound = 0.0;
    for (int j = 0; j < 4096; ++j) {
        const auto g = gen.at(T * j / 4096);
        for (int s = 0; s < D; ++s) bound = std::max(bound, -g.L(s, s).real());
    }
    bound *= 1.25;
    if (!(bound > 0.0)) bound = 1.0 / T;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::exponential_distribution<double> wait(bound);

    std::vector<double> p(D);
    for (int s = 0; s < D; ++s) p[s] = std::max(0.0, p0(s).real());
    std::discrete_distribution<int> initial(p.begin(), p.end());

    std::vector<double> counts(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        int s = initial(rng);
        double t = 0.0;
        long n = 0;
        for (;;) {
            t += wait(rng);
            if (t > horizon) break;
            const auto g = gen.at(t);
            const double exit = -g.L(s, s).real();
            if (exit > bound) throw std::logic_error("Monte Carlo rate bound violated");
            double v = uni(rng) * bound;
            if (v >= exit) continue;
            int target = s;
            long dn = 0;
            for (int i = 0; i < D; ++i) {
                if (i == s) continue;
                const double in = g.jump_in(i, s).real();
                const double out = g.jump_out(i, s).real();
                const double rest = g.L(i, s).real() - in - out;
                if ((v -= in) < 0.0) {
                    target = i;
                    dn = 1;
                } else if ((v -= out) < 0.0) {
                    target = i;
                    dn = -1;
                } else if ((v -= rest) < 0.0) {
                    target = i;
                }
                if (target != s) break;
            }
            s = target;
            n += dn;
        }
        counts[k] = static_cast<double>(n);
    }

    double mean = 0.0;
    for (double c : counts) mean += c;
    mean /= n_samples;
    double m2 = 0.0, m4 = 0.0;
    for (double c : counts) {
        const double d = c - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double var = m2 / (n_samples - 1);
    m4 /= n_samples;
    MonteCarloResult r;
    r.samples = n_samples;
    r.seed = seed;
    r.horizon = horizon;
    r.mean_rate = mean / horizon;
    r.mean_rate_error = std::sqrt(var / n_samples) / horizon;
    r.variance = var;
    r.variance_error = std::sqrt(std::max(0.0, m4 - var * var) / n_samples);
    r.variance_rate = var / horizon;
    r.variance_rate_error = r.variance_error / horizon;
    return r;
}

} // namespace rcpump

// oracle.cpp — Discretized reservoirs and exact single-particle density-matrix propagation

#include "rcpump/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rcpump {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double DiscretizedBath::coupling_weight() const {
    double s = 0.0;
    for (double t : coupling) s += t * t;
    return s;
}

DiscretizedBath discretize(const SpectralDensity& sd, int n_k, double center, double half_width) {
    if (n_k < 1) throw std::invalid_argument("a discretized bath needs at least one level");
    if (!(half_width > 0.0)) throw std::invalid_argument("bath window half-width must be positive");
    DiscretizedBath b;
    b.spacing = 2.0 * half_width / n_k;
    b.energy.resize(n_k);
    b.coupling.resize(n_k);
    for (int k = 0; k < n_k; ++k) {
        const double e = center - half_width + (k + 0.5) * b.spacing;
        b.energy[k] = e;
        b.coupling[k] = std::sqrt(std::max(0.0, sd.value_or_zero(e)) * b.spacing / kTwoPi);
    }
    return b;
}

MatrixXd QuadraticModel::hamiltonian(double t) const { return h_static + frame * drive(t) * frame.transpose(); }

namespace {

double residual_width(const RCParameters& rc) {
    if (!rc.residual.is_flat()) throw std::invalid_argument("the oracle needs flat residual reservoirs");
    return sd_eval(rc.residual, 0.0) / 2.0;
}

// Unit vector along v, or along the first bath level when v vanishes.
VectorXd direction(const VectorXd& v, int fallback) {
    const double n = v.norm();
    if (n > 0.0) return v / n;
    VectorXd e = VectorXd::Zero(v.size());
    e(fallback) = 1.0;
    return e;
}


void place_bath(QuadraticModel& m, Contact& c, const DiscretizedBath& b, int first, const ReservoirSpec& res) {
    c.coupling = VectorXd::Zero(m.size());
    for (int k = 0; k < b.size(); ++k) {
        m.h_static(first + k, first + k) = b.energy[k];
        c.coupling(first + k) = b.coupling[k];
        c.reservoir.push_back(first + k);
        m.initial_occupation(first + k) = fermi(b.energy[k], res);
    }
    m.revival_time = std::min(m.revival_time, b.revival_time());
}

} // namespace

QuadraticModel original_model(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt) {
    p.validate();
    const int nk = opt.n_k;
    const int n = 1 + 2 * nk;
    QuadraticModel m;
    m.h_static = MatrixXd::Zero(n, n);
    m.initial_occupation = VectorXd::Zero(n);
    m.period = p.driving.period();
    m.revival_time = 1e300;
    m.system_sites = {0};

    const std::array<const RCParameters*, 2> rc = {&p.rc_left, &p.rc_right};
    std::array<double, 2> norm{};
    for (int l = 0; l < 2; ++l) {
        const double delta = residual_width(*rc[l]);
        const double lam = rc[l]->coupling;
        const auto sd = delta > 0.0 ? SpectralDensity::lorentzian(gamma_for_coupling(lam, delta), delta, rc[l]->energy)
                                    : SpectralDensity::flat(0.0);
        const auto bath = discretize(sd, nk, rc[l]->energy, opt.original_half_width);
        auto& c = m.contacts[l];
        c.lead = static_cast<Lead>(l);
        c.site = 0;
        place_bath(m, c, bath, 1 + l * nk, res[c.lead]);
        const Lead lead = c.lead;
        c.modulation = [d = p.driving, lead](double t) { return d.coupling_modulation(lead, t); };
        norm[l] = c.coupling.norm();
    }
    m.frame = MatrixXd::Zero(n, 3);
    m.frame(0, 0) = 1.0;
    m.frame.col(1) = direction(m.contacts[0].coupling, 1);
    m.frame.col(2) = direction(m.contacts[1].coupling, 1 + nk);
    m.drive = [d = p.driving, norm](double t) {
        MatrixXd v = MatrixXd::Zero(3, 3);
        v(0, 0) = d.dot_energy_at(t);
        v(0, 1) = v(1, 0) = d.coupling_modulation(Lead::Left, t) * norm[0];
        v(0, 2) = v(2, 0) = d.coupling_modulation(Lead::Right, t) * norm[1];
        return v;
    };
    return m;
}

QuadraticModel mapped_model(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt) {
    p.validate();
    const int nk = opt.n_k;
    const int n = 3 + 2 * nk;
    QuadraticModel m;
    m.h_static = MatrixXd::Zero(n, n);
    m.initial_occupation = VectorXd::Zero(n);
    m.period = p.driving.period();
    m.revival_time = 1e300;
    m.system_sites = {1};

    const std::array<const RCParameters*, 2> rc = {&p.rc_left, &p.rc_right};
    for (int l = 0; l < 2; ++l) {
        const Lead lead = static_cast<Lead>(l);
        const int rc_site = l == 0 ? 0 : 2;
        const auto bath = discretize(rc[l]->residual, nk, res[lead].mu, opt.residual_half_width);
        Contact residual;
        place_bath(m, residual, bath, 3 + l * nk, res[lead]);
        m.h_static.row(rc_site) += residual.coupling.transpose();
        m.h_static.col(rc_site) += residual.coupling;

        auto& c = m.contacts[l];
        c.lead = lead;
        c.site = 1;
        c.reservoir = residual.reservoir;
        c.reservoir.push_back(rc_site);
        c.coupling = VectorXd::Zero(n);
        c.coupling(rc_site) = p.hopping_sign * rc[l]->coupling;
        c.modulation = [d = p.driving, lead](double t) { return d.coupling_modulation(lead, t); };
    }
    m.frame = MatrixXd::Zero(n, 3);
    m.frame.topLeftCorner(3, 3).setIdentity();
    m.drive = [p](double t) { return MatrixXd(tqd_matrix(p, t).real()); };
    return m;
}

OracleRun run_oracle(const QuadraticModel& m, const OracleOptions& opt) {
    const int n = m.size();
    const int spp = opt.steps_per_period;
    if (spp < 4) throw std::invalid_argument("at least 4 steps per period are required");
    const double T = m.period;
    const double dt = T / spp;

    OracleRun run;
    run.horizon = (opt.relaxation_periods + 1) * T;
    run.revival_time = m.revival_time;
    if (run.horizon > 0.5 * m.revival_time)
        throw std::runtime_error("oracle horizon " + std::to_string(run.horizon) + " exceeds half the bath revival time " +
                                 std::to_string(m.revival_time) + "; refine the bath discretization");

    // Work in the eigenbasis of the static part, G = W g W^T.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.h_static);
    const MatrixXd& W = es.eigenvectors();
    const VectorXd& e = es.eigenvalues();
    const MatX B = (W.transpose() * m.frame).cast<cplx>();
    const MatX Bt = B.transpose();

    MatX g = (W.transpose() * m.initial_occupation.asDiagonal() * W).cast<cplx>();
    const double trace0 = m.initial_occupation.sum();

    VecX phase(n);
    for (int a = 0; a < n; ++a) phase(a) = std::exp(-kI * e(a) * dt);

    std::array<VecX, 2> site_vec, coupling_vec;
    std::array<MatX, 2> bath_proj;
    for (int l = 0; l < 2; ++l) {
        const auto& c = m.contacts[l];
        site_vec[l] = W.row(c.site).transpose().cast<cplx>();
        coupling_vec[l] = (W.transpose() * c.coupling).cast<cplx>();
        MatrixXd rows(c.reservoir.size(), n);
        for (std::size_t i = 0; i < c.reservoir.size(); ++i) rows.row(i) = W.row(c.reservoir[i]);
        bath_proj[l] = (rows.transpose() * rows).cast<cplx>();
    }
    std::vector<VecX> sys_vec;
    for (int s : m.system_sites) sys_vec.push_back(W.row(s).transpose().cast<cplx>());

    // g -> M g M^dagger with M = 1 + B D B^T, as one rank-6 update valid for any g.
    MatX left(n, 6), right(6, n);
    const auto apply_frame = [&](const Mat3& A) {
        const MatX D = MatX(A) - MatX::Identity(3, 3);
        const MatX X = Bt * g;  // 3 x n
        const MatX Y = g * B;   // n x 3
        const MatX Z = X * B;
        left << B, Y * D.adjoint();
        right << D * X + (D * Z * D.adjoint()) * Bt, Bt;
        g.noalias() += left * right;
    };
    const auto half_step = [&](double t) {
        return expm_hermitian(Mat3(m.drive(t + 0.5 * dt).cast<cplx>() * (0.5 * dt)));
    };
    // Consecutive frame half-steps are fused; `pending` is the half-step still owed.
    Mat3 pending = Mat3::Identity();
    const auto step = [&](double t) {
        const Mat3 A = half_step(t);
        apply_frame(A * pending);
        g = phase.asDiagonal() * g * phase.conjugate().asDiagonal();
        pending = A;
    };
    const auto sync = [&]() {
        apply_frame(pending);
        pending = Mat3::Identity();
    };
    const auto current = [&](int l, double t) {
        const cplx x = site_vec[l].dot(g * coupling_vec[l]);
        return -2.0 * m.contacts[l].modulation(t) * x.imag();
    };
    const auto bath_number = [&](int l) { return bath_proj[l].cwiseProduct(g).sum().real(); };
    const auto system_number = [&]() {
        double s = 0.0;
        for (const auto& v : sys_vec) s += v.dot(g * v).real();
        return s;
    };

    const int relax_steps = opt.relaxation_periods * spp;
    for (int j = 0; j < relax_steps; ++j) step(j * dt);
    sync();

    const double t0 = relax_steps * dt;
    const double nl0 = bath_number(0), nr0 = bath_number(1);
    run.t.resize(spp + 1);
    run.current[0].resize(spp + 1);
    run.current[1].resize(spp + 1);
    run.system_occupation.resize(spp + 1);
    for (int j = 0; j <= spp; ++j) {
        const double t = t0 + j * dt;
        if (j > 0) {
            step(t - dt);
            sync();
        }
        run.t[j] = j * dt;
        run.current[0][j] = current(0, t);
        run.current[1][j] = current(1, t);
        run.system_occupation[j] = system_number();
    }
    run.Q = nl0 - bath_number(0);
    run.Q_right = nr0 - bath_number(1);
    run.Q_symmetric = 0.5 * (run.Q - run.Q_right);
    run.Q_integrated = trapezoid_uniform(run.current[0], dt);
    for (int j = 1; j < spp; ++j) {
        const double dn = (run.system_occupation[j + 1] - run.system_occupation[j - 1]) / (2.0 * dt);
        run.conservation_error =
            std::max(run.conservation_error, std::abs(run.current[0][j] + run.current[1][j] - dn));
    }

    run.trace_drift = std::abs(g.trace().real() - trace0);
    run.hermiticity_error = (g - g.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<MatX> eg(MatX(0.5 * (g + g.adjoint())), Eigen::EigenvaluesOnly);
    run.min_eigenvalue = eg.eigenvalues().minCoeff();
    run.max_eigenvalue = eg.eigenvalues().maxCoeff();
    return run;
}

OracleRun run_mapped_oracle(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt) {
    return run_oracle(mapped_model(p, res, opt), opt);
}

OracleComparison compare_representations(const TQDParams& p, const Reservoirs& res, const OracleOptions& opt) {
    OracleComparison c;
    c.original = run_oracle(original_model(p, res, opt), opt);
    c.mapped = run_mapped_oracle(p, res, opt);
    for (std::size_t j = 0; j < c.original.t.size(); ++j)
        c.max_current_deviation =
            std::max(c.max_current_deviation, std::abs(c.original.current[0][j] - c.mapped.current[0][j]));
    const double a = c.original.Q_symmetric, b = c.mapped.Q_symmetric;
    const double scale = std::max(std::abs(a), std::abs(b));
    c.relative_charge_deviation = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
    return c;
}

} // namespace rcpump

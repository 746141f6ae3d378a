// fme.cpp

#include "rcpump/fme.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

namespace rcpump {

namespace block {

namespace {

struct Tables {
    std::array<Pair, kDim> pairs{};
    std::array<std::array<int, 8>, 8> index{};
    VecX trace;
};

const Tables& tables() {
    static const Tables t = [] {
        Tables x;
        int i = 0;
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                x.index[a][b] = -1;
                if (fock::particle_number(a) != fock::particle_number(b)) continue;
                x.pairs[i] = {a, b};
                x.index[a][b] = i++;
            }
        x.trace = VecX::Zero(kDim);
        for (int a = 0; a < 8; ++a) x.trace(x.index[a][a]) = 1.0;
        return x;
    }();
    return t;
}

} // namespace

const std::array<Pair, kDim>& pairs() { return tables().pairs; }
int index(int row, int col) { return tables().index[row][col]; }
const VecX& trace_row() { return tables().trace; }

VecX vec(const Op8& rho) {
    VecX v(kDim);
    for (int i = 0; i < kDim; ++i) v(i) = rho(pairs()[i].row, pairs()[i].col);
    return v;
}

Op8 unvec(const VecX& v) {
    Op8 rho = Op8::Zero();
    for (int i = 0; i < kDim; ++i) rho(pairs()[i].row, pairs()[i].col) = v(i);
    return rho;
}

MatX sandwich(const Op8& A, const Op8& B) {
    const auto& P = pairs();
    MatX M(kDim, kDim);
    for (int p = 0; p < kDim; ++p)
        for (int q = 0; q < kDim; ++q) M(p, q) = A(P[p].row, P[q].row) * B(P[q].col, P[p].col);
    return M;
}

} // namespace block

Reservoirs equal_reservoirs(double beta, double mu) {
    if (!(beta > 0.0)) throw std::invalid_argument("inverse temperature must be positive");
    Reservoirs r;
    r.left = {beta, mu, SpectralDensity::flat(0.0), Lead::Left};
    r.right = {beta, mu, SpectralDensity::flat(0.0), Lead::Right};
    return r;
}

namespace {

Site site_of(Lead l) { return l == Lead::Left ? Site::Left : Site::Right; }

const RCParameters& rc_of(const TQDParams& p, Lead l) { return l == Lead::Left ? p.rc_left : p.rc_right; }

LeadRates lead_rates(const FloquetBasis& basis, const TQDParams& p, const ReservoirSpec& res, Lead lead,
                     double tol) {
    LeadRates lr;
    lr.lead = lead;
    lr.d = fock::annihilation(site_of(lead));
    const auto h = decompose_operator_adaptive(lr.d, basis, tol);
    lr.harmonics = h.n_h;
    lr.decomposition_residual = h.residual;
    const SpectralDensity& J = rc_of(p, lead).residual;

    const int nh = h.n_h;
    std::vector<Op8> w_in(2 * nh + 1, Op8::Zero()), w_out = w_in, e_in = w_in, e_out = w_in;
    lr.secular_in.setZero();
    lr.secular_out.setZero();
    lr.secular_in_energy.setZero();
    lr.secular_out_energy.setZero();
    for (int n = -nh; n <= nh; ++n)
        for (int k = 0; k < 8; ++k)
            for (int l = 0; l < 8; ++l) {
                const cplx s = h.s(k, l, n);
                if (s == cplx{0.0}) continue;
                const double E = -h.transition(k, l, n);
                const double j = J.value_or_zero(E);
                const double f = fermi(E, res);
                w_in[n + nh](k, l) = 0.5 * j * f * s;
                w_out[n + nh](k, l) = 0.5 * j * (1.0 - f) * s;
                e_in[n + nh](k, l) = E * w_in[n + nh](k, l);
                e_out[n + nh](k, l) = E * w_out[n + nh](k, l);
                const double s2 = std::norm(s);
                lr.secular_in(k, l) += j * f * s2;
                lr.secular_out(k, l) += j * (1.0 - f) * s2;
                lr.secular_in_energy(k, l) += E * j * f * s2;
                lr.secular_out_energy(k, l) += E * j * (1.0 - f) * s2;
            }

    const int nt = basis.n_t;
    lr.absorb.resize(nt);
    lr.emit.resize(nt);
    lr.absorb_energy.resize(nt);
    lr.emit_energy.resize(nt);
    for (int j = 0; j < nt; ++j) {
        Op8 a = Op8::Zero(), b = Op8::Zero(), c = Op8::Zero(), d = Op8::Zero();
        for (int n = -nh; n <= nh; ++n) {
            const cplx ph = std::polar(1.0, kTwoPi * n * j / nt);
            a += ph * w_in[n + nh];
            b += ph * w_out[n + nh];
            c += ph * e_in[n + nh];
            d += ph * e_out[n + nh];
        }
        const Op8& V = basis.modes[j];
        lr.absorb[j] = V * a * V.adjoint();
        lr.emit[j] = V * b * V.adjoint();
        lr.absorb_energy[j] = V * c * V.adjoint();
        lr.emit_energy[j] = V * d * V.adjoint();
    }
    return lr;
}

} // namespace

DressedRates build_dressed_rates(const FloquetBasis& basis, const TQDParams& p, const Reservoirs& res,
                                 double harmonic_tol) {
    DressedRates r;
    r.basis = basis;
    r.leads[0] = lead_rates(basis, p, res.left, Lead::Left, harmonic_tol);
    r.leads[1] = lead_rates(basis, p, res.right, Lead::Right, harmonic_tol);
    r.hamiltonian.resize(basis.n_t);
    for (int j = 0; j < basis.n_t; ++j) r.hamiltonian[j] = fock_lift(p, basis.time(j));
    return r;
}

MatX HarmonicSeries::at(double t) const {
    MatX out = c[K];
    for (int k = 1; k <= K; ++k) {
        const cplx ph = std::polar(1.0, k * omega * t);
        out += ph * c[K + k] + std::conj(ph) * c[K - k];
    }
    return out;
}

HarmonicSeries fourier_series(const std::vector<MatX>& samples, double omega, double tol, int max_K) {
    const int n = static_cast<int>(samples.size());
    const Eigen::Index rows = samples[0].rows(), cols = samples[0].cols();
    max_K = std::min(max_K, (n - 1) / 2);
    Eigen::FFT<double> fft;
    std::vector<cplx> in(n), out(n);
    std::vector<MatX> full(n, MatX::Zero(rows, cols));
    double scale = 0.0;
    for (const auto& s : samples) scale = std::max(scale, s.cwiseAbs().maxCoeff());
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            bool any = false;
            for (int j = 0; j < n; ++j) {
                in[j] = samples[j](r, c);
                any = any || in[j] != cplx{0.0};
            }
            if (!any) continue;
            fft.fwd(out, in);
            for (int k = 0; k < n; ++k) full[k](r, c) = out[k] / double(n);
        }
    // tail[k]: sum over |m| > k of the largest coefficient magnitude
    std::vector<double> mag(max_K + 1);
    for (int k = 0; k <= max_K; ++k)
        mag[k] = std::max(full[k].cwiseAbs().maxCoeff(), full[(n - k) % n].cwiseAbs().maxCoeff());
    double beyond = 0.0;
    for (int k = max_K + 1; k <= n / 2; ++k)
        beyond += std::max(full[k].cwiseAbs().maxCoeff(), full[(n - k) % n].cwiseAbs().maxCoeff());
    std::vector<double> tail(max_K + 1, 0.0);
    double acc = beyond;
    for (int k = max_K; k >= 0; --k) {
        tail[k] = acc;
        acc += mag[k];
    }
    int K = max_K;
    const double target = tol * std::max(scale, 1e-300);
    for (int k = 0; k <= max_K; ++k)
        if (tail[k] <= target) {
            K = k;
            break;
        }
    HarmonicSeries hs;
    hs.omega = omega;
    hs.K = K;
    hs.residual = tail[K];
    hs.c.resize(2 * K + 1);
    for (int k = -K; k <= K; ++k) hs.c[k + K] = full[(k + n) % n];
    return hs;
}

GeneratorSamples sample_generator(const DressedRates& rates, bool secular) {
    const int nt = rates.basis.n_t;
    const Op8 id = Op8::Identity();
    GeneratorSamples g;
    g.L.resize(nt);
    for (int l = 0; l < 2; ++l) {
        g.jump_in[l].resize(nt);
        g.jump_out[l].resize(nt);
        g.energy_in[l].resize(nt);
        g.energy_out[l].resize(nt);
    }
    for (int j = 0; j < nt; ++j) {
        const Op8& H = rates.hamiltonian[j];
        MatX L = -kI * (block::sandwich(H, id) - block::sandwich(id, H));
        for (int l = 0; l < 2; ++l) {
            const LeadRates& lr = rates.leads[l];
            const Op8& d = lr.d;
            const Op8 dd = d.adjoint();
            MatX Jin, Jout, Ein, Eout;
            if (!secular) {
                const Op8& ai = lr.absorb[j];
                const Op8& ao = lr.emit[j];
                Jin = block::sandwich(dd, ai) + block::sandwich(ai.adjoint(), d);
                Jout = block::sandwich(ao, dd) + block::sandwich(d, ao.adjoint());
                L += Jin + Jout;
                L -= block::sandwich(id, Op8(ai * dd)) + block::sandwich(Op8(d * ai.adjoint()), id);
                L -= block::sandwich(Op8(dd * ao), id) + block::sandwich(id, Op8(ao.adjoint() * d));
                const Op8& ei = lr.absorb_energy[j];
                const Op8& eo = lr.emit_energy[j];
                Ein = block::sandwich(dd, ei) + block::sandwich(ei.adjoint(), d);
                Eout = block::sandwich(eo, dd) + block::sandwich(d, eo.adjoint());
            } else {
                const Op8& V = rates.basis.modes[j];
                Jin = MatX::Zero(block::kDim, block::kDim);
                Jout = Jin;
                Ein = Jin;
                Eout = Jin;
                Op8 G = Op8::Zero();
                for (int k = 0; k < 8; ++k)
                    for (int m = 0; m < 8; ++m) {
                        const double gi = lr.secular_in(k, m), go = lr.secular_out(k, m);
                        if (gi == 0.0 && go == 0.0) continue;
                        const Op8 A = V.col(k) * V.col(m).adjoint();  // |k><m|, removes one electron
                        const MatX in = block::sandwich(A.adjoint(), A);
                        const MatX out = block::sandwich(A, A.adjoint());
                        Jin += gi * in;
                        Jout += go * out;
                        Ein += lr.secular_in_energy(k, m) * in;
                        Eout += lr.secular_out_energy(k, m) * out;
                        G += go * V.col(m) * V.col(m).adjoint() + gi * V.col(k) * V.col(k).adjoint();
                    }
                L += Jin + Jout - 0.5 * (block::sandwich(G, id) + block::sandwich(id, G));
            }
            g.jump_in[l][j] = std::move(Jin);
            g.jump_out[l][j] = std::move(Jout);
            g.energy_in[l][j] = std::move(Ein);
            g.energy_out[l][j] = std::move(Eout);
        }
        g.L[j] = std::move(L);
    }
    return g;
}

LiouvillianHarmonics build_liouvillian(const DressedRates& rates, const LiouvillianOptions& opt) {
    const auto g = sample_generator(rates, opt.secular);
    const double w = rates.basis.omega;
    LiouvillianHarmonics out;
    out.omega = w;
    out.secular = opt.secular;
    out.L = fourier_series(g.L, w, opt.tol, opt.max_harmonics);
    if (out.L.residual > opt.tol * 10.0)
        throw ConvergenceError("generator harmonics not converged (residual " + std::to_string(out.L.residual) +
                               "); increase the time grid or the harmonic cap");
    for (int l = 0; l < 2; ++l) {
        out.jump_in[l] = fourier_series(g.jump_in[l], w, opt.tol, opt.max_harmonics);
        out.jump_out[l] = fourier_series(g.jump_out[l], w, opt.tol, opt.max_harmonics);
        out.energy_in[l] = fourier_series(g.energy_in[l], w, opt.tol, opt.max_harmonics);
        out.energy_out[l] = fourier_series(g.energy_out[l], w, opt.tol, opt.max_harmonics);
    }
    return out;
}

MatX LiouvillianHarmonics::generator(double t, double xi) const {
    return L.at(t) + (std::exp(kI * xi) - 1.0) * jump_in[0].at(t) + (std::exp(-kI * xi) - 1.0) * jump_out[0].at(t);
}

CountingGenerator LiouvillianHarmonics::counting(Lead lead) const {
    const int l = static_cast<int>(lead);
    CountingGenerator gen;
    gen.dim = block::kDim;
    gen.omega = omega;
    gen.trace = block::trace_row();
    gen.at = [L = L, in = jump_in[l], out = jump_out[l]](double t) {
        return GeneratorSample{L.at(t), in.at(t), out.at(t)};
    };
    return gen;
}

VecX PeriodicState::at(double t) const {
    VecX v = rho[N];
    for (int n = 1; n <= N; ++n) {
        const cplx ph = std::polar(1.0, n * omega * t);
        v += ph * rho[N + n] + std::conj(ph) * rho[N - n];
    }
    return v;
}

PeriodicState solve_periodic_state(const LiouvillianHarmonics& Lh, int N, int n_check) {
    if (N < 1) throw std::invalid_argument("state harmonic cutoff must be positive");
    constexpr int D = block::kDim;
    const int K = Lh.K();
    const int nb = 2 * N + 1;
    const lapack_int n = D * nb;
    const lapack_int kl = std::min<lapack_int>(D * std::min(K, nb - 1) + D - 1, n - 1);
    const lapack_int ku = kl;
    const lapack_int ldab = 2 * kl + ku + 1;
    std::vector<cplx> ab(static_cast<std::size_t>(ldab) * n, cplx{0.0});
    auto put = [&](lapack_int i, lapack_int j, cplx v) {
        ab[static_cast<std::size_t>(kl + ku + i - j) + static_cast<std::size_t>(j) * ldab] = v;
    };
    const int norm_row = N * D + block::index(0, 0);
    for (int bn = 0; bn < nb; ++bn) {
        const int nn = bn - N;
        for (int k = -K; k <= K; ++k) {
            const int bm = bn - k;
            if (bm < 0 || bm >= nb) continue;
            const MatX& Lk = Lh.L[k];
            for (int p = 0; p < D; ++p) {
                const lapack_int row = bn * D + p;
                if (row == norm_row) continue;
                for (int q = 0; q < D; ++q) {
                    cplx v = -Lk(p, q);
                    if (k == 0 && p == q) v += kI * (nn * Lh.omega);
                    if (v != cplx{0.0}) put(row, bm * D + q, v);
                }
            }
        }
    }
    for (int q = 0; q < D; ++q)
        if (block::trace_row()(q) != cplx{0.0}) put(norm_row, N * D + q, 1.0);
    std::vector<cplx> b(n, cplx{0.0});
    b[norm_row] = 1.0;
    std::vector<lapack_int> ipiv(n);
    const lapack_int info = LAPACKE_zgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), b.data(), n);
    if (info != 0) throw std::runtime_error("periodic-state system is singular (zgbsv info " + std::to_string(info) + ")");

    PeriodicState st;
    st.omega = Lh.omega;
    st.N = N;
    st.rho.resize(nb);
    for (int bn = 0; bn < nb; ++bn) {
        VecX v(D);
        for (int q = 0; q < D; ++q) v(q) = b[bn * D + q];
        st.rho[bn] = std::move(v);
    }
    st.tail_norm = std::max(st.rho.front().norm(), st.rho.back().norm());
    for (int nn = 0; nn <= N; ++nn) {
        const Op8 a = block::unvec(st[nn]);
        const Op8 b2 = block::unvec(st[-nn]);
        st.hermiticity_error = std::max(st.hermiticity_error, (b2 - a.adjoint()).cwiseAbs().maxCoeff());
    }
    st.min_population = 1.0;
    const double T = kTwoPi / Lh.omega;
    for (int j = 0; j < n_check; ++j) {
        const Op8 r = st.density(T * j / n_check);
        Eigen::SelfAdjointEigenSolver<Op8> es(Op8(0.5 * (r + r.adjoint())), Eigen::EigenvaluesOnly);
        st.min_population = std::min(st.min_population, es.eigenvalues().minCoeff());
    }
    return st;
}

PeriodicState solve_periodic_state_adaptive(const LiouvillianHarmonics& Lh, double tail_tol, int max_N,
                                            int n_check) {
    int N = std::max(8, Lh.K());
    for (;;) {
        auto st = solve_periodic_state(Lh, N, n_check);
        if (st.tail_norm < tail_tol) return st;
        if (N >= max_N)
            throw ConvergenceError("periodic state tail norm " + std::to_string(st.tail_norm) + " at N=" +
                                   std::to_string(N) + "; raise the harmonic cutoff");
        N = std::min(max_N, 2 * N);
    }
}

namespace {

CurrentTrace current_trace(const PeriodicState& rho, const HarmonicSeries& in, const HarmonicSeries& out,
                           int n_grid) {
    CurrentTrace c;
    const double T = kTwoPi / rho.omega;
    c.t.resize(n_grid + 1);
    c.value.resize(n_grid + 1);
    for (int j = 0; j <= n_grid; ++j) {
        const double t = T * j / n_grid;
        c.t[j] = t;
        const VecX r = rho.at(t);
        c.value[j] = (block::trace_row().transpose() * ((in.at(t) - out.at(t)) * r))(0).real();
    }
    c.integral = trapezoid_uniform(c.value, T / n_grid);
    return c;
}

} // namespace

CurrentTrace matter_current(const PeriodicState& rho, const LiouvillianHarmonics& L, Lead lead, int n_grid) {
    const int l = static_cast<int>(lead);
    return current_trace(rho, L.jump_in[l], L.jump_out[l], n_grid);
}

CurrentTrace energy_current(const PeriodicState& rho, const LiouvillianHarmonics& L, Lead lead, int n_grid) {
    const int l = static_cast<int>(lead);
    return current_trace(rho, L.energy_in[l], L.energy_out[l], n_grid);
}

FMEResult run_fme(const TQDParams& p, const Reservoirs& res, const FMEOptions& opt) {
    const auto basis = solve_floquet(p, opt.n_t);
    const auto rates = build_dressed_rates(basis, p, res, opt.harmonic_tol);
    const auto Lh = build_liouvillian(rates, opt.liouvillian);
    const auto st = opt.fixed_state_harmonics > 0
                        ? solve_periodic_state(Lh, opt.fixed_state_harmonics)
                        : solve_periodic_state_adaptive(Lh, opt.tail_tol, opt.max_state_harmonics);
    FMEResult r;
    r.Q = matter_current(st, Lh, Lead::Left).integral;
    r.Q_right = matter_current(st, Lh, Lead::Right).integral;
    r.energy_left = energy_current(st, Lh, Lead::Left).integral;
    r.energy_right = energy_current(st, Lh, Lead::Right).integral;
    r.tail_norm = st.tail_norm;
    r.min_population = st.min_population;
    r.hermiticity_error = st.hermiticity_error;
    r.state_harmonics = st.N;
    r.generator_harmonics = Lh.K();
    if (opt.noise) {
        const auto rec = cumulants_periodic(Lh.counting(Lead::Left), [&st](double t) { return st.at(t); },
                                            opt.noise_grid, opt.noise_control);
        r.dQ2 = rec.dQ2;
    }
    return r;
}

} // namespace rcpump

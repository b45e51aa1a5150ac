#pragma once

#include <cbl/base_flow.hpp>
#include <cbl/energy.hpp>
#include <cbl/linear_solver.hpp>
#include <cbl/transforms.hpp>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>

namespace cbl {

/// Full spectral state: modes k = 0..K, negative wavenumbers implied by
/// reality (f_{-k} = conj(f_k)); omega_0 and theta_0 purely real.
struct FlowField {
    int K = 0;
    const ChannelGrid* grid = nullptr;
    std::vector<CVec> omega, theta;
    mutable std::vector<CVec> psi;
    mutable bool psi_valid = false;

    static FlowField zero(const ChannelGrid& g, int K) {
        FlowField f;
        f.K = K;
        f.grid = &g;
        f.omega.assign(K + 1, CVec::Zero(g.size()));
        f.theta.assign(K + 1, CVec::Zero(g.size()));
        f.psi.assign(K + 1, CVec::Zero(g.size()));
        return f;
    }

    void enforce_invariants() {
        const int n = grid->n_y;
        for (int k = 0; k <= K; ++k) {
            omega[k][0] = theta[k][0] = Complex(0, 0);
            omega[k][n] = theta[k][n] = Complex(0, 0);
        }
        omega[0] = omega[0].real().cast<Complex>();
        theta[0] = theta[0].real().cast<Complex>();
        psi_valid = false;
    }

    double max_imaginary_zero_mode() const {
        return std::max(omega[0].imag().cwiseAbs().maxCoeff(),
                        theta[0].imag().cwiseAbs().maxCoeff());
    }
};

struct NonlinearRun {
    double mu = 1e-3, nu = 1e-3;
    double m = 1.0;
    double delta1 = 0.125;
    double dt = 0.0;        // 0: pick min(CFL/2, 0.05 lambda^{1/3})
    double T = 0.0;         // 0: pick 2 lambda^{-1/3}
    int sample_every = 0;   // 0: ~200 samples over the run
    double lambda() const { return std::min(mu, nu); }
};

/// Pseudo-spectral advection + IMEX stepping for the sigma = 1 system.
/// Products are formed on a padded grid in both directions (x: enough
/// Fourier points that every retained mode of a quadratic product is
/// alias-free; y: 3/2 Chebyshev padding via fast cosine transforms).
class NonlinearStepper {
  public:
    NonlinearStepper(const ChannelGrid& grid, int K, const BaseFlow& bf, const NonlinearRun& run)
        : grid_(grid), K_(K), bf_(bf), run_(run),
          nf_((3 * grid.n_y) / 2 + ((3 * grid.n_y) / 2) % 2),
          M_(fft_size(3 * (K + 1))),
          cheb_coarse_(grid.n_y), cheb_fine_(nf_), four_(M_) {
        const int n = grid.n_y;
        d2i_ = grid.d2.block(1, 1, n - 1, n - 1);
        u_int_ = bf.u.segment(1, n - 1);
        upp_int_ = bf.u2.segment(1, n - 1);
        Mat zop = d2i_;
        poisson_.emplace_back(zop);  // k = 0
        for (int k = 1; k <= K; ++k)
            poisson_.emplace_back(Mat(d2i_ - double(k) * double(k) * Mat::Identity(n - 1, n - 1)));
        size_t plane = size_t(nf_ + 1) * M_;
        for (auto* b : {&u1_, &u2_, &fx_, &fy_, &gx_, &gy_, &advw_, &advt_})
            b->assign(plane, 0.0);
    }

    const ChannelGrid& grid() const { return grid_; }
    int K() const { return K_; }
    double max_base_speed() const { return bf_.u.cwiseAbs().maxCoeff(); }

    void prepare(double dt) {
        if (dt <= 0.0) throw std::invalid_argument("nonlinear_step: dt must be positive");
        dt_ = dt;
        const int n = grid_.n_y;
        lu_th_.clear();
        lu_om_.clear();
        lth_.clear();
        lom_.clear();
        Mat I = Mat::Identity(n - 1, n - 1);
        for (int k = 0; k <= K_; ++k) {
            double k2 = double(k) * double(k);
            lth_.push_back(run_.nu * (d2i_ - k2 * I));
            lom_.push_back(run_.mu * (d2i_ - k2 * I));
            lu_th_.emplace_back(Mat(I - imex::gamma() * dt * lth_.back()));
            lu_om_.emplace_back(Mat(I - imex::gamma() * dt * lom_.back()));
        }
    }

    /// Perturbation-velocity amplitude of the current state (for CFL checks).
    double max_velocity(const FlowField& f) {
        refresh_psi(f);
        fill_velocity_planes(f);
        double m = 0.0;
        for (double v : u1_) m = std::max(m, std::abs(v));
        for (double v : u2_) m = std::max(m, std::abs(v));
        return m;
    }

    void check_cfl(const FlowField& f, double dt) {
        double umax = max_velocity(f);
        double bound = dt * (K_ * max_base_speed() +
                             umax * std::max(double(K_), 0.5 * grid_.n_y * grid_.n_y));
        if (bound > 0.5 + 1e-12)
            throw std::invalid_argument("nonlinear_step: advective CFL violated");
    }

    /// (u . grad f)_k for every k, pseudo-spectral production path.
    /// Returns the pair (advection of omega, advection of theta).
    std::pair<std::vector<CVec>, std::vector<CVec>> advection(const FlowField& f) {
        refresh_psi(f);
        fill_velocity_planes(f);
        to_fine_physical(derivative_x(f.omega), fx_);
        to_fine_physical(derivative_y(f.omega), fy_);
        to_fine_physical(derivative_x(f.theta), gx_);
        to_fine_physical(derivative_y(f.theta), gy_);
        for (size_t i = 0; i < advw_.size(); ++i) {
            advw_[i] = u1_[i] * fx_[i] + u2_[i] * fy_[i];
            advt_[i] = u1_[i] * gx_[i] + u2_[i] * gy_[i];
        }
        return {from_fine_physical(advw_), from_fine_physical(advt_)};
    }

    /// Direct convolution-in-k realization of the same sums; the test
    /// oracle for small K.
    std::pair<std::vector<CVec>, std::vector<CVec>> advection_direct(const FlowField& f) {
        refresh_psi(f);
        const int n = grid_.n_y;
        auto get = [&](const std::vector<CVec>& arr, int k) -> CVec {
            if (k >= 0) return arr[k];
            return arr[-k].conjugate();
        };
        std::vector<CVec> dpsi(K_ + 1), dom(K_ + 1), dth(K_ + 1);
        for (int k = 0; k <= K_; ++k) {
            dpsi[k] = grid_.d1 * f.psi[k];
            dom[k] = grid_.d1 * f.omega[k];
            dth[k] = grid_.d1 * f.theta[k];
        }
        std::vector<CVec> aw(K_ + 1, CVec::Zero(n + 1)), at(K_ + 1, CVec::Zero(n + 1));
        for (int k = 0; k <= K_; ++k) {
            for (int l = -K_; l <= K_; ++l) {
                int kl = k - l;
                if (std::abs(kl) > K_) continue;
                CVec dpsi_kl = get(dpsi, kl);
                CVec psi_kl = get(f.psi, kl);
                Complex il(0.0, double(l)), ikl(0.0, double(kl));
                aw[k] += dpsi_kl.cwiseProduct(CVec(il * get(f.omega, l))) -
                         CVec(ikl * psi_kl).cwiseProduct(get(dom, l));
                at[k] += dpsi_kl.cwiseProduct(CVec(il * get(f.theta, l))) -
                         CVec(ikl * psi_kl).cwiseProduct(get(dth, l));
            }
        }
        return {aw, at};
    }

    FlowField step(const FlowField& s) {
        if (dt_ <= 0.0) throw std::logic_error("nonlinear_step: call prepare(dt) first");
        const int n = grid_.n_y;
        const double dt = dt_, g = imex::gamma(), d = imex::delta();
        auto [f1om, f1th] = explicit_rhs(s);
        FlowField s2 = s;
        for (int k = 0; k <= K_; ++k) {
            s2.omega[k] = embed(solve(lu_om_[k], interior(s.omega[k]) + g * dt * f1om[k]));
            s2.theta[k] = embed(solve(lu_th_[k], interior(s.theta[k]) + g * dt * f1th[k]));
        }
        s2.enforce_invariants();
        auto [f2om, f2th] = explicit_rhs(s2);
        FlowField out = s;
        for (int k = 0; k <= K_; ++k) {
            CVec g2om = lom_[k] * interior(s2.omega[k]);
            CVec g2th = lth_[k] * interior(s2.theta[k]);
            out.omega[k] = embed(solve(
                lu_om_[k], interior(s.omega[k]) +
                               dt * (d * f1om[k] + (1.0 - d) * f2om[k] + (1.0 - g) * g2om)));
            out.theta[k] = embed(solve(
                lu_th_[k], interior(s.theta[k]) +
                               dt * (d * f1th[k] + (1.0 - d) * f2th[k] + (1.0 - g) * g2th)));
        }
        out.enforce_invariants();
        for (int k = 0; k <= K_; ++k)
            if (!out.omega[k].allFinite() || !out.theta[k].allFinite())
                throw std::runtime_error("nonlinear_step: non-finite state (NaN abort)");
        return out;
    }

    void refresh_psi(const FlowField& f) const {
        if (f.psi_valid) return;
        for (int k = 0; k <= K_; ++k) {
            Vec re = poisson_[k].solve(f.omega[k].segment(1, grid_.n_y - 1).real().eval());
            Vec im = poisson_[k].solve(f.omega[k].segment(1, grid_.n_y - 1).imag().eval());
            CVec p = CVec::Zero(grid_.size());
            for (int j = 1; j < grid_.n_y; ++j) p[j] = Complex(re[j - 1], im[j - 1]);
            f.psi[k] = p;
        }
        f.psi_valid = true;
    }

  private:
    static int fft_size(int minimum) {
        int m = minimum;
        if (m % 2 == 1) ++m;
        return m;
    }

    CVec interior(const CVec& v) const { return v.segment(1, grid_.n_y - 1); }

    CVec embed(const CVec& v) const {
        CVec out = CVec::Zero(grid_.size());
        out.segment(1, grid_.n_y - 1) = v;
        return out;
    }

    static CVec solve(const Eigen::PartialPivLU<Mat>& lu, const CVec& rhs) {
        Vec re = lu.solve(rhs.real().eval());
        Vec im = lu.solve(rhs.imag().eval());
        CVec out(rhs.size());
        for (int i = 0; i < rhs.size(); ++i) out[i] = Complex(re[i], im[i]);
        return out;
    }

    std::vector<CVec> derivative_x(const std::vector<CVec>& f) const {
        std::vector<CVec> out(K_ + 1);
        for (int k = 0; k <= K_; ++k) out[k] = Complex(0.0, double(k)) * f[k];
        return out;
    }

    std::vector<CVec> derivative_y(const std::vector<CVec>& f) const {
        std::vector<CVec> out(K_ + 1);
        for (int k = 0; k <= K_; ++k) out[k] = grid_.d1 * f[k];
        return out;
    }

    void fill_velocity_planes(const FlowField& f) {
        std::vector<CVec> u1(K_ + 1), u2(K_ + 1);
        for (int k = 0; k <= K_; ++k) {
            u1[k] = grid_.d1 * f.psi[k];
            u2[k] = Complex(0.0, -double(k)) * f.psi[k];
        }
        to_fine_physical(u1, u1_);
        to_fine_physical(u2, u2_);
    }

    /// spectral (K+1 modes on the coarse y grid) -> padded physical plane
    void to_fine_physical(const std::vector<CVec>& modes, std::vector<double>& plane) {
        const int n = grid_.n_y;
        std::vector<double> re(n + 1), im(n + 1), cre(n + 1), cim(n + 1);
        std::vector<double> fre(nf_ + 1), fim(nf_ + 1);
        CMat fine(nf_ + 1, K_ + 1);
        for (int k = 0; k <= K_; ++k) {
            for (int j = 0; j <= n; ++j) {
                re[j] = modes[k][j].real();
                im[j] = modes[k][j].imag();
            }
            cheb_coarse_.to_coeffs(re.data(), cre.data());
            cheb_coarse_.to_coeffs(im.data(), cim.data());
            cheb_fine_.to_nodal(cre.data(), n + 1, fre.data());
            cheb_fine_.to_nodal(cim.data(), n + 1, fim.data());
            for (int j = 0; j <= nf_; ++j) fine(j, k) = Complex(fre[j], fim[j]);
        }
        std::vector<Complex> row(K_ + 1);
        std::vector<double> phys(M_);
        for (int j = 0; j <= nf_; ++j) {
            for (int k = 0; k <= K_; ++k) row[k] = fine(j, k);
            four_.to_physical(row.data(), K_, phys.data());
            for (int x = 0; x < M_; ++x) plane[size_t(j) * M_ + x] = phys[x];
        }
    }

    /// padded physical plane -> spectral on the coarse grid (truncating)
    std::vector<CVec> from_fine_physical(const std::vector<double>& plane) {
        const int n = grid_.n_y;
        CMat fine(nf_ + 1, K_ + 1);
        std::vector<double> phys(M_);
        std::vector<Complex> row(K_ + 1);
        for (int j = 0; j <= nf_; ++j) {
            for (int x = 0; x < M_; ++x) phys[x] = plane[size_t(j) * M_ + x];
            four_.to_modes(phys.data(), row.data(), K_);
            for (int k = 0; k <= K_; ++k) fine(j, k) = row[k];
        }
        std::vector<CVec> out(K_ + 1, CVec::Zero(n + 1));
        std::vector<double> fre(nf_ + 1), fim(nf_ + 1), cre(nf_ + 1), cim(nf_ + 1);
        std::vector<double> nre(n + 1), nim(n + 1);
        for (int k = 0; k <= K_; ++k) {
            for (int j = 0; j <= nf_; ++j) {
                fre[j] = fine(j, k).real();
                fim[j] = fine(j, k).imag();
            }
            cheb_fine_.to_coeffs(fre.data(), cre.data());
            cheb_fine_.to_coeffs(fim.data(), cim.data());
            cheb_coarse_.to_nodal(cre.data(), n + 1, nre.data());
            cheb_coarse_.to_nodal(cim.data(), n + 1, nim.data());
            for (int j = 0; j <= n; ++j) out[k][j] = Complex(nre[j], nim[j]);
        }
        return out;
    }

    std::pair<std::vector<CVec>, std::vector<CVec>> explicit_rhs(const FlowField& s) {
        auto [aw, at] = advection(s);
        const int n = grid_.n_y;
        std::vector<CVec> fom(K_ + 1), fth(K_ + 1);
        for (int k = 0; k <= K_; ++k) {
            Complex ik(0.0, double(k));
            CVec om = interior(s.omega[k]), th = interior(s.theta[k]);
            CVec psi = interior(s.psi[k]);
            fom[k] = (-ik) * u_int_.cwiseProduct(om.matrix()).eval() +
                     ik * upp_int_.cwiseProduct(psi.matrix()).eval() - ik * th - interior(aw[k]);
            fth[k] = (-ik) * u_int_.cwiseProduct(th.matrix()).eval() - interior(at[k]);
        }
        return {fom, fth};
    }

    const ChannelGrid& grid_;
    int K_;
    BaseFlow bf_;
    NonlinearRun run_;
    int nf_, M_;
    ChebTransform cheb_coarse_, cheb_fine_;
    FourierTransform four_;
    Mat d2i_;
    Vec u_int_, upp_int_;
    std::vector<Eigen::PartialPivLU<Mat>> poisson_;
    std::vector<Mat> lth_, lom_;
    std::vector<Eigen::PartialPivLU<Mat>> lu_th_, lu_om_;
    std::vector<double> u1_, u2_, fx_, fy_, gx_, gy_, advw_, advt_;
    double dt_ = -1.0;
};

/// Aggregated functionals of a full field at time t.
inline EnergyBreakdown aggregate_script_energies(const FlowField& f, double t, double mu,
                                                 double nu, const FunctionalConstants& c,
                                                 const std::vector<JkOperator>* jks = nullptr,
                                                 bool include_cbeta_term = true) {
    const ChannelGrid& g = *f.grid;
    EnergyBreakdown b;
    b.t = t;
    double lam = std::min(mu, nu);
    double wz = std::exp(2.0 * c.delta1 * lam * t);
    double wn = std::exp(2.0 * c.delta1 * std::cbrt(lam) * t);
    b.e_theta.assign(f.K + 1, 0.0);
    b.e_omega.assign(f.K + 1, 0.0);
    b.dis.assign(f.K + 1, DissipationComponents{});
    // zero mode quadratic forms
    CVec dth0 = g.d1 * f.theta[0], dom0 = g.d1 * f.omega[0];
    CVec ddth0 = g.d1 * dth0, ddom0 = g.d1 * dom0;
    b.e_theta[0] = 16.0 * l2_norm_sq(g, f.theta[0]) + std::pow(nu, 2.0 / 3.0) * l2_norm_sq(g, dth0);
    b.e_omega[0] = 128.0 * l2_norm_sq(g, f.omega[0]) + 4.0 * std::pow(mu, 2.0 / 3.0) * l2_norm_sq(g, dom0);
    b.script_e_theta_zero = wz * b.e_theta[0];
    b.script_e_omega_zero = wz * b.e_omega[0];
    b.script_d_theta_zero =
        wz * (32.0 * nu * l2_norm_sq(g, dth0) + 2.0 * std::pow(nu, 5.0 / 3.0) * l2_norm_sq(g, ddth0));
    b.script_d_omega_zero =
        wz * (256.0 * mu * l2_norm_sq(g, dom0) + 8.0 * std::pow(mu, 5.0 / 3.0) * l2_norm_sq(g, ddom0));
    if (!f.psi_valid)
        throw std::logic_error("aggregate_script_energies: psi cache stale");
    for (int k = 1; k <= f.K; ++k) {
        const JkOperator* jk = (jks && k - 1 < int(jks->size())) ? &(*jks)[k - 1] : nullptr;
        b.e_theta[k] = energy_theta_k(g, k, f.theta[k], nu);
        b.e_omega[k] = energy_omega_k(g, k, f.omega[k], mu, c, jk, include_cbeta_term);
        b.dis[k] = dissipation_components(g, k, f.omega[k], f.theta[k], f.psi[k], mu, nu);
        double wk = 2.0 * std::pow(double(k), 2.0 * c.m);  // +-k pair
        b.nonzero_e_theta_unweighted += wk * b.e_theta[k];
        b.nonzero_e_omega_unweighted += wk * b.e_omega[k];
        for (int i = 0; i < 3; ++i) b.script_d_theta_neq += wn * wk * b.dis[k].dis_theta[i];
        for (int i = 0; i < 5; ++i) b.script_d_omega_neq += wn * wk * b.dis[k].dis_omega[i];
    }
    b.script_e_theta_neq = wn * b.nonzero_e_theta_unweighted;
    b.script_e_omega_neq = wn * b.nonzero_e_omega_unweighted;
    return b;
}

struct NonlinearResult {
    FlowField final_field;
    std::vector<EnergyBreakdown> samples;
    bool stable = true;
    bool aborted = false;
    std::string abort_reason;
};

inline NonlinearResult run_nonlinear(const FlowField& f0, const NonlinearRun& run,
                                     const BaseFlow& bf,
                                     const std::vector<JkOperator>* jks = nullptr,
                                     const std::function<void(const EnergyBreakdown&)>& on_sample = {}) {
    const ChannelGrid& g = *f0.grid;
    FunctionalConstants consts;
    consts.delta1 = run.delta1;
    consts.m = run.m;
    NonlinearStepper stepper(g, f0.K, bf, run);
    double lam = run.lambda();
    double T = run.T > 0.0 ? run.T : 2.0 * std::pow(lam, -1.0 / 3.0);
    double dt = run.dt;
    if (dt <= 0.0) {
        FlowField tmp = f0;
        double umax = stepper.max_velocity(tmp);
        double cfl = 0.5 / std::max(1e-12, f0.K * stepper.max_base_speed() +
                                              umax * std::max(double(f0.K), 0.5 * g.n_y * g.n_y));
        dt = std::min(0.5 * cfl, 0.05 * std::cbrt(lam));
    }
    int nsteps = std::max(1, int(std::ceil(T / dt - 1e-12)));
    dt = T / nsteps;
    int cadence = run.sample_every > 0 ? run.sample_every : std::max(1, nsteps / 200);
    stepper.prepare(dt);
    FlowField s = f0;
    s.enforce_invariants();
    stepper.check_cfl(s, dt);
    NonlinearResult res;
    auto sample = [&](const FlowField& f, double t) {
        stepper.refresh_psi(f);
        EnergyBreakdown b = aggregate_script_energies(f, t, run.mu, run.nu, consts, jks);
        if (on_sample) on_sample(b);
        res.samples.push_back(std::move(b));
    };
    sample(s, 0.0);
    double e_th0 = res.samples[0].script_e_theta();
    double e_om0 = res.samples[0].script_e_omega();
    for (int i = 0; i < nsteps; ++i) {
        try {
            s = stepper.step(s);
        } catch (const std::runtime_error& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            res.stable = false;
            break;
        }
        if ((i + 1) % cadence == 0 || i + 1 == nsteps) {
            sample(s, (i + 1) * dt);
            const EnergyBreakdown& b = res.samples.back();
            if (b.script_e_theta() > 10.0 * e_th0 + 1e-300 ||
                b.script_e_omega() > 10.0 * e_om0 + 1e-300)
                res.stable = false;
        }
    }
    res.final_field = s;
    return res;
}

/// Initial data sized to the stability-threshold budgets: per-mode profile
/// sin(pi(y+1)) on modes k = 1..4 with k^{-m} weights, scaled so
///   sum_{j<=1} || (coef^{1/3} d_y)^j <dx>^{m-j/3} f ||_{L2}
/// (Parseval over modes, +-k pairs counted) equals the requested budget.
inline FlowField theorem_initial_data(const ChannelGrid& g, int K, double mu, double nu,
                                      double eps0, double eps1, double m,
                                      double amplitude_multiplier = 1.0) {
    if (K < 4) throw std::invalid_argument("theorem_initial_data: need K >= 4");
    FlowField f = FlowField::zero(g, K);
    Vec prof(g.size());
    for (int i = 0; i < g.size(); ++i)
        prof[i] = std::sin(M_PI * (g.nodes[i] + 1.0));
    prof[0] = prof[g.n_y] = 0.0;
    double np2 = l2_norm(g, prof);
    np2 *= np2;
    Vec dprof = g.d1 * prof;
    double ndp2 = l2_norm(g, dprof);
    ndp2 *= ndp2;
    auto budget_scale = [&](double coef, double budget) {
        double S = 0.0;
        for (int j = 0; j <= 1; ++j) {
            double acc = 0.0;
            for (int k = 1; k <= 4; ++k) {
                double ak = 0.5 * std::pow(double(k), -m);
                double wgt = std::pow(1.0 + double(k) * double(k), m - j / 3.0);
                double base = (j == 0) ? np2 : ndp2;
                acc += 2.0 * ak * ak * wgt * wgt * base * std::pow(coef, 2.0 * j / 3.0);
            }
            S += std::sqrt(acc);
        }
        return budget / S;
    };
    double budget_om = eps0 * std::min(std::sqrt(mu), std::sqrt(nu)) * amplitude_multiplier;
    double budget_th = eps1 * std::min(mu, nu) * amplitude_multiplier;
    double c_om = budget_scale(mu, budget_om);
    double c_th = budget_scale(nu, budget_th);
    for (int k = 1; k <= 4; ++k) {
        double ao = 0.5 * c_om * std::pow(double(k), -m);
        double at = 0.5 * c_th * std::pow(double(k), -m);
        f.omega[k] = ao * prof.cast<Complex>();
        f.theta[k] = at * prof.cast<Complex>();
    }
    return f;
}

// ----- checkpoint format -----
// header: magic "CBLB", version u32, K u64, n_y u64, mu f64, nu f64, t f64,
// little-endian; then row-major complex omega blocks (k = 0..K), then theta.

inline void save_checkpoint(const std::string& path, const FlowField& f, double mu, double nu,
                            double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write("CBLB", 4);
    uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 4);
    uint64_t K = f.K, ny = f.grid->n_y;
    out.write(reinterpret_cast<const char*>(&K), 8);
    out.write(reinterpret_cast<const char*>(&ny), 8);
    out.write(reinterpret_cast<const char*>(&mu), 8);
    out.write(reinterpret_cast<const char*>(&nu), 8);
    out.write(reinterpret_cast<const char*>(&t), 8);
    auto write_block = [&](const std::vector<CVec>& b) {
        for (const CVec& v : b)
            for (int j = 0; j < v.size(); ++j) {
                double re = v[j].real(), im = v[j].imag();
                out.write(reinterpret_cast<const char*>(&re), 8);
                out.write(reinterpret_cast<const char*>(&im), 8);
            }
    };
    write_block(f.omega);
    write_block(f.theta);
    if (!out) throw std::runtime_error("save_checkpoint: write failed");
}

struct CheckpointHeader {
    uint64_t K = 0, n_y = 0;
    double mu = 0, nu = 0, t = 0;
};

inline CheckpointHeader load_checkpoint(const std::string& path, const ChannelGrid& g,
                                        FlowField& f) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CBLB", 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic");
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
    CheckpointHeader h;
    in.read(reinterpret_cast<char*>(&h.K), 8);
    in.read(reinterpret_cast<char*>(&h.n_y), 8);
    in.read(reinterpret_cast<char*>(&h.mu), 8);
    in.read(reinterpret_cast<char*>(&h.nu), 8);
    in.read(reinterpret_cast<char*>(&h.t), 8);
    if (h.n_y != uint64_t(g.n_y))
        throw std::runtime_error("load_checkpoint: grid size mismatch");
    f = FlowField::zero(g, int(h.K));
    auto read_block = [&](std::vector<CVec>& b) {
        for (CVec& v : b)
            for (int j = 0; j < v.size(); ++j) {
                double re, im;
                in.read(reinterpret_cast<char*>(&re), 8);
                in.read(reinterpret_cast<char*>(&im), 8);
                v[j] = Complex(re, im);
            }
    };
    read_block(f.omega);
    read_block(f.theta);
    if (!in) throw std::runtime_error("load_checkpoint: truncated file");
    return h;
}

} // namespace cbl

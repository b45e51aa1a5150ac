#pragma once

#include <cbl/base_flow.hpp>
#include <cbl/energy.hpp>
#include <cbl/poisson.hpp>
#include <functional>
#include <vector>

namespace cbl {

/// Two-stage IMEX coefficients (stiffly accurate, second order):
/// implicit gamma-diagonal scheme with explicit companions.
namespace imex {
inline constexpr double gamma() { return 1.0 - M_SQRT1_2; }
inline constexpr double delta() { return 1.0 - 1.0 / (2.0 * (1.0 - M_SQRT1_2)); }
}

enum class BaseFlowPolicy { FrozenAtStart, CoEvolving };

/// Per-mode linearized problem for one nonzero wavenumber:
///   d th / dt = -ik U th + nu (-sigma k^2 + d2) th
///   d om / dt = -ik U om + ik U'' psi - ik th + mu (-sigma k^2 + d2) om
/// with Dirichlet rows pinned every stage. theta forces omega, never the
/// reverse.
class LinearModeProblem {
  public:
    LinearModeProblem(const ChannelGrid& grid, int k, int sigma, double mu, double nu,
                      const BaseFlow& bf, BaseFlowPolicy policy = BaseFlowPolicy::FrozenAtStart)
        : grid_(grid), k_(k), sigma_(sigma), mu_(mu), nu_(nu), bf_(bf), policy_(policy),
          poisson_(grid, k) {
        if (k == 0) throw std::invalid_argument("LinearModeProblem: k must be nonzero");
        if (sigma != 0 && sigma != 1) throw std::invalid_argument("sigma must be 0 or 1");
        if (mu <= 0.0 || nu <= 0.0) throw std::invalid_argument("mu, nu must be positive");
        // boundary-layer resolution guard for the enhanced-dissipation regime
        if (sigma == 0 && grid.n_y < 4.0 * std::pow(nu, -0.25))
            throw std::invalid_argument("resolution guard: need n_y >= 4 nu^{-1/4}");
        const int n = grid.n_y;
        d2i_ = grid.d2.block(1, 1, n - 1, n - 1);
        u_int_ = bf.u.segment(1, n - 1);
        upp_int_ = bf.u2.segment(1, n - 1);
        if (policy_ == BaseFlowPolicy::CoEvolving)
            w_state_ = bf.w;
    }

    const ChannelGrid& grid() const { return grid_; }
    int k() const { return k_; }
    int sigma() const { return sigma_; }
    double mu() const { return mu_; }
    double nu() const { return nu_; }
    double max_speed() const { return bf_.u.cwiseAbs().maxCoeff(); }

    struct State {
        double t = 0.0;
        CVec omega;  // full grid, boundary rows zero
        CVec theta;
    };

    State make_state(const CVec& omega0, const CVec& theta0) const {
        State s;
        s.omega = omega0;
        s.theta = theta0;
        pin(s.omega); pin(s.theta);
        return s;
    }

    void prepare(double dt) {
        if (dt <= 0.0) throw std::invalid_argument("linear_step: dt must be positive");
        if (dt * std::abs(double(k_)) * max_speed() > 0.5 + 1e-12)
            throw std::invalid_argument("linear_step: advective CFL violated (dt |k| max|U| > 0.5)");
        dt_ = dt;
        const int n = grid_.n_y;
        double sk2 = sigma_ * double(k_) * double(k_);
        Mat I = Mat::Identity(n - 1, n - 1);
        lth_ = nu_ * (d2i_ - sk2 * I);
        lom_ = mu_ * (d2i_ - sk2 * I);
        lu_th_.compute(I - imex::gamma() * dt * lth_);
        lu_om_.compute(I - imex::gamma() * dt * lom_);
    }

    State step(const State& s) const {
        if (dt_ <= 0.0) throw std::logic_error("linear_step: call prepare(dt) first");
        const int n = grid_.n_y;
        const double dt = dt_, g = imex::gamma(), d = imex::delta();
        CVec om = s.omega.segment(1, n - 1), th = s.theta.segment(1, n - 1);
        auto [f1om, f1th] = explicit_rhs(om, th);
        CVec om2 = solve(lu_om_, om + g * dt * f1om);
        CVec th2 = solve(lu_th_, th + g * dt * f1th);
        auto [f2om, f2th] = explicit_rhs(om2, th2);
        CVec g2om = lom_ * om2, g2th = lth_ * th2;
        CVec om3 = solve(lu_om_, om + dt * (d * f1om + (1.0 - d) * f2om + (1.0 - g) * g2om));
        CVec th3 = solve(lu_th_, th + dt * (d * f1th + (1.0 - d) * f2th + (1.0 - g) * g2th));
        State out;
        out.t = s.t + dt;
        out.omega = CVec::Zero(n + 1);
        out.theta = CVec::Zero(n + 1);
        out.omega.segment(1, n - 1) = om3;
        out.theta.segment(1, n - 1) = th3;
        if (!out.omega.allFinite() || !out.theta.allFinite())
            throw std::runtime_error("linear_step: non-finite state (NaN abort) at t = " +
                                     std::to_string(out.t));
        return out;
    }

    /// Advance the co-evolving base flow by dt (no-op when frozen).
    void advance_base_flow(double dt) {
        if (policy_ != BaseFlowPolicy::CoEvolving) return;
        HeatEvolver he(grid_, mu_);
        w_state_ = he.evolve(w_state_, dt);
        BaseFlow bf = assemble_base_flow(grid_, w_state_, 0.0, bf_.delta0_budget);
        const int n = grid_.n_y;
        u_int_ = bf.u.segment(1, n - 1);
        upp_int_ = bf.u2.segment(1, n - 1);
    }

    CVec psi_of(const CVec& omega_full) const { return poisson_.solve(omega_full); }

  private:
    static void pin(CVec& v) {
        v[0] = Complex(0.0, 0.0);
        v[v.size() - 1] = Complex(0.0, 0.0);
    }

    std::pair<CVec, CVec> explicit_rhs(const CVec& om, const CVec& th) const {
        const int n = grid_.n_y;
        CVec om_full = CVec::Zero(n + 1);
        om_full.segment(1, n - 1) = om;
        CVec psi = poisson_.solve(om_full);
        CVec psi_int = psi.segment(1, n - 1);
        Complex ik(0.0, double(k_));
        CVec fth = (-ik) * u_int_.cwiseProduct(th.matrix()).eval();
        CVec fom = (-ik) * u_int_.cwiseProduct(om.matrix()).eval() +
                   ik * upp_int_.cwiseProduct(psi_int.matrix()).eval() - ik * th;
        return {fom, fth};
    }

    static CVec solve(const Eigen::PartialPivLU<Mat>& lu, const CVec& rhs) {
        Vec re = lu.solve(rhs.real().eval());
        Vec im = lu.solve(rhs.imag().eval());
        CVec out(rhs.size());
        for (int i = 0; i < rhs.size(); ++i) out[i] = Complex(re[i], im[i]);
        return out;
    }

    const ChannelGrid& grid_;
    int k_, sigma_;
    double mu_, nu_;
    BaseFlow bf_;
    BaseFlowPolicy policy_;
    ModePoissonSolver poisson_;
    Mat d2i_, lth_, lom_;
    Vec u_int_, upp_int_;
    Vec w_state_;
    Eigen::PartialPivLU<Mat> lu_th_, lu_om_;
    double dt_ = -1.0;
};

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<double> theta_l2, dtheta_l2, omega_l2, domega_l2;
    std::vector<double> e_theta, e_omega;
    std::vector<DissipationComponents> dis;
    /// Theorem-side quantity ||th||^2 + nu^{2/3}|k|^{-2/3}||th'||^2
    std::vector<double> theta_weighted_sq;
    std::vector<double> omega_weighted_sq;
    LinearModeProblem::State final_state;
};

struct EvolveOptions {
    double T = 1.0;
    double dt = 0.02;
    int sample_every = 1;
    const JkOperator* jk = nullptr;  // for the c_alpha term in E_omega
    FunctionalConstants constants;
    bool include_cbeta_term = false;
};

inline ModeTrajectory evolve_mode(LinearModeProblem& pb, const LinearModeProblem::State& s0,
                                  const EvolveOptions& opt) {
    ModeTrajectory tr;
    int nsteps = std::max(1, int(std::ceil(opt.T / opt.dt - 1e-12)));
    double dt = opt.T / nsteps;
    pb.prepare(dt);
    const ChannelGrid& g = pb.grid();
    auto sample = [&](const LinearModeProblem::State& s) {
        tr.times.push_back(s.t);
        CVec dth = g.d1 * s.theta, dom = g.d1 * s.omega;
        double t2 = l2_norm_sq(g, s.theta), dt2 = l2_norm_sq(g, dth);
        double o2 = l2_norm_sq(g, s.omega), do2 = l2_norm_sq(g, dom);
        tr.theta_l2.push_back(std::sqrt(t2));
        tr.dtheta_l2.push_back(std::sqrt(dt2));
        tr.omega_l2.push_back(std::sqrt(o2));
        tr.domega_l2.push_back(std::sqrt(do2));
        double ka = std::abs(double(pb.k()));
        tr.theta_weighted_sq.push_back(t2 + std::pow(pb.nu(), 2.0 / 3.0) * std::pow(ka, -2.0 / 3.0) * dt2);
        tr.omega_weighted_sq.push_back(o2 + std::pow(pb.mu(), 2.0 / 3.0) * std::pow(ka, -2.0 / 3.0) * do2);
        tr.e_theta.push_back(energy_theta_k(g, pb.k(), s.theta, pb.nu()));
        tr.e_omega.push_back(energy_omega_k(g, pb.k(), s.omega, pb.mu(), opt.constants, opt.jk,
                                            opt.include_cbeta_term));
        CVec psi = pb.psi_of(s.omega);
        tr.dis.push_back(dissipation_components(g, pb.k(), s.omega, s.theta, psi, pb.mu(), pb.nu()));
    };
    LinearModeProblem::State s = s0;
    sample(s);
    for (int i = 0; i < nsteps; ++i) {
        s = pb.step(s);
        pb.advance_base_flow(dt);
        if ((i + 1) % opt.sample_every == 0 || i + 1 == nsteps)
            sample(s);
    }
    tr.final_state = s;
    return tr;
}

/// Least-squares slope of -log(q) over the window; default window skips
/// the initial transient t < 0.2 / (nu^{1/3} |k|^{2/3}).
inline double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& q,
                             double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        if (!(q[i] > 0.0))
            throw std::invalid_argument("fit_decay_rate: nonpositive sample inside window");
        double x = times[i], y = -std::log(q[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_decay_rate: window contains fewer than 2 samples");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double default_fit_window_start(double coeff, int k) {
    return 0.2 / (std::pow(coeff, 1.0 / 3.0) * std::pow(std::abs(double(k)), 2.0 / 3.0));
}

} // namespace cbl

#pragma once

#include <cbl/grid.hpp>
#include <Eigen/LU>
#include <optional>
#include <vector>

namespace cbl {

/// Channel Green's kernel for d^2/dy^2 with homogeneous Dirichlet data,
/// normalized so that d2G/dy2 = delta(y - y'). Negative on the interior.
inline double greens_channel(double y, double yp) {
    double lo = std::min(y, yp), hi = std::max(y, yp);
    return 0.5 * (lo + 1.0) * (hi - 1.0);
}

/// dG/dy away from the kink at y = y'.
inline double greens_channel_dy(double y, double yp) {
    return (y < yp) ? 0.5 * (yp - 1.0) : 0.5 * (yp + 1.0);
}

/// Near-Couette base flow snapshot. u1 = 1 + w is the structural identity
/// the whole linear analysis leans on.
struct BaseFlow {
    double t = 0.0;
    Vec w;              // W(t, .)
    Vec u, u1, u2, u3;  // U, U', U'', U'''
    double delta0_budget = 0.01;
    bool hypothesis_violated = false;  // ||W||_{H^4} > delta0
};

/// Crank-Nicolson evolution of dW/dt = mu d2W/dy2, W(+-1) = 0.
/// Base step 0.005; the actual step divides t exactly so that composed
/// evolutions over commensurate times take identical step sequences.
class HeatEvolver {
  public:
    HeatEvolver(const ChannelGrid& grid, double mu)
        : grid_(grid), mu_(mu) {
        if (mu <= 0.0) throw std::invalid_argument("HeatEvolver: mu must be positive");
        const int n = grid.n_y;
        d2i_ = grid.d2.block(1, 1, n - 1, n - 1);
    }

    Vec evolve(const Vec& w_in, double t) const {
        const int n = grid_.n_y;
        if (w_in.size() != grid_.size())
            throw std::invalid_argument("heat_evolve: length mismatch");
        if (std::abs(w_in[0]) > 1e-12 || std::abs(w_in[n]) > 1e-12)
            throw std::invalid_argument("heat_evolve: input must vanish at y = +-1");
        if (t < 0.0) throw std::invalid_argument("heat_evolve: t must be nonnegative");
        if (t == 0.0) {
            Vec out = w_in;
            out[0] = 0.0; out[n] = 0.0;
            return out;
        }
        int nsteps = std::max(1, int(std::ceil(t / base_step_ - 1e-12)));
        double dt = t / nsteps;
        Mat I = Mat::Identity(n - 1, n - 1);
        Eigen::PartialPivLU<Mat> lu(I - 0.5 * mu_ * dt * d2i_);
        Mat B = I + 0.5 * mu_ * dt * d2i_;
        Vec v = w_in.segment(1, n - 1);
        for (int s = 0; s < nsteps; ++s)
            v = lu.solve(B * v);
        Vec out = Vec::Zero(n + 1);
        out.segment(1, n - 1) = v;
        return out;
    }

    double mu() const { return mu_; }
    const ChannelGrid& grid() const { return grid_; }

  private:
    const ChannelGrid& grid_;
    double mu_;
    Mat d2i_;
    double base_step_ = 0.005;
};

inline Vec heat_evolve(const ChannelGrid& grid, const Vec& w_in, double mu, double t) {
    return HeatEvolver(grid, mu).evolve(w_in, t);
}

/// U from the closed-form kernel: U(y) = y + int dG/dy(y,y') W(y') dy'.
/// The kink at y' = y is handled by splitting the integral; both halves
/// are polynomials in y' times W, so panelwise Gauss-Legendre against the
/// Chebyshev interpolant of W is exact to roundoff.
inline Vec base_flow_u_direct(const ChannelGrid& grid, const Vec& w) {
    const int n = grid.n_y;
    Vec a = cheb_coeffs(grid, w);
    GaussRule gl = gauss_legendre(n + 8);
    Vec out(n + 1);
    for (int i = 0; i <= n; ++i) {
        double yi = grid.nodes[i];
        double acc = 0.0;
        // y' < yi : dG/dy = (y'+1)/2 ; y' > yi : dG/dy = (y'-1)/2
        for (int side = 0; side < 2; ++side) {
            double lo = side == 0 ? -1.0 : yi;
            double hi = side == 0 ? yi : 1.0;
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            if (half <= 0.0) continue;
            for (int q = 0; q < gl.x.size(); ++q) {
                double yp = mid + half * gl.x[q];
                double ker = side == 0 ? 0.5 * (yp + 1.0) : 0.5 * (yp - 1.0);
                acc += half * gl.w[q] * ker * cheb_eval<double>(a, yp);
            }
        }
        out[i] = yi + acc;
    }
    return out;
}

inline BaseFlow assemble_base_flow(const ChannelGrid& grid, const Vec& w, double t,
                                   double delta0 = 0.01) {
    const int n = grid.n_y;
    if (w.size() != grid.size())
        throw std::invalid_argument("assemble_base_flow: length mismatch");
    if (std::abs(w[0]) > 1e-12 || std::abs(w[n]) > 1e-12)
        throw std::invalid_argument("assemble_base_flow: W must vanish at y = +-1");
    BaseFlow bf;
    bf.t = t;
    bf.w = w;
    bf.w[0] = 0.0; bf.w[n] = 0.0;
    bf.delta0_budget = delta0;
    // antiderivative route: U(y) = U(-1) + int_{-1}^{y} (1 + W)
    // with U(-1) fixed by the kernel formula at y = -1.
    double u_left = -1.0;
    for (int j = 0; j <= n; ++j)
        u_left += grid.quad_weights[j] * 0.5 * (grid.nodes[j] - 1.0) * w[j];
    Vec anti = cheb_antiderivative(grid, bf.w);
    bf.u = Vec(n + 1);
    for (int j = 0; j <= n; ++j)
        bf.u[j] = u_left + (grid.nodes[j] + 1.0) + anti[j];
    bf.u1 = Vec::Ones(n + 1) + bf.w;
    bf.u2 = grid.d1 * bf.w;
    bf.u3 = grid.d2 * bf.w;
    bf.hypothesis_violated = sobolev_h4_norm(grid, bf.w) > delta0;
    return bf;
}

/// Couette: W = 0.
inline BaseFlow couette_base_flow(const ChannelGrid& grid, double delta0 = 0.01) {
    return assemble_base_flow(grid, Vec::Zero(grid.size()), 0.0, delta0);
}

struct WEstimateReport {
    bool all_below_budget = true;      // ||W(t)||_{H^4} <= delta0 whenever W_in is
    bool nonincreasing = true;         // within slack
    double max_ratio = 0.0;            // sup_t ||W(t)||_{H^4} / ||W_in||_{H^4}
    std::vector<double> h4_norms;
};

inline WEstimateReport check_w_estimate(const ChannelGrid& grid,
                                        const std::vector<std::pair<double, Vec>>& trajectory,
                                        double delta0) {
    WEstimateReport rep;
    if (trajectory.empty()) return rep;
    double n0 = sobolev_h4_norm(grid, trajectory.front().second);
    double prev = n0;
    for (const auto& [t, wt] : trajectory) {
        double n = sobolev_h4_norm(grid, wt);
        rep.h4_norms.push_back(n);
        if (n > prev + 1e-10) rep.nonincreasing = false;
        prev = n;
        if (n0 <= delta0 && n > delta0 + 1e-12) rep.all_below_budget = false;
        if (n0 > 0.0) rep.max_ratio = std::max(rep.max_ratio, n / n0);
    }
    return rep;
}

/// Zero-mode Poisson solve d2 psi0 / dy2 = omega0 with psi0(+-1) = 0.
/// Per-k solvers live elsewhere; the k = 0 inversion belongs with the
/// channel kernel G above.
inline CVec solve_poisson_zero_mode(const ChannelGrid& grid, const CVec& omega0) {
    const int n = grid.n_y;
    Mat d2i = grid.d2.block(1, 1, n - 1, n - 1);
    Eigen::PartialPivLU<Mat> lu(d2i);
    CVec out = CVec::Zero(n + 1);
    Vec re = lu.solve(omega0.segment(1, n - 1).real().eval());
    Vec im = lu.solve(omega0.segment(1, n - 1).imag().eval());
    for (int j = 1; j < n; ++j) out[j] = Complex(re[j - 1], im[j - 1]);
    return out;
}

} // namespace cbl

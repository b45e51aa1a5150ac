#pragma once

#include <cbl/grid.hpp>
#include <Eigen/LU>

namespace cbl {

namespace detail {
/// log(sinh x) for x > 0 without overflow.
inline double log_sinh(double x) {
    return x + std::log1p(-std::exp(-2.0 * x)) - M_LN2;
}
} // namespace detail

/// Green's function of Delta_k = d2/dy2 - k^2 with homogeneous Dirichlet
/// data: Delta_k G_k(., y') = delta(. - y'). Symmetric, nonpositive,
/// vanishing on the boundary. Evaluated in log space so large |k| does
/// not overflow (safe to |k| ~ 1e4).
inline double greens_gk(int k, double y, double yp) {
    if (k == 0) throw std::invalid_argument("greens_gk: k must be nonzero");
    if (std::abs(y) > 1.0 + 1e-14 || std::abs(yp) > 1.0 + 1e-14)
        throw std::invalid_argument("greens_gk: arguments must lie in [-1,1]");
    double ka = std::abs(double(k));
    double lo = std::min(y, yp), hi = std::max(y, yp);
    double a = ka * (1.0 - hi), b = ka * (1.0 + lo);
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (ka < 150.0) {
        return -std::sinh(a) * std::sinh(b) / (ka * std::sinh(2.0 * ka));
    }
    double lg = detail::log_sinh(a) + detail::log_sinh(b) - std::log(ka) - detail::log_sinh(2.0 * ka);
    return -std::exp(lg);
}

/// Per-mode Biot-Savart inversion. The collocation solve is the production
/// path; the Green's-quadrature matrix is kept for cross-validation and
/// reuses the same panel-split rule as the singular-integral machinery
/// (the kernel has a kink at y' = y, so each half is integrated on its
/// own Gauss-Legendre panel against the Chebyshev interpolant).
class ModePoissonSolver {
  public:
    ModePoissonSolver(const ChannelGrid& grid, int k, bool build_greens_matrix = false)
        : grid_(grid), k_(k) {
        if (k == 0)
            throw std::invalid_argument("ModePoissonSolver: k must be nonzero (zero mode lives with the base flow)");
        const int n = grid.n_y;
        Mat op = grid.d2.block(1, 1, n - 1, n - 1) - double(k) * double(k) * Mat::Identity(n - 1, n - 1);
        lu_.compute(op);
        if (build_greens_matrix) build_greens();
    }

    int k() const { return k_; }
    const ChannelGrid& grid() const { return grid_; }

    /// psi with psi(+-1) = 0 and Delta_k psi = omega at interior nodes.
    CVec solve(const CVec& omega) const {
        const int n = grid_.n_y;
        if (omega.size() != grid_.size())
            throw std::invalid_argument("solve_poisson_k: length mismatch");
        CVec out = CVec::Zero(n + 1);
        Vec re = lu_.solve(omega.segment(1, n - 1).real().eval());
        Vec im = lu_.solve(omega.segment(1, n - 1).imag().eval());
        for (int j = 1; j < n; ++j) out[j] = Complex(re[j - 1], im[j - 1]);
        return out;
    }

    /// psi by quadrature against G_k; requires build_greens_matrix.
    CVec solve_via_greens(const CVec& omega) const {
        if (greens_.size() == 0)
            throw std::logic_error("solve_via_greens: Green's matrix not built");
        return greens_ * omega;
    }

    const Mat& greens_matrix() const { return greens_; }

  private:
    void build_greens() {
        const int n = grid_.n_y;
        GaussRule gl = gauss_legendre(n + 16);
        greens_ = Mat::Zero(n + 1, n + 1);
        Vec tvals(n + 1);
        for (int i = 1; i < n; ++i) {
            double yi = grid_.nodes[i];
            Vec coeff_row = Vec::Zero(n + 1);  // against Chebyshev coefficients
            for (int side = 0; side < 2; ++side) {
                double lo = side == 0 ? -1.0 : yi;
                double hi = side == 0 ? yi : 1.0;
                double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                if (half <= 0.0) continue;
                for (int q = 0; q < gl.x.size(); ++q) {
                    double yp = mid + half * gl.x[q];
                    double gv = greens_gk(k_, yi, yp);
                    double wq = half * gl.w[q] * gv;
                    // accumulate T_m(yp)
                    double t0 = 1.0, t1 = yp;
                    coeff_row[0] += wq;
                    if (n >= 1) coeff_row[1] += wq * t1;
                    for (int m = 2; m <= n; ++m) {
                        double t2 = 2.0 * yp * t1 - t0;
                        coeff_row[m] += wq * t2;
                        t0 = t1; t1 = t2;
                    }
                }
            }
            greens_.row(i) = (coeff_row.transpose() * grid_.nodal_to_cheb);
        }
    }

    const ChannelGrid& grid_;
    int k_;
    Eigen::PartialPivLU<Mat> lu_;
    Mat greens_;
};

/// u = (d psi/dy, -ik psi).
inline std::pair<CVec, CVec> velocity_from_psi(const ChannelGrid& grid, int k, const CVec& psi) {
    CVec u1 = grid.d1 * psi;
    CVec u2 = Complex(0.0, -double(k)) * psi;
    return {u1, u2};
}

struct VorticityIdentityReport {
    double lhs = 0.0;              // ||omega||^2 with omega = Delta_k psi
    double rhs = 0.0;              // k^4||psi||^2 + ||psi''||^2 + 2k^2||psi'||^2
    double equality_defect = 0.0;  // |lhs - rhs| / max(lhs, tiny)
    double lower_bound_rhs = 0.0;  // (|k| ||psi|| + |k| ||psi'||)^2 / 2
    bool lower_bound_holds = false;
};

inline VorticityIdentityReport vorticity_identity_check(const ChannelGrid& grid, int k,
                                                        const CVec& psi) {
    VorticityIdentityReport rep;
    CVec dpsi = grid.d1 * psi;
    CVec ddpsi = grid.d2 * psi;
    double k2 = double(k) * double(k);
    CVec omega = ddpsi - k2 * psi;
    rep.lhs = l2_norm_sq(grid, omega);
    double np = l2_norm_sq(grid, psi), ndp = l2_norm_sq(grid, dpsi), nddp = l2_norm_sq(grid, ddpsi);
    rep.rhs = k2 * k2 * np + nddp + 2.0 * k2 * ndp;
    rep.equality_defect = std::abs(rep.lhs - rep.rhs) / std::max(rep.lhs, 1e-300);
    double s = std::abs(double(k)) * (std::sqrt(np) + std::sqrt(ndp));
    rep.lower_bound_rhs = 0.5 * s * s;
    rep.lower_bound_holds = rep.lhs >= rep.lower_bound_rhs * (1.0 - 1e-9) - 1e-12;
    return rep;
}

} // namespace cbl

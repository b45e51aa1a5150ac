#pragma once

#include <cbl/base_flow.hpp>
#include <cbl/poisson.hpp>

namespace cbl {

/// Taylor-remainder machinery around the base shear:
///   h(y,y') = (1/(y-y')) int_y^{y'} U'''(s) (y'-s)^2 ds,  h(y,y) = 0.
/// U''' is supplied as a callable so the same code serves sampled base
/// flows (via Chebyshev evaluation) and closed-form test profiles.
class TaylorRemainder {
  public:
    template <typename F>
    TaylorRemainder(F&& uppp) : uppp_(std::forward<F>(uppp)), gl_(gauss_legendre(24)) {}

    explicit TaylorRemainder(const ChannelGrid& grid, const BaseFlow& bf)
        : gl_(gauss_legendre(24)) {
        Vec a = cheb_coeffs(grid, bf.u3);
        uppp_ = [a](double s) { return cheb_eval<double>(a, s); };
    }

    double uppp(double s) const { return uppp_(s); }

    /// int_y^{y'} U'''(s)(y'-s)^2 ds
    double remainder_integral(double y, double yp) const {
        double mid = 0.5 * (y + yp), half = 0.5 * (yp - y);
        double acc = 0.0;
        for (int q = 0; q < gl_.x.size(); ++q) {
            double s = mid + half * gl_.x[q];
            double d = yp - s;
            acc += gl_.w[q] * uppp_(s) * d * d;
        }
        return acc * half;
    }

    /// int_y^{y'} 2 (y'-s) U'''(s) ds (the y'-derivative of the above)
    double remainder_integral_dyp(double y, double yp) const {
        double mid = 0.5 * (y + yp), half = 0.5 * (yp - y);
        double acc = 0.0;
        for (int q = 0; q < gl_.x.size(); ++q) {
            double s = mid + half * gl_.x[q];
            acc += gl_.w[q] * 2.0 * (yp - s) * uppp_(s);
        }
        return acc * half;
    }

    double h(double y, double yp) const {
        double d = y - yp;
        if (std::abs(d) < 1e-8) {
            // 3-point Gauss on the defining integral; the quotient of the
            // two tiny quantities stays well scaled.
            if (d == 0.0) return 0.0;
            static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
            static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            double mid = 0.5 * (y + yp), half = 0.5 * (yp - y);
            double acc = 0.0;
            for (int q = 0; q < 3; ++q) {
                double s = mid + half * gx[q];
                double dd = yp - s;
                acc += gw[q] * uppp_(s) * dd * dd;
            }
            return acc * half / d;
        }
        return remainder_integral(y, yp) / d;
    }

    double h_dy(double y, double yp) const {
        double d = y - yp;
        if (std::abs(d) < 1e-8) return 0.0;
        double hv = h(y, yp);
        return -uppp_(y) * d * d / d - hv / d;  // = -U'''(y)(y-y') - h/(y-y')
    }

    double h_dyp(double y, double yp) const {
        double d = y - yp;
        if (std::abs(d) < 1e-8) return 0.0;
        return remainder_integral_dyp(y, yp) / d + h(y, yp) / d;
    }

    double h_dy_dyp(double y, double yp) const {
        double d = y - yp;
        if (std::abs(d) < 1e-8) return 2.0 * uppp_(y);  // limit value
        double R1 = remainder_integral_dyp(y, yp);
        return (-2.0 * (yp - y) * uppp_(y)) / d + R1 / (d * d) + h_dy(y, yp) / d + h(y, yp) / (d * d);
    }

  private:
    std::function<double(double)> uppp_;
    GaussRule gl_;
};

/// Sampled kernels K1 = (y-y') U''(y) G_k(y,y') and K2 = h(y,y') G_k(y,y')
/// together with d1-differentiated variants along each axis.
struct KernelField {
    int k = 0;
    Mat k1, k2;
    Mat k1_dy, k1_dyp, k1_dydyp;
    Mat k2_dy, k2_dyp, k2_dydyp;
};

inline KernelField build_kernel_field(const ChannelGrid& grid, const BaseFlow& bf, int k) {
    if (k == 0) throw std::invalid_argument("build_kernel_field: k must be nonzero");
    const int n = grid.n_y;
    KernelField kf;
    kf.k = k;
    TaylorRemainder tr(grid, bf);
    kf.k1 = Mat(n + 1, n + 1);
    kf.k2 = Mat(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
        double yi = grid.nodes[i];
        for (int j = 0; j <= n; ++j) {
            double yj = grid.nodes[j];
            double gv = greens_gk(k, yi, yj);
            kf.k1(i, j) = (yi - yj) * bf.u2[i] * gv;
            kf.k2(i, j) = tr.h(yi, yj) * gv;
        }
    }
    kf.k1_dy = grid.d1 * kf.k1;
    kf.k1_dyp = kf.k1 * grid.d1.transpose();
    kf.k1_dydyp = grid.d1 * kf.k1 * grid.d1.transpose();
    kf.k2_dy = grid.d1 * kf.k2;
    kf.k2_dyp = kf.k2 * grid.d1.transpose();
    kf.k2_dydyp = grid.d1 * kf.k2 * grid.d1.transpose();
    return kf;
}

/// L^2_{y,y'} tensor-quadrature norm of a sampled kernel.
inline double tensor_l2_norm(const ChannelGrid& grid, const Mat& K) {
    double acc = 0.0;
    for (int i = 0; i < grid.size(); ++i)
        for (int j = 0; j < grid.size(); ++j)
            acc += grid.quad_weights[i] * grid.quad_weights[j] * K(i, j) * K(i, j);
    return std::sqrt(std::max(0.0, acc));
}

struct KernelNorms {
    double n0 = 0.0;    // || K ||
    double n1y = 0.0;   // || dK/dy ||
    double n1yp = 0.0;  // || dK/dy' ||
    double n11 = 0.0;   // || d2K/dydy' ||
};

struct KernelNormsPair {
    KernelNorms k1, k2;
};

inline KernelNormsPair kernel_norms(const ChannelGrid& grid, const BaseFlow& bf, int k) {
    KernelField kf = build_kernel_field(grid, bf, k);
    KernelNormsPair out;
    out.k1.n0 = tensor_l2_norm(grid, kf.k1);
    out.k1.n1y = tensor_l2_norm(grid, kf.k1_dy);
    out.k1.n1yp = tensor_l2_norm(grid, kf.k1_dyp);
    out.k1.n11 = tensor_l2_norm(grid, kf.k1_dydyp);
    out.k2.n0 = tensor_l2_norm(grid, kf.k2);
    out.k2.n1y = tensor_l2_norm(grid, kf.k2_dy);
    out.k2.n1yp = tensor_l2_norm(grid, kf.k2_dyp);
    out.k2.n11 = tensor_l2_norm(grid, kf.k2_dydyp);
    return out;
}

/// Least-squares slope of log(v) against log(k).
inline double loglog_slope(const std::vector<double>& ks, const std::vector<double>& vs) {
    if (ks.size() != vs.size() || ks.size() < 2)
        throw std::invalid_argument("loglog_slope: need matching series of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = int(ks.size());
    for (int i = 0; i < n; ++i) {
        double x = std::log(ks[i]), y = std::log(vs[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace cbl

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace cbl {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Chebyshev-Gauss-Lobatto discretization of the channel cross-section
/// y in [-1,1]. Immutable after construction; downstream solvers hold
/// const references and may share a grid across threads.
struct ChannelGrid {
    int n_y = 0;          // polynomial degree; the grid has n_y + 1 nodes
    Vec nodes;            // y_j = cos(j pi / n_y), strictly decreasing
    Mat d1;               // first-derivative collocation matrix
    Mat d2;               // second derivative, formed as d1 * d1
    Vec quad_weights;     // Clenshaw-Curtis weights for int_{-1}^{1}
    Mat nodal_to_cheb;    // row m: Chebyshev coefficient a_m from nodal values

    int size() const { return n_y + 1; }
};

inline ChannelGrid make_grid(int n_y) {
    if (n_y < 2 || n_y % 2 != 0)
        throw std::invalid_argument("make_grid: n_y must be even and >= 2");
    ChannelGrid g;
    g.n_y = n_y;
    const int n = n_y;
    g.nodes = Vec(n + 1);
    for (int j = 0; j <= n; ++j)
        g.nodes[j] = std::cos(j * M_PI / n);
    g.nodes[0] = 1.0;
    g.nodes[n] = -1.0;
    if (n % 2 == 0) g.nodes[n / 2] = 0.0;

    // Differentiation matrix with the negative-sum trick on the diagonal.
    Vec c = Vec::Ones(n + 1);
    c[0] = 2.0; c[n] = 2.0;
    for (int i = 0; i <= n; ++i)
        if (i % 2 == 1) c[i] = -c[i];
    g.d1 = Mat::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            double v = (c[i] / c[j]) / (g.nodes[i] - g.nodes[j]);
            g.d1(i, j) = v;
            rowsum += v;
        }
        g.d1(i, i) = -rowsum;
    }
    g.d2 = g.d1 * g.d1;

    // Clenshaw-Curtis weights (n even here by construction).
    g.quad_weights = Vec::Zero(n + 1);
    g.quad_weights[0] = 1.0 / (double(n) * n - 1.0);
    g.quad_weights[n] = g.quad_weights[0];
    for (int i = 1; i < n; ++i) {
        double theta = i * M_PI / n;
        double v = 1.0;
        for (int k = 1; k < n / 2; ++k)
            v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
        v -= std::cos(n * theta) / (double(n) * n - 1.0);
        g.quad_weights[i] = 2.0 * v / n;
    }

    // Nodal values -> Chebyshev coefficients (DCT-I as a dense matrix).
    g.nodal_to_cheb = Mat::Zero(n + 1, n + 1);
    for (int m = 0; m <= n; ++m) {
        double cm = (m == 0 || m == n) ? 2.0 : 1.0;
        for (int j = 0; j <= n; ++j) {
            double cj = (j == 0 || j == n) ? 2.0 : 1.0;
            g.nodal_to_cheb(m, j) = 2.0 / (n * cm * cj) * std::cos(m * j * M_PI / n);
        }
    }
    return g;
}

/// L^2_y([-1,1]) inner product <f,g> = int f conj(g), by quadrature.
inline Complex inner_product(const ChannelGrid& g, const CVec& f, const CVec& h) {
    if (f.size() != g.size() || h.size() != g.size())
        throw std::invalid_argument("inner_product: length mismatch");
    Complex acc = 0.0;
    for (int j = 0; j < g.size(); ++j)
        acc += g.quad_weights[j] * f[j] * std::conj(h[j]);
    return acc;
}

inline double l2_norm_sq(const ChannelGrid& g, const CVec& f) {
    double acc = 0.0;
    for (int j = 0; j < g.size(); ++j)
        acc += g.quad_weights[j] * std::norm(f[j]);
    return acc;
}

inline double l2_norm(const ChannelGrid& g, const CVec& f) {
    return std::sqrt(std::max(0.0, l2_norm_sq(g, f)));
}

inline double l2_norm(const ChannelGrid& g, const Vec& f) {
    double acc = 0.0;
    for (int j = 0; j < g.size(); ++j)
        acc += g.quad_weights[j] * f[j] * f[j];
    return std::sqrt(std::max(0.0, acc));
}

/// sqrt( sum_{j=0..4} || d1^j f ||^2 ), the discrete H^4 norm.
inline double sobolev_h4_norm(const ChannelGrid& g, const Vec& f) {
    if (f.size() != g.size())
        throw std::invalid_argument("sobolev_h4_norm: length mismatch");
    double acc = 0.0;
    Vec cur = f;
    for (int j = 0; j <= 4; ++j) {
        double n = l2_norm(g, cur);
        acc += n * n;
        if (j < 4) cur = g.d1 * cur;
    }
    return std::sqrt(acc);
}

// ----- Chebyshev series helpers -----

inline Vec cheb_coeffs(const ChannelGrid& g, const Vec& f) {
    return g.nodal_to_cheb * f;
}

inline CVec cheb_coeffs(const ChannelGrid& g, const CVec& f) {
    return g.nodal_to_cheb * f;
}

/// Evaluate sum_m a_m T_m(x) by Clenshaw recurrence.
template <typename Scalar>
inline Scalar cheb_eval(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a, double x) {
    Scalar b1 = Scalar(0), b2 = Scalar(0);
    for (int m = int(a.size()) - 1; m >= 1; --m) {
        Scalar b0 = a[m] + 2.0 * x * b1 - b2;
        b2 = b1; b1 = b0;
    }
    return a[0] + x * b1 - b2;
}

/// Antiderivative with value 0 at y = -1 (the last node), via termwise
/// integration of the Chebyshev series.
inline Vec cheb_antiderivative(const ChannelGrid& g, const Vec& f) {
    const int n = g.n_y;
    Vec a = cheb_coeffs(g, f);
    Vec b = Vec::Zero(n + 2);
    // int T_0 = T_1 ; int T_1 = T_2/4 (+const) ; int T_m = T_{m+1}/(2(m+1)) - T_{m-1}/(2(m-1))
    b[1] += a[0];
    if (n >= 1) b[2] += a[1] / 4.0;
    for (int m = 2; m <= n; ++m) {
        b[m + 1] += a[m] / (2.0 * (m + 1));
        b[m - 1] -= a[m] / (2.0 * (m - 1));
    }
    Vec out(n + 1);
    for (int j = 0; j <= n; ++j)
        out[j] = cheb_eval<double>(b, g.nodes[j]);
    double at_left = out[n];
    for (int j = 0; j <= n; ++j) out[j] -= at_left;
    return out;
}

// ----- Gauss-Legendre rule (Newton on P_n) -----

struct GaussRule {
    Vec x, w;
};

inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x = Vec(n); r.w = Vec(n);
    for (int i = 0; i < n; ++i) {
        // initial guess (Chebyshev-like), then Newton
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1; p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

} // namespace cbl

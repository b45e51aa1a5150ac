#pragma once

#include <cbl/grid.hpp>
#include <cbl/poisson.hpp>
#include <cbl/rng.hpp>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <string>

namespace cbl {

/// Discretization of the singular integral operator
///   J_k[f](y) = |k| (k/|k|) p.v. int G_k(y,y') f(y') / (2i(y-y')) dy'.
/// The Cauchy singularity is handled subtract-and-add: the bounded part
/// [G_k(y,y') - G_k(y,y)] / (y-y') is integrated per panel on either side
/// of the kink (each side is analytic, written in a cancellation-free
/// product form), and the remaining G_k(y,y) p.v. int f(y')/(y-y') dy'
/// uses closed-form p.v. moments of the Chebyshev interpolant of f.
struct JkOperator {
    int k = 0;
    CMat J;                    // action on nodal values, quadrature folded in
    std::string diag_strategy;
    const ChannelGrid* grid = nullptr;
};

namespace detail {

/// p.v. moments Q_m(y) = p.v. int_{-1}^{1} T_m(y') / (y - y') dy' for |y|<1,
/// by the forward recurrence Q_{m+1} = 2 y Q_m - Q_{m-1} - 2 S_m with
/// S_m = int T_m (0 for odd m).
inline Vec pv_cheb_moments(int n, double y) {
    Vec Q(n + 1);
    Q[0] = std::log((1.0 + y) / (1.0 - y));
    if (n >= 1) Q[1] = y * Q[0] - 2.0;
    for (int m = 1; m < n; ++m) {
        double S = (m % 2 == 0) ? 2.0 / (1.0 - double(m) * double(m)) : 0.0;
        Q[m + 1] = 2.0 * y * Q[m] - Q[m - 1] - 2.0 * S;
    }
    return Q;
}

inline double sinhc(double x) {
    if (std::abs(x) < 1e-6) return 1.0 + x * x / 6.0;
    return std::sinh(x) / x;
}

} // namespace detail

inline JkOperator build_jk(const ChannelGrid& grid, int k) {
    if (k == 0) throw std::invalid_argument("build_jk: k must be nonzero");
    const int n = grid.n_y;
    const double ka = std::abs(double(k));
    const double s2k = std::sinh(2.0 * ka);
    GaussRule gl = gauss_legendre(n + 16);

    Mat M = Mat::Zero(n + 1, n + 1);  // real kernel matrix; J = (k / 2i) M
    for (int i = 1; i < n; ++i) {
        const double yi = grid.nodes[i];
        const double gdiag = -std::sinh(ka * (1.0 - yi)) * std::sinh(ka * (1.0 + yi)) / (ka * s2k);
        Vec row_c = Vec::Zero(n + 1);  // coefficients against the Chebyshev expansion of f

        // bounded part, panel y' in [-1, yi]:
        //   B_-(yi,y') = -c(yi) ka cosh(ka(2+yi+y')/2) sinhc(ka(y'-yi)/2),
        //   c(yi) = -sinh(ka(1-yi)) / (ka sinh 2ka)
        const double c_y = -std::sinh(ka * (1.0 - yi)) / (ka * s2k);
        const double d_y = -std::sinh(ka * (1.0 + yi)) / (ka * s2k);
        for (int side = 0; side < 2; ++side) {
            double lo = side == 0 ? -1.0 : yi;
            double hi = side == 0 ? yi : 1.0;
            double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            if (half <= 0.0) continue;
            for (int q = 0; q < gl.x.size(); ++q) {
                double yp = mid + half * gl.x[q];
                double B;
                if (side == 0)
                    B = -c_y * ka * std::cosh(ka * (2.0 + yi + yp) / 2.0) *
                        detail::sinhc(ka * (yp - yi) / 2.0);
                else
                    B = d_y * ka * std::cosh(ka * (2.0 - yi - yp) / 2.0) *
                        detail::sinhc(ka * (yi - yp) / 2.0);
                double wq = half * gl.w[q] * B;
                double t0 = 1.0, t1 = yp;
                row_c[0] += wq;
                row_c[1] += wq * t1;
                for (int m = 2; m <= n; ++m) {
                    double t2 = 2.0 * yp * t1 - t0;
                    row_c[m] += wq * t2;
                    t0 = t1; t1 = t2;
                }
            }
        }
        row_c += gdiag * detail::pv_cheb_moments(n, yi);
        M.row(i) = row_c.transpose() * grid.nodal_to_cheb;
    }

    JkOperator op;
    op.k = k;
    op.grid = &grid;
    op.J = Complex(0.0, -0.5 * double(k)) * M;  // k/(2i) = -i k/2
    op.diag_strategy =
        "subtract-and-add; bounded part on split panels (Gauss-Legendre per side, "
        "cancellation-free product form); Cauchy part via closed-form Chebyshev p.v. moments; "
        "panel endpoints exclude the kink so only one-sided limits enter";
    return op;
}

inline CVec apply_jk(const JkOperator& op, const CVec& f) {
    if (f.size() != op.J.rows())
        throw std::invalid_argument("apply_jk: length mismatch");
    return op.J * f;
}

// ----- operator-norm estimation -----

/// Basis of smooth Dirichlet modes sin(j pi (y+1)/2), j = 1..m. Operator
/// norms are estimated on the span of the resolved modes: raw grid vectors
/// include unresolvable oscillations on which a collocation p.v. rule says
/// nothing about the underlying operator.
inline Mat dirichlet_sine_basis(const ChannelGrid& grid, int m) {
    Mat B(grid.size(), m);
    for (int j = 1; j <= m; ++j)
        for (int i = 0; i < grid.size(); ++i)
            B(i, j - 1) = std::sin(j * M_PI * (grid.nodes[i] + 1.0) / 2.0);
    return B;
}

struct NormEstimate {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

/// Power iteration on A*A in the weighted inner product, A restricted to
/// the column span of basis (pass the identity-sized basis to probe raw
/// grid vectors). 200 iterations cap or relative change < 1e-10.
inline NormEstimate estimate_operator_norm_on(const CMat& A, const ChannelGrid& grid,
                                              const Mat& basis, uint64_t seed = 12345) {
    NormEstimate est;
    const int nn = grid.size();
    Vec sw = grid.quad_weights.array().sqrt();
    // orthonormalize W^{1/2} basis
    Mat Bw = sw.asDiagonal() * basis;
    Eigen::HouseholderQR<Mat> qr(Bw);
    Mat Qb = Mat(qr.householderQ()) .leftCols(basis.cols());
    // restricted matrix in orthonormal coordinates: R = W^{1/2} A W^{-1/2} Qb
    CMat R = sw.asDiagonal().toDenseMatrix() * A;
    for (int j = 0; j < nn; ++j) R.col(j) /= sw[j];
    CMat Rq = R * Qb;
    // power iteration on Rq^H Rq
    SplitMix64 rng(seed, "estimate_operator_norm");
    CVec x(basis.cols());
    for (int i = 0; i < x.size(); ++i) x[i] = Complex(rng.normal(), rng.normal());
    double nx = x.norm();
    if (nx == 0.0) { est.value = 0.0; return est; }
    x /= nx;
    double lam = 0.0, lam_old = -1.0;
    for (int it = 0; it < 200; ++it) {
        CVec z = Rq.adjoint() * (Rq * x);
        double nz = z.norm();
        est.iterations = it + 1;
        if (nz < 1e-300) { est.value = 0.0; return est; }
        x = z / nz;
        lam = nz;
        if (std::abs(lam - lam_old) < 1e-10 * std::max(lam, 1e-300)) {
            est.value = std::sqrt(lam);
            return est;
        }
        lam_old = lam;
    }
    est.value = std::sqrt(lam);
    est.converged = false;
    return est;
}

inline NormEstimate estimate_operator_norm(const JkOperator& op, uint64_t seed = 12345) {
    const ChannelGrid& g = *op.grid;
    Mat basis = dirichlet_sine_basis(g, g.n_y / 2);
    return estimate_operator_norm_on(op.J, g, basis, seed);
}

/// || [d/dy, J_k] || / |k| with the commutator restricted to functions
/// vanishing at y = +-1 (the sine span), so differentiation is stable.
inline NormEstimate commutator_norm(const ChannelGrid& grid, int k, uint64_t seed = 12345) {
    JkOperator op = build_jk(grid, k);
    CMat C = grid.d1 * op.J - op.J * grid.d1;
    Mat basis = dirichlet_sine_basis(grid, grid.n_y / 2);
    NormEstimate est = estimate_operator_norm_on(C, grid, basis, seed);
    est.value /= std::abs(double(k));
    return est;
}

/// Weighted-adjoint defect of the matrix: J* = W^{-1} J^H W. Measured two
/// ways; never enforced by symmetrizing.
struct SelfAdjointnessReport {
    double bilinear_defect = 0.0;   // max |<Jf,g> - <f,Jg>| / (|f||g||J|) over random smooth pairs
    double matrix_defect = 0.0;     // ||J - J*|| / ||J|| over the resolved span (diagnostic)
};

inline CVec random_smooth_dirichlet(const ChannelGrid& grid, SplitMix64& rng, int modes = 12) {
    CVec f = CVec::Zero(grid.size());
    for (int j = 1; j <= modes; ++j) {
        Complex c(rng.normal(), rng.normal());
        for (int i = 0; i < grid.size(); ++i)
            f[i] += c * std::sin(j * M_PI * (grid.nodes[i] + 1.0) / 2.0);
    }
    return f;
}

inline SelfAdjointnessReport self_adjointness_defect(const JkOperator& op, uint64_t seed = 777,
                                                     int trials = 24) {
    const ChannelGrid& g = *op.grid;
    SelfAdjointnessReport rep;
    double nJ = estimate_operator_norm(op).value;
    if (nJ == 0.0) return rep;
    SplitMix64 rng(seed, "self_adjointness");
    for (int t = 0; t < trials; ++t) {
        CVec f = random_smooth_dirichlet(g, rng);
        CVec h = random_smooth_dirichlet(g, rng);
        Complex a = inner_product(g, op.J * f, h);
        Complex b = inner_product(g, f, op.J * h);
        double d = std::abs(a - b) / (l2_norm(g, f) * l2_norm(g, h) * nJ);
        rep.bilinear_defect = std::max(rep.bilinear_defect, d);
    }
    // matrix defect on the resolved span
    Vec w = g.quad_weights;
    CMat Jstar(g.size(), g.size());
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            Jstar(i, j) = w[j] * std::conj(op.J(j, i)) / w[i];
    Mat basis = dirichlet_sine_basis(g, g.n_y / 2);
    double nD = estimate_operator_norm_on(op.J - Jstar, g, basis, seed).value;
    rep.matrix_defect = nD / nJ;
    return rep;
}

} // namespace cbl

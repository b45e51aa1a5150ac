#include <catch2/catch_amalgamated.hpp>
#include <cbl/jk_operator.hpp>

using namespace cbl;

namespace {
/// Independent p.v. oracle: constant-value subtraction per panel with a
/// dense Gauss-Legendre rule applied to a closed-form integrand.
Complex jk_oracle_pointwise(int k, double y, const std::function<Complex(double)>& f, int n_gl) {
    double ka = std::abs(double(k));
    double s2k = std::sinh(2.0 * ka);
    auto gk = [&](double a, double b) {
        double lo = std::min(a, b), hi = std::max(a, b);
        return -std::sinh(ka * (1.0 - hi)) * std::sinh(ka * (1.0 + lo)) / (ka * s2k);
    };
    double gd = gk(y, y);
    Complex fd = f(y);
    GaussRule gl = gauss_legendre(n_gl);
    Complex total = 0.0;
    for (int side = 0; side < 2; ++side) {
        double lo = side == 0 ? -1.0 : y;
        double hi = side == 0 ? y : 1.0;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        if (half <= 0.0) continue;
        for (int q = 0; q < gl.x.size(); ++q) {
            double yp = mid + half * gl.x[q];
            total += half * gl.w[q] * (gk(y, yp) * f(yp) - gd * fd) / (y - yp);
        }
    }
    total += gd * fd * std::log((1.0 + y) / (1.0 - y));
    return Complex(0.0, -0.5 * double(k)) * total;
}
} // namespace

TEST_CASE("build_jk rejects k = 0 and annihilates zero input") {
    auto g = make_grid(64);
    CHECK_THROWS_AS(build_jk(g, 0), std::invalid_argument);
    auto op = build_jk(g, 1);
    CHECK(apply_jk(op, CVec::Zero(g.size())).norm() == 0.0);
    CHECK_THROWS_AS(apply_jk(op, CVec::Zero(3)), std::invalid_argument);
    CHECK_FALSE(op.diag_strategy.empty());
}

TEST_CASE("apply_jk matches a dense high-resolution p.v. oracle") {
    auto g = make_grid(64);
    auto op = build_jk(g, 1);
    auto f = [](double y) { return Complex(std::sin(M_PI * (y + 1.0) / 2.0), 0.0); };
    CVec fv(g.size());
    for (int i = 0; i < g.size(); ++i) fv[i] = f(g.nodes[i]);
    CVec out = apply_jk(op, fv);
    double scale = out.cwiseAbs().maxCoeff();
    for (int i : {8, 16, 32, 48}) {
        Complex oracle = jk_oracle_pointwise(1, g.nodes[i], f, 400);
        CHECK(std::abs(out[i] - oracle) < 1e-10 * scale);
    }
}

TEST_CASE("f = 1: symmetry at midchannel, oracle agreement, sign flip under k -> -k") {
    auto g = make_grid(64);
    auto op_p = build_jk(g, 1);
    auto op_m = build_jk(g, -1);
    CVec one = CVec::Ones(g.size());
    CVec out_p = apply_jk(op_p, one);
    CVec out_m = apply_jk(op_m, one);
    double scale = out_p.cwiseAbs().maxCoeff();
    // at y = 0 the integrand is odd: the value vanishes (both our rule and the oracle)
    int mid = g.n_y / 2;
    CHECK(std::abs(out_p[mid]) < 1e-12 * scale);
    auto f1 = [](double) { return Complex(1.0, 0.0); };
    CHECK(std::abs(out_p[mid] - jk_oracle_pointwise(1, 0.0, f1, 800)) < 1e-4 * scale);
    // off-center relative agreement with a 4x-resolution-style dense rule
    int probe = g.n_y / 4;
    Complex oracle = jk_oracle_pointwise(1, g.nodes[probe], f1, 800);
    CHECK(std::abs(out_p[probe] - oracle) < 1e-4 * std::abs(oracle));
    // odd dependence on the sign of k
    CHECK((out_p + out_m).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("grid self-convergence at k = 1") {
    auto g64 = make_grid(64);
    auto g128 = make_grid(128);
    auto op64 = build_jk(g64, 1);
    auto op128 = build_jk(g128, 1);
    auto f = [](double y) { return Complex(std::sin(M_PI * (y + 1.0) / 2.0), 0.0); };
    CVec f64(g64.size()), f128(g128.size());
    for (int i = 0; i < g64.size(); ++i) f64[i] = f(g64.nodes[i]);
    for (int i = 0; i < g128.size(); ++i) f128[i] = f(g128.nodes[i]);
    CVec a = apply_jk(op64, f64);
    CVec b = apply_jk(op128, f128);
    // compare on the shared even-indexed nodes of the fine grid
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 64; ++i) {
        num += std::norm(a[i] - b[2 * i]);
        den += std::norm(b[2 * i]);
    }
    CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("conjugation law: conj(J f) = -J conj(f)") {
    auto g = make_grid(64);
    auto op = build_jk(g, 3);
    SplitMix64 rng(41, "jk-conj");
    CVec f = random_smooth_dirichlet(g, rng);
    CVec lhs = (op.J * f).conjugate();
    CVec rhs = -(op.J * f.conjugate());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
    // for real f the output is purely imaginary
    CVec fr = f.real().cast<Complex>();
    CVec out = op.J * fr;
    CHECK(out.real().cwiseAbs().maxCoeff() < 1e-8 * out.cwiseAbs().maxCoeff());
}

TEST_CASE("bilinear self-adjointness on random smooth pairs") {
    auto g = make_grid(128);
    for (int k : {1, 4}) {
        auto op = build_jk(g, k);
        auto rep = self_adjointness_defect(op);
        CHECK(rep.bilinear_defect < 1e-6);
    }
}

TEST_CASE("self-adjointness defect decays under grid refinement") {
    double prev = 1.0;
    for (int n : {64, 128, 256}) {
        auto g = make_grid(n);
        auto op = build_jk(g, 1);
        auto rep = self_adjointness_defect(op);
        if (n > 64) CHECK(rep.bilinear_defect < 0.5 * prev);
        prev = rep.bilinear_defect;
    }
}

TEST_CASE("norm estimator sanity: identity and zero") {
    auto g = make_grid(64);
    CMat I = CMat::Identity(g.size(), g.size());
    Mat basis = dirichlet_sine_basis(g, g.n_y / 2);
    auto est = estimate_operator_norm_on(I, g, basis);
    CHECK(est.value == Catch::Approx(1.0).margin(1e-10));
    auto z = estimate_operator_norm_on(CMat::Zero(g.size(), g.size()), g, basis);
    CHECK(z.value == 0.0);
}

TEST_CASE("uniform boundedness across wavenumbers") {
    auto g = make_grid(128);
    std::vector<double> norms;
    for (int k : {1, 2, 4, 8, 16, 32}) {
        auto op = build_jk(g, k);
        norms.push_back(estimate_operator_norm(op).value);
    }
    double lo = *std::min_element(norms.begin(), norms.end());
    double hi = *std::max_element(norms.begin(), norms.end());
    CHECK(hi / lo <= 3.0);
    CHECK(norms.back() <= 1.5 * norms.front());
}

TEST_CASE("commutator: zero input, identity commutes, k-scaled spread") {
    auto g = make_grid(128);
    // [D1, I] = 0
    CMat C = g.d1.cast<Complex>() * CMat::Identity(g.size(), g.size()) -
             CMat::Identity(g.size(), g.size()) * g.d1.cast<Complex>();
    Mat basis = dirichlet_sine_basis(g, g.n_y / 2);
    CHECK(estimate_operator_norm_on(C, g, basis).value <= 1e-10);

    std::vector<double> ratios;
    for (int k : {1, 2, 4, 8, 16, 32})
        ratios.push_back(commutator_norm(g, k).value);
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo <= 4.0);
}

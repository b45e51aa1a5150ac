#include <catch2/catch_amalgamated.hpp>
#include <cbl/grid.hpp>
#include <cbl/rng.hpp>

using namespace cbl;

TEST_CASE("make_grid rejects bad sizes") {
    CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(5), std::invalid_argument);
}

TEST_CASE("nodes: endpoints exact, strictly decreasing, zero included") {
    auto g = make_grid(2);
    REQUIRE(g.nodes.size() == 3);
    CHECK(g.nodes[0] == 1.0);
    CHECK(g.nodes[1] == 0.0);
    CHECK(g.nodes[2] == -1.0);

    auto g2 = make_grid(64);
    CHECK(g2.nodes[0] == 1.0);
    CHECK(g2.nodes[64] == -1.0);
    for (int j = 0; j < 64; ++j)
        CHECK(g2.nodes[j] > g2.nodes[j + 1]);
}

TEST_CASE("d1 annihilates constants and differentiates monomials exactly") {
    auto g = make_grid(4);
    Vec ones = Vec::Ones(5);
    Vec d = g.d1 * ones;
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(d[j]) < 1e-12);

    Vec y = g.nodes;
    Vec dy = g.d1 * y;
    for (int j = 0; j < 5; ++j)
        CHECK(dy[j] == Catch::Approx(1.0).margin(1e-12));

    Vec y2 = y.array().square();
    Vec ddy2 = g.d2 * y2;
    for (int j = 0; j < 5; ++j)
        CHECK(ddy2[j] == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("d1 annihilates constants at larger n") {
    for (int n : {64, 128}) {
        auto g = make_grid(n);
        Vec d = g.d1 * Vec::Ones(n + 1);
        CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
    }
    // at n = 256 the attainable floor is the matvec roundoff,
    // eps * max_i sum_j |d1(i,j)| ~ 1e-11
    auto g = make_grid(256);
    Vec d = g.d1 * Vec::Ones(257);
    double floor = g.d1.cwiseAbs().rowwise().sum().maxCoeff() * 1e-15;
    CHECK(d.cwiseAbs().maxCoeff() < std::max(1e-12, floor));
}

TEST_CASE("quadrature weights sum to the channel measure") {
    for (int n : {2, 16, 64, 256}) {
        auto g = make_grid(n);
        CHECK(g.quad_weights.sum() == Catch::Approx(2.0).margin(1e-12));
    }
}

TEST_CASE("Clenshaw-Curtis integrates monomials up to degree n exactly") {
    const int n = 16;
    auto g = make_grid(n);
    for (int p = 0; p <= n; ++p) {
        double acc = 0.0;
        for (int j = 0; j <= n; ++j)
            acc += g.quad_weights[j] * std::pow(g.nodes[j], p);
        double exact = (p % 2 == 0) ? 2.0 / (p + 1.0) : 0.0;
        CHECK(acc == Catch::Approx(exact).margin(1e-10));
    }
}

TEST_CASE("spectral accuracy of d1 on exp(y)") {
    double prev_err = 1.0;
    for (int n : {8, 16, 32, 64}) {
        auto g = make_grid(n);
        Vec f = g.nodes.array().exp();
        Vec err = (g.d1 * f - f).cwiseAbs();
        double e = err.maxCoeff();
        if (prev_err > 1e-12)
            CHECK(e < prev_err / 10.0 + 1e-12);
        prev_err = e;
    }
    CHECK(prev_err < 1e-10);
}

TEST_CASE("d2 tracks d1*d1 by construction") {
    auto g = make_grid(64);
    CHECK((g.d2 - g.d1 * g.d1).norm() == 0.0);
}

TEST_CASE("inner product basics") {
    auto g = make_grid(32);
    CVec one = CVec::Ones(g.size());
    CHECK(inner_product(g, one, one).real() == Catch::Approx(2.0).margin(1e-12));

    CVec f(g.size());
    for (int j = 0; j < g.size(); ++j)
        f[j] = std::sin(M_PI * (g.nodes[j] + 1.0) / 2.0);
    CHECK(inner_product(g, f, f).real() == Catch::Approx(1.0).margin(1e-12));

    CVec y = g.nodes.cast<Complex>();
    CHECK(std::abs(inner_product(g, one, y)) < 1e-14);

    CVec mismatch = CVec::Ones(g.size() - 1);
    CHECK_THROWS_AS(inner_product(g, one, mismatch), std::invalid_argument);
}

TEST_CASE("inner product is conjugate symmetric") {
    auto g = make_grid(32);
    SplitMix64 rng(11, "grid-conjsym");
    CVec f(g.size()), h(g.size());
    for (int j = 0; j < g.size(); ++j) {
        f[j] = Complex(rng.normal(), rng.normal());
        h[j] = Complex(rng.normal(), rng.normal());
    }
    Complex a = inner_product(g, f, h);
    Complex b = inner_product(g, h, f);
    CHECK(std::abs(a - std::conj(b)) < 1e-12 * std::abs(a));
}

TEST_CASE("H4 norm: zero, constants, and the half-period sine") {
    auto g = make_grid(64);
    CHECK(sobolev_h4_norm(g, Vec::Zero(g.size())) == 0.0);

    Vec c = Vec::Constant(g.size(), 3.0);
    CHECK(sobolev_h4_norm(g, c) == Catch::Approx(std::sqrt(2.0) * 3.0).margin(1e-10));

    Vec f(g.size());
    for (int j = 0; j < g.size(); ++j)
        f[j] = std::sin(M_PI * (g.nodes[j] + 1.0) / 2.0);
    // each derivative scales the L2 norm by pi/2; closed-form sum of squares
    double expect = 0.0;
    for (int j = 0; j <= 4; ++j)
        expect += std::pow(M_PI / 2.0, 2 * j);
    expect = std::sqrt(expect);
    CHECK(sobolev_h4_norm(g, f) == Catch::Approx(expect).epsilon(1e-8));
    CHECK(expect == Catch::Approx(7.851).margin(2e-3));
}

TEST_CASE("Chebyshev coefficients round-trip and antiderivative") {
    auto g = make_grid(32);
    Vec f(g.size());
    for (int j = 0; j < g.size(); ++j)
        f[j] = std::exp(g.nodes[j]) * std::cos(2.0 * g.nodes[j]);
    Vec a = cheb_coeffs(g, f);
    for (int j = 0; j < g.size(); ++j)
        CHECK(cheb_eval<double>(a, g.nodes[j]) == Catch::Approx(f[j]).margin(1e-12));

    // antiderivative of 2y with F(-1)=0 is y^2 - 1
    Vec h = 2.0 * g.nodes;
    Vec H = cheb_antiderivative(g, h);
    for (int j = 0; j < g.size(); ++j)
        CHECK(H[j] == Catch::Approx(g.nodes[j] * g.nodes[j] - 1.0).margin(1e-12));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    auto r = gauss_legendre(12);
    double acc = 0.0;
    for (int q = 0; q < 12; ++q)
        acc += r.w[q] * std::pow(r.x[q], 22);
    CHECK(acc == Catch::Approx(2.0 / 23.0).margin(1e-14));
    CHECK(r.w.sum() == Catch::Approx(2.0).margin(1e-14));
}

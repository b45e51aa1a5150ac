#include <catch2/catch_amalgamated.hpp>
#include <cbl/poisson.hpp>
#include <cbl/rng.hpp>

using namespace cbl;

namespace {
CVec random_smooth_psi(const ChannelGrid& g, SplitMix64& rng, int modes = 12) {
    CVec f = CVec::Zero(g.size());
    for (int j = 1; j <= modes; ++j) {
        Complex c(rng.normal(), rng.normal());
        for (int i = 0; i < g.size(); ++i)
            f[i] += c * std::sin(j * M_PI * (g.nodes[i] + 1.0) / 2.0);
    }
    return f;
}
} // namespace

TEST_CASE("greens_gk closed-form values") {
    CHECK(greens_gk(1, 0.0, 0.0) ==
          Catch::Approx(-std::sinh(1.0) * std::sinh(1.0) / std::sinh(2.0)).epsilon(1e-12));
    CHECK(greens_gk(1, 0.0, 0.0) == Catch::Approx(-0.380797).margin(1e-6));
    CHECK(greens_gk(3, 1.0, 0.2) == 0.0);
    CHECK(greens_gk(3, 0.2, -1.0) == 0.0);
    CHECK(greens_gk(2, 0.3, -0.4) == Catch::Approx(greens_gk(2, -0.4, 0.3)).epsilon(1e-12));
    CHECK(greens_gk(-2, 0.3, -0.4) == Catch::Approx(greens_gk(2, 0.3, -0.4)).epsilon(1e-12));
    CHECK_THROWS_AS(greens_gk(0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("greens_gk stays finite at large k (log-space evaluation)") {
    double v = greens_gk(10000, 0.3, 0.3);
    CHECK(std::isfinite(v));
    CHECK(v < 0.0);
    // interior diagonal value approaches -1/(2k)
    CHECK(v == Catch::Approx(-1.0 / 20000.0).epsilon(1e-3));
    CHECK(std::isfinite(greens_gk(10000, -0.9, 0.85)));
}

TEST_CASE("solve_poisson_k: zero and manufactured solutions") {
    auto g = make_grid(64);
    ModePoissonSolver sol2(g, 2);
    CHECK(sol2.solve(CVec::Zero(g.size())).norm() == 0.0);

    // psi = 1 - y^2, Delta_2 psi = -2 - 4(1-y^2)
    CVec omega(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double y = g.nodes[i];
        omega[i] = -2.0 - 4.0 * (1.0 - y * y);
    }
    CVec psi = sol2.solve(omega);
    for (int i = 0; i < g.size(); ++i) {
        double y = g.nodes[i];
        CHECK(psi[i].real() == Catch::Approx(1.0 - y * y).margin(1e-8));
        CHECK(std::abs(psi[i].imag()) < 1e-12);
    }

    // eigenfunction of Delta_1
    ModePoissonSolver sol1(g, 1);
    CVec omega1(g.size());
    double lam = 1.0 + M_PI * M_PI / 4.0;
    for (int i = 0; i < g.size(); ++i)
        omega1[i] = -lam * std::sin(M_PI * (g.nodes[i] + 1.0) / 2.0);
    CVec psi1 = sol1.solve(omega1);
    for (int i = 0; i < g.size(); ++i)
        CHECK(psi1[i].real() ==
              Catch::Approx(std::sin(M_PI * (g.nodes[i] + 1.0) / 2.0)).margin(1e-8));

    CHECK_THROWS_AS(ModePoissonSolver(g, 0), std::invalid_argument);
}

TEST_CASE("solve_poisson_k: discrete residual is small for smooth data") {
    auto g = make_grid(128);
    SplitMix64 rng(3, "poisson-residual");
    for (int k : {1, 4, 16}) {
        ModePoissonSolver sol(g, k);
        CVec psi_ref = random_smooth_psi(g, rng);
        CVec omega = g.d2 * psi_ref - double(k) * double(k) * psi_ref;
        CVec psi = sol.solve(omega);
        CVec resid = g.d2 * psi - double(k) * double(k) * psi - omega;
        double rel = 0.0, den = 0.0;
        for (int i = 1; i < g.n_y; ++i) {
            rel += g.quad_weights[i] * std::norm(resid[i]);
            den += g.quad_weights[i] * std::norm(omega[i]);
        }
        CHECK(std::sqrt(rel / den) < 1e-6);
    }
}

TEST_CASE("Green's-quadrature path agrees with the collocation solve") {
    auto g = make_grid(128);
    SplitMix64 rng(13, "poisson-greens");
    for (int k : {1, 4, 16}) {
        ModePoissonSolver sol(g, k, /*build_greens_matrix=*/true);
        CVec psi_ref = random_smooth_psi(g, rng, 8);
        CVec omega = g.d2 * psi_ref - double(k) * double(k) * psi_ref;
        CVec a = sol.solve(omega);
        CVec b = sol.solve_via_greens(omega);
        CHECK(l2_norm(g, CVec(a - b)) < 1e-6 * std::max(1e-30, l2_norm(g, a)));
        // boundary rows/cols of the Green's matrix vanish
        CHECK(sol.greens_matrix().row(0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.greens_matrix().row(g.n_y).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("velocity_from_psi") {
    auto g = make_grid(32);
    CHECK(velocity_from_psi(g, 1, CVec::Zero(g.size())).first.norm() == 0.0);

    CVec psi(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double y = g.nodes[i];
        psi[i] = 1.0 - y * y;
    }
    auto [u1, u2] = velocity_from_psi(g, 1, psi);
    for (int i = 0; i < g.size(); ++i) {
        double y = g.nodes[i];
        CHECK(u1[i].real() == Catch::Approx(-2.0 * y).margin(1e-10));
        CHECK(u2[i] == Complex(0.0, -(1.0 - y * y)));
    }
    // no-penetration inherited at the walls
    CHECK(std::abs(u2[0]) < 1e-14);
    CHECK(std::abs(u2[g.n_y]) < 1e-14);

    // ik u1 + d_y u2 vanishes identically (same psi differentiated twice)
    CVec div = Complex(0, 1.0) * u1 + g.d1 * u2;
    CHECK(div.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("vorticity identity: equality and lower bound") {
    auto g = make_grid(128);
    SECTION("zero input") {
        auto rep = vorticity_identity_check(g, 1, CVec::Zero(g.size()));
        CHECK(rep.lhs == 0.0);
        CHECK(rep.rhs == 0.0);
    }
    SECTION("half-period sine, closed-form norms") {
        CVec psi(g.size());
        for (int i = 0; i < g.size(); ++i)
            psi[i] = std::sin(M_PI * (g.nodes[i] + 1.0) / 2.0);
        auto rep = vorticity_identity_check(g, 1, psi);
        CHECK(rep.equality_defect < 1e-8);
        double p2 = M_PI * M_PI / 4.0;
        CHECK(rep.rhs == Catch::Approx(1.0 + p2 * p2 + 2.0 * p2).epsilon(1e-8));
        CHECK(rep.lower_bound_holds);
    }
    SECTION("random Dirichlet data across wavenumbers") {
        SplitMix64 rng(21, "w-identity");
        for (int trial = 0; trial < 100; ++trial) {
            int k = 1 + int(rng.next() % 8);
            CVec psi = random_smooth_psi(g, rng);
            auto rep = vorticity_identity_check(g, k, psi);
            CHECK(rep.equality_defect < 1e-6);
            CHECK(rep.lower_bound_holds);
        }
    }
}

TEST_CASE("second derivative of psi is controlled by omega") {
    auto g = make_grid(128);
    SplitMix64 rng(23, "psi-yy-bound");
    for (int trial = 0; trial < 30; ++trial) {
        int k = 1 + int(rng.next() % 8);
        CVec psi = random_smooth_psi(g, rng);
        CVec omega = g.d2 * psi - double(k) * double(k) * psi;
        CHECK(l2_norm(g, CVec(g.d2 * psi)) <= l2_norm(g, omega) * (1.0 + 1e-9));
    }
}

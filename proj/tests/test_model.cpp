#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jmgtlab/model.hpp"

using namespace jmgtlab;

namespace {

JmgtState random_state(const BasisPtr& basis, unsigned seed, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SpectralField u(basis), v(basis), w(basis);
    for (int i = 0; i < u.coeffs.size(); ++i) {
        u.coeffs[i] = scale * dist(rng);
        v.coeffs[i] = scale * dist(rng);
        w.coeffs[i] = scale * dist(rng);
    }
    return JmgtState(0.0, std::move(u), std::move(v), std::move(w));
}

// Independent evaluation of the expanded form of the E1 energy:
//   E1 = tau/2 ||u_tt||^2 + b/2 ||A^{1/2} u_t||^2 + c^4/(2b) ||A^{1/2} u||^2
//      + c^2 (A u_t, u) + tau c^2/b (u_tt, u_t) + c^2/(2b) ||u_t||^2.
double e1_expanded(const JmgtState& s, const ModelParams& p) {
    const double b = p.b(), c2 = p.c * p.c;
    const auto& lam = s.basis()->eigenvalues.array();
    const double au_ut = (lam * s.v.coeffs.array() * s.u.coeffs.array()).sum();
    return 0.5 * p.tau * s.w.coeffs.squaredNorm() +
           0.5 * b * (lam * s.v.coeffs.array().square()).sum() +
           c2 * c2 / (2.0 * b) * (lam * s.u.coeffs.array().square()).sum() + c2 * au_ut +
           p.tau * c2 / b * s.w.coeffs.dot(s.v.coeffs) +
           c2 / (2.0 * b) * s.v.coeffs.squaredNorm();
}

} // namespace

TEST_CASE("derived parameters") {
    ModelParams p;
    p.tau = 0.1;
    p.c = 2.0;
    p.delta = 0.3;
    REQUIRE(p.b() == 0.3 + 0.1 * 4.0);
    // gamma b + tau c^2 = b exactly
    REQUIRE(p.gamma() * p.b() + p.tau * p.c * p.c == p.b());
    REQUIRE_THAT(p.gamma(), Catch::Matchers::WithinRel(p.delta / p.b(), 1e-15));
    REQUIRE(p.gamma() > 0.0);
    REQUIRE(p.gamma() <= 1.0);

    ModelParams bad = p;
    bad.delta = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.tau = -1.0;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("compute_G") {
    auto basis = build_basis(8, M_PI);
    TransformPlan plan = make_plan(basis, 1.5);
    ModelParams p;
    p.k = 1.0;

    SECTION("k = 0 short-circuits to the zero field") {
        ModelParams p0 = p;
        p0.k = 0.0;
        JmgtState s = random_state(basis, 3);
        REQUIRE(compute_G(s, p0, plan).coeffs.isZero());
    }
    SECTION("u_t = e_1 reproduces the sin^2 projection (odd modes only)") {
        SpectralField u(basis), v(basis), w(basis);
        v.coeffs[0] = 1.0;
        JmgtState s(0.0, u, v, w);
        SpectralField g = compute_G(s, p, make_plan(basis, 4.0));
        auto analytic = [](int m) {
            if (m % 2 == 0) return 0.0;
            return 2.0 * (2.0 / M_PI) * std::sqrt(2.0 / M_PI) * (-4.0 / (m * (double(m) * m - 4.0)));
        };
        for (int m = 1; m <= 8; ++m)
            REQUIRE_THAT(g.coeffs[m - 1], Catch::Matchers::WithinAbs(analytic(m), 2e-5));
        REQUIRE_THAT(g.coeffs[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
    SECTION("quadratic homogeneity: scaling the state by s scales G by s^2") {
        JmgtState s = random_state(basis, 7, 0.1);
        SpectralField g1 = compute_G(s, p, plan);
        JmgtState s2 = s;
        s2.u.coeffs *= 3.0;
        s2.v.coeffs *= 3.0;
        s2.w.coeffs *= 3.0;
        SpectralField g9 = compute_G(s2, p, plan);
        REQUIRE((g9.coeffs - 9.0 * g1.coeffs).lpNorm<Eigen::Infinity>() <=
                1e-12 * g9.coeffs.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("E0") {
    auto basis = build_basis(4, M_PI);
    ModelParams p;
    SECTION("zero state") {
        JmgtState z(0.0, SpectralField(basis), SpectralField(basis), SpectralField(basis));
        REQUIRE(energy_E0(z, p) == 0.0);
    }
    SECTION("unit mode-1 displacement, c = 1: E0 = 1/2") {
        SpectralField u(basis), v(basis), w(basis);
        u.coeffs[0] = 1.0;
        REQUIRE_THAT(energy_E0(JmgtState(0.0, u, v, w), p),
                     Catch::Matchers::WithinRel(0.5, 1e-15));
    }
    SECTION("||u_t|| = 2 alone gives 2") {
        SpectralField u(basis), v(basis), w(basis);
        v.coeffs[2] = 2.0;
        REQUIRE_THAT(energy_E0(JmgtState(0.0, u, v, w), p),
                     Catch::Matchers::WithinRel(2.0, 1e-15));
    }
}

TEST_CASE("E1") {
    auto basis = build_basis(4, M_PI);
    ModelParams p;
    p.tau = 0.1;
    p.c = 1.0;
    p.delta = 1.0; // b = 1.1

    SECTION("hand-evaluated single-mode value c^4/(2b) = 1/2.2") {
        SpectralField u(basis), v(basis), w(basis);
        u.coeffs[0] = 1.0;
        REQUIRE_THAT(energy_E1(JmgtState(0.0, u, v, w), p),
                     Catch::Matchers::WithinRel(1.0 / 2.2, 1e-14));
    }
    SECTION("closed z-form agrees with the expanded form on random states") {
        for (double tau : {1e-4, 1e-2, 0.3, 1.0}) {
            ModelParams pt = p.with_tau(tau);
            for (unsigned seed : {1u, 2u, 3u}) {
                JmgtState s = random_state(basis, seed);
                const double closed = energy_E1(s, pt);
                const double expanded = e1_expanded(s, pt);
                REQUIRE_THAT(closed, Catch::Matchers::WithinRel(expanded, 1e-12));
            }
        }
    }
    SECTION("zero state") {
        JmgtState z(0.0, SpectralField(basis), SpectralField(basis), SpectralField(basis));
        REQUIRE(energy_E1(z, p) == 0.0);
    }
}

TEST_CASE("aggregate energies") {
    auto basis = build_basis(6, M_PI);
    ModelParams p;
    p.tau = 0.2;
    JmgtState s = random_state(basis, 17);

    SECTION("E = E0 + E1, calE and frakE add the documented terms") {
        const double E = energy_E(s, p);
        REQUIRE_THAT(E, Catch::Matchers::WithinRel(energy_E0(s, p) + energy_E1(s, p), 1e-14));
        REQUIRE_THAT(energy_calE(s, p),
                     Catch::Matchers::WithinRel(E + sobolev_norm_sq(s.u, 1.0), 1e-14));
        const double frak = energy_frakE(s, p);
        const double expect = energy_calE(s, p) + sobolev_norm_sq(s.v, 1.0) +
                              p.tau * sobolev_norm_sq(s.w, 0.5);
        REQUIRE_THAT(frak, Catch::Matchers::WithinRel(expect, 1e-12));
    }
    SECTION("tau = 0 removes the u_tt weight in frakE") {
        ModelParams p0 = p.with_tau(0.0);
        REQUIRE_THAT(energy_frakE(s, p0),
                     Catch::Matchers::WithinRel(
                         energy_calE(s, p0) + sobolev_norm_sq(s.v, 1.0), 1e-13));
    }
    SECTION("all energies are 2-homogeneous") {
        JmgtState s3 = s;
        s3.u.coeffs *= 3.0;
        s3.v.coeffs *= 3.0;
        s3.w.coeffs *= 3.0;
        REQUIRE_THAT(energy_E(s3, p), Catch::Matchers::WithinRel(9.0 * energy_E(s, p), 1e-12));
        REQUIRE_THAT(energy_frakE(s3, p),
                     Catch::Matchers::WithinRel(9.0 * energy_frakE(s, p), 1e-12));
    }
    SECTION("EnergySample stores consistent identities") {
        EnergySample e = sample_energies(s, p);
        REQUIRE_THAT(e.E, Catch::Matchers::WithinRel(e.E0 + e.E1, 1e-14));
        REQUIRE_THAT(e.calE - e.E, Catch::Matchers::WithinRel(sobolev_norm_sq(s.u, 1.0), 1e-12));
        REQUIRE_THAT(e.frakE - e.calE - sobolev_norm_sq(s.v, 1.0) -
                         p.tau * sobolev_norm_sq(s.w, 0.5),
                     Catch::Matchers::WithinAbs(0.0, 1e-12 * e.frakE));
    }
}

TEST_CASE("weighted phase-space norms") {
    auto basis = build_basis(4, M_PI);
    ModelParams p;
    p.tau = 1.0;
    JmgtState s = random_state(basis, 29);

    SECTION("zero state vanishes at every level") {
        JmgtState z(0.0, SpectralField(basis), SpectralField(basis), SpectralField(basis));
        for (int level : {0, 1, 2}) REQUIRE(weighted_norm_sq(z, level, p) == 0.0);
    }
    SECTION("tau = 1 gives the unweighted product norms") {
        auto graph = [&](const SpectralField& f, double pw) {
            return sobolev_norm_sq(f, pw) + l2_norm_sq(f);
        };
        REQUIRE_THAT(weighted_norm_sq(s, 0, p),
                     Catch::Matchers::WithinRel(
                         graph(s.u, 0.5) + graph(s.v, 0.5) + l2_norm_sq(s.w), 1e-13));
        REQUIRE_THAT(weighted_norm_sq(s, 2, p),
                     Catch::Matchers::WithinRel(
                         graph(s.u, 1.0) + graph(s.v, 1.0) + graph(s.w, 0.5), 1e-13));
    }
    SECTION("unit mode-1 displacement, level 0: graph norm = 2") {
        SpectralField u(basis), v(basis), w(basis);
        u.coeffs[0] = 1.0; // lambda = 1
        REQUIRE_THAT(weighted_norm_sq(JmgtState(0.0, u, v, w), 0, p),
                     Catch::Matchers::WithinRel(2.0, 1e-15));
    }
    SECTION("monotone nonincreasing in tau at fixed state") {
        for (int level : {0, 1, 2}) {
            double prev = weighted_norm_sq(s, level, p.with_tau(1.0));
            for (double tau : {0.5, 0.1, 0.01, 0.0}) {
                const double cur = weighted_norm_sq(s, level, p.with_tau(tau));
                REQUIRE(cur <= prev + 1e-15);
                prev = cur;
            }
        }
    }
    SECTION("invalid level throws") {
        REQUIRE_THROWS_AS(weighted_norm_sq(s, 3, p), std::invalid_argument);
    }
}

TEST_CASE("well-prepared acceleration") {
    auto basis = build_basis(8, M_PI);
    TransformPlan plan = make_plan(basis, 1.5);
    ModelParams p;
    p.tau = 0.05;

    SECTION("k = 0 reduces to the linear compatibility rule") {
        ModelParams p0 = p;
        p0.k = 0.0;
        SpectralField u0(basis), u1(basis);
        u0.coeffs[0] = 0.3;
        u1.coeffs[2] = -0.2;
        SpectralField u2 = well_prepared_u2(u0, u1, p0, plan);
        const auto& lam = basis->eigenvalues;
        REQUIRE_THAT(u2.coeffs[0],
                     Catch::Matchers::WithinRel(-p0.c * p0.c * lam[0] * 0.3, 1e-14));
        REQUIRE_THAT(u2.coeffs[2],
                     Catch::Matchers::WithinRel(-p0.delta * lam[2] * -0.2, 1e-14));
    }
    SECTION("k correction approximately satisfies the limit equation at t = 0") {
        SpectralField u0(basis), u1(basis);
        u0.coeffs[0] = 1e-2;
        u1.coeffs[1] = -5e-3;
        SpectralField u2 = well_prepared_u2(u0, u1, p, plan);
        // residual of u2 - 2k P[u0 u2 + u1^2] + c^2 A u0 + delta A u1, which a
        // fully converged fixed point would null; one pass leaves O((k u0)^2)
        WestState ws(0.0, u0, u1);
        SpectralField exact = westervelt_accel(ws, p, plan);
        REQUIRE((u2.coeffs - exact.coeffs).lpNorm<Eigen::Infinity>() <=
                1e-3 * exact.coeffs.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("westervelt acceleration solves the quasilinear relation") {
    auto basis = build_basis(8, M_PI);
    TransformPlan plan = make_plan(basis, 2.0);
    ModelParams p;
    p.k = 1.0;
    SpectralField u(basis), v(basis);
    u.coeffs[0] = 1e-2;
    v.coeffs[1] = 2e-2;
    WestState s(0.0, u, v);
    SpectralField w = westervelt_accel(s, p, plan);

    // plug back: w must equal 2k P[u w + v^2] - c^2 A u - delta A v
    PhysicalField up = to_physical(u, plan), vp = to_physical(v, plan),
                  wp = to_physical(w, plan);
    PhysicalField prod = up;
    prod.samples = 2.0 * p.k * (up.samples.cwiseProduct(wp.samples) +
                                vp.samples.cwiseProduct(vp.samples));
    SpectralField rhs = to_spectral(prod, plan);
    rhs.coeffs -= p.c * p.c * (basis->eigenvalues.array() * u.coeffs.array()).matrix();
    rhs.coeffs -= p.delta * (basis->eigenvalues.array() * v.coeffs.array()).matrix();
    REQUIRE((w.coeffs - rhs.coeffs).lpNorm<Eigen::Infinity>() <=
            1e-12 * std::max(1.0, w.coeffs.lpNorm<Eigen::Infinity>()));
}

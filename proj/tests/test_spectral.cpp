#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "jmgtlab/spectral.hpp"

using namespace jmgtlab;

namespace {

SpectralField random_field(const BasisPtr& basis, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SpectralField f(basis);
    for (int i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] = dist(rng);
    return f;
}

// Trapezoid quadrature of the squared samples on the plan grid; with the
// sine-orthogonality weights this is exact for bandlimited integrands.
double grid_quadrature_sq(const PhysicalField& g, const TransformPlan& plan) {
    double w = plan.weight[0];
    if (g.basis->dim == 2) w *= plan.weight[1];
    return w * g.samples.squaredNorm();
}

} // namespace

TEST_CASE("eigenvalues follow the separable sine formula") {
    SECTION("1D, L = pi: lambda_m = m^2") {
        auto b = build_basis(4, M_PI);
        REQUIRE(b->num_modes() == 4);
        for (int m = 1; m <= 4; ++m)
            REQUIRE_THAT(b->eigenvalues[m - 1], Catch::Matchers::WithinRel(double(m) * m, 1e-14));
    }
    SECTION("2D, L = (pi, pi), N = 1: lambda = 2") {
        auto b = build_basis(2, 1, {M_PI, M_PI});
        REQUIRE(b->num_modes() == 1);
        REQUIRE_THAT(b->eigenvalues[0], Catch::Matchers::WithinRel(2.0, 1e-14));
    }
    SECTION("1D, L = 2") {
        auto b = build_basis(3, 2.0);
        for (int m = 1; m <= 3; ++m) {
            const double expected = (M_PI * m / 2.0) * (M_PI * m / 2.0);
            REQUIRE_THAT(b->eigenvalues[m - 1], Catch::Matchers::WithinRel(expected, 1e-14));
        }
    }
    SECTION("2D ordering is row-major over (m1, m2)") {
        auto b = build_basis(2, 3, {1.0, 2.0});
        const double k1 = M_PI / 1.0, k2 = M_PI / 2.0;
        // flat index (m1-1)*N + (m2-1)
        REQUIRE_THAT(b->eigenvalues[1 * 3 + 2],
                     Catch::Matchers::WithinRel(4.0 * k1 * k1 + 9.0 * k2 * k2, 1e-14));
    }
    SECTION("invalid construction is rejected") {
        REQUIRE_THROWS_AS(build_basis(3, 2, {1.0, 1.0}), ConfigError);
        REQUIRE_THROWS_AS(build_basis(0, M_PI), ConfigError);
        REQUIRE_THROWS_AS(build_basis(4, -1.0), ConfigError);
    }
}

TEST_CASE("apply_power_A scales coefficients by lambda^p") {
    auto b = build_basis(4, M_PI);
    SpectralField f(b);
    f.coeffs[1] = 1.0; // mode 2, lambda = 4
    REQUIRE_THAT(apply_power_A(f, 1.0).coeffs[1], Catch::Matchers::WithinRel(4.0, 1e-15));

    SECTION("half powers compose to the full operator") {
        SpectralField g = random_field(b, 11);
        SpectralField twice = apply_power_A(apply_power_A(g, 0.5), 0.5);
        SpectralField once = apply_power_A(g, 1.0);
        REQUIRE((twice.coeffs - once.coeffs).lpNorm<Eigen::Infinity>() <=
                1e-15 * once.coeffs.lpNorm<Eigen::Infinity>());
    }
    SECTION("zero field maps to zero field") {
        SpectralField z = zero_field(b);
        REQUIRE(apply_power_A(z, 0.5).coeffs.isZero());
    }
}

TEST_CASE("synthesis matches the direct mode formula") {
    // mode 1 on L = pi with M = 3 grid points: x_j = j pi/4
    auto b = build_basis(1, M_PI);
    SpectralField f(b);
    f.coeffs[0] = 1.0;
    TransformPlan plan = make_plan(b, 3.0); // M = 3
    PhysicalField g = to_physical(f, plan);
    REQUIRE(g.grid_per_axis == 3);
    const double scale = std::sqrt(2.0 / M_PI);
    REQUIRE_THAT(g.samples[0], Catch::Matchers::WithinRel(scale * std::sin(M_PI / 4), 1e-14));
    REQUIRE_THAT(g.samples[1], Catch::Matchers::WithinRel(scale * std::sin(M_PI / 2), 1e-14));
    REQUIRE_THAT(g.samples[2], Catch::Matchers::WithinRel(scale * std::sin(3 * M_PI / 4), 1e-14));
}

TEST_CASE("analysis recovers sine samples exactly") {
    auto b = build_basis(8, M_PI);
    TransformPlan plan = make_plan(b, 1.5);
    // samples of sin(2x)/sqrt(pi/2) = sqrt(2/pi) sin(2x) = e_2
    PhysicalField g;
    g.basis = b;
    g.grid_per_axis = plan.grid_per_axis;
    g.samples.resize(plan.grid_per_axis);
    for (int j = 1; j <= plan.grid_per_axis; ++j) {
        const double x = j * M_PI / (plan.grid_per_axis + 1);
        g.samples[j - 1] = std::sqrt(2.0 / M_PI) * std::sin(2.0 * x);
    }
    SpectralField f = to_spectral(g, plan);
    REQUIRE_THAT(f.coeffs[1], Catch::Matchers::WithinAbs(1.0, 1e-13));
    for (int m = 0; m < 8; ++m)
        if (m != 1) REQUIRE_THAT(f.coeffs[m], Catch::Matchers::WithinAbs(0.0, 1e-13));

    SECTION("zero samples give the zero field") {
        g.samples.setZero();
        REQUIRE(to_spectral(g, plan).coeffs.isZero());
    }
}

TEST_CASE("transform round trip is the identity on resolved modes") {
    for (int dim : {1, 2}) {
        const int N = dim == 1 ? 16 : 6;
        auto b = build_basis(dim, N, {M_PI, 1.3});
        SpectralField f = random_field(b, 23 + dim);
        for (double padding : {1.0, 1.5, 2.0}) {
            TransformPlan plan = make_plan(b, padding);
            SpectralField back = to_spectral(to_physical(f, plan), plan);
            INFO("dim " << dim << " padding " << padding);
            REQUIRE((back.coeffs - f.coeffs).lpNorm<Eigen::Infinity>() <= 1e-12);
        }
    }
}

TEST_CASE("to_spectral via target basis matches the plan path") {
    auto b = build_basis(6, M_PI);
    SpectralField f = random_field(b, 5);
    TransformPlan plan = make_plan(b, 1.5);
    PhysicalField g = to_physical(f, plan);
    SpectralField back = to_spectral(g, b);
    REQUIRE((back.coeffs - f.coeffs).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("Parseval: coefficient norm equals grid quadrature") {
    for (int dim : {1, 2}) {
        auto b = build_basis(dim, dim == 1 ? 32 : 8, {M_PI, 2.0});
        SpectralField f = random_field(b, 31 + dim);
        TransformPlan plan = make_plan(b, 1.5);
        const double quad = grid_quadrature_sq(to_physical(f, plan), plan);
        REQUIRE_THAT(quad, Catch::Matchers::WithinRel(l2_norm_sq(f), 1e-10));
    }
}

TEST_CASE("inner products are Euclidean on coefficients") {
    auto b = build_basis(4, M_PI);
    SpectralField e1(b), e2(b);
    e1.coeffs[0] = 1.0;
    e2.coeffs[1] = 1.0;
    REQUIRE(l2_inner(e1, e1) == 1.0);
    REQUIRE(l2_inner(e1, e2) == 0.0);

    auto other = build_basis(5, M_PI);
    SpectralField g(other);
    REQUIRE_THROWS_AS(l2_inner(e1, g), std::invalid_argument);
}

TEST_CASE("pointwise products") {
    auto b = build_basis(8, M_PI);
    TransformPlan plan = make_plan(b, 1.5);
    SpectralField s1(b);
    s1.coeffs[0] = 1.0;
    PhysicalField p1 = to_physical(s1, plan);

    SECTION("squaring matches sample-wise sin^2") {
        PhysicalField sq = pointwise_multiply(p1, p1);
        for (int j = 0; j < sq.samples.size(); ++j)
            REQUIRE_THAT(sq.samples[j],
                         Catch::Matchers::WithinAbs(p1.samples[j] * p1.samples[j], 1e-15));
    }
    SECTION("multiplying by all-ones is the identity") {
        PhysicalField ones = p1;
        ones.samples.setOnes();
        PhysicalField same = pointwise_multiply(p1, ones);
        REQUIRE((same.samples - p1.samples).lpNorm<Eigen::Infinity>() == 0.0);
    }
    SECTION("grid mismatch is a contract violation") {
        PhysicalField other = to_physical(s1, make_plan(b, 2.0));
        REQUIRE_THROWS_AS(pointwise_multiply(p1, other), std::invalid_argument);
    }
}

TEST_CASE("projected square of mode 1 matches analytic sine integrals") {
    // e_1^2 projected onto e_m: the exact coefficient is
    //   (2/pi) sqrt(2/pi) * Int_0^pi sin^2(y) sin(my) dy,
    //   Int = -2 (1 - (-1)^m) / (m (m^2 - 4)),
    // zero for even m by parity.  The pseudo-spectral analysis carries an
    // aliasing error that shrinks with padding, so tolerances are graded.
    auto b = build_basis(8, M_PI);
    SpectralField s1(b);
    s1.coeffs[0] = 1.0;

    auto analytic = [](int m) {
        if (m % 2 == 0) return 0.0;
        const double I = -4.0 / (m * (double(m) * m - 4.0));
        return (2.0 / M_PI) * std::sqrt(2.0 / M_PI) * I;
    };

    for (const auto& [padding, tol] : std::vector<std::pair<double, double>>{{1.5, 2e-3},
                                                                             {4.0, 2e-5}}) {
        TransformPlan plan = make_plan(b, padding);
        PhysicalField p1 = to_physical(s1, plan);
        SpectralField proj = to_spectral(pointwise_multiply(p1, p1), plan);
        for (int m = 1; m <= 8; ++m) {
            INFO("padding " << padding << " mode " << m);
            REQUIRE_THAT(proj.coeffs[m - 1], Catch::Matchers::WithinAbs(analytic(m), tol));
        }
        // even modes vanish identically: both the integrand and its aliases
        // are odd-parity free
        REQUIRE_THAT(proj.coeffs[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(proj.coeffs[3], Catch::Matchers::WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("transforms are linear") {
    auto b = build_basis(10, M_PI);
    TransformPlan plan = make_plan(b, 1.5);
    SpectralField f = random_field(b, 41), g = random_field(b, 43);
    const double alpha = 0.7, beta = -1.9;

    SpectralField combo(b);
    combo.coeffs = alpha * f.coeffs + beta * g.coeffs;
    PhysicalField lhs = to_physical(combo, plan);
    PhysicalField pf = to_physical(f, plan), pg = to_physical(g, plan);
    Eigen::VectorXd rhs = alpha * pf.samples + beta * pg.samples;
    REQUIRE((lhs.samples - rhs).lpNorm<Eigen::Infinity>() <= 1e-13);

    PhysicalField mix = pf;
    mix.samples = rhs;
    SpectralField analysed = to_spectral(mix, plan);
    Eigen::VectorXd expect =
        alpha * to_spectral(pf, plan).coeffs + beta * to_spectral(pg, plan).coeffs;
    REQUIRE((analysed.coeffs - expect).lpNorm<Eigen::Infinity>() <= 1e-13);
}

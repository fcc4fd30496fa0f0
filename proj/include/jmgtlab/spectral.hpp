#pragma once

// Dirichlet-Laplacian eigenbasis on 1D/2D rectangles.
//
// A = -Δ with zero boundary values diagonalizes in the sine basis
//   e_m(x) = Π_i sqrt(2/L_i) sin(m_i π x_i / L_i),   λ_m = Σ_i (π m_i / L_i)²,
// which is L²-orthonormal, so every norm downstream is a plain Euclidean
// norm on coefficient vectors.  Transforms to/from a uniform interior
// collocation grid are dense matrix products (desk scale, no FFT).

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jmgtlab {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigenbasis of the Dirichlet Laplacian on (0,L_1) x ... x (0,L_dim).
/// Mode ordering is row-major over (m_1, m_2), m_i in 1..N; in 1D the flat
/// index of mode m is m-1.  Immutable after construction.
struct SpectralBasis {
    int dim = 1;                       // 1 or 2
    int modes_per_axis = 0;            // N
    std::array<double, 2> lengths{};   // L_i, lengths[1] unused when dim == 1
    Eigen::VectorXd eigenvalues;       // λ, size N^dim

    int num_modes() const { return eigenvalues.size(); }

    bool same_as(const SpectralBasis& o) const {
        return dim == o.dim && modes_per_axis == o.modes_per_axis &&
               lengths == o.lengths;
    }
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

inline BasisPtr build_basis(int dim, int modes_per_axis, const std::vector<double>& lengths) {
    if (dim != 1 && dim != 2)
        throw ConfigError("build_basis: dim must be 1 or 2, got " + std::to_string(dim));
    if (modes_per_axis < 1)
        throw ConfigError("build_basis: modes_per_axis must be >= 1");
    if (static_cast<int>(lengths.size()) < dim)
        throw ConfigError("build_basis: need one length per axis");
    for (int i = 0; i < dim; ++i)
        if (!(lengths[i] > 0.0))
            throw ConfigError("build_basis: lengths must be > 0");

    auto b = std::make_shared<SpectralBasis>();
    b->dim = dim;
    b->modes_per_axis = modes_per_axis;
    b->lengths = {lengths[0], dim == 2 ? lengths[1] : 0.0};

    const int N = modes_per_axis;
    if (dim == 1) {
        b->eigenvalues.resize(N);
        for (int m = 1; m <= N; ++m) {
            const double km = M_PI * m / lengths[0];
            b->eigenvalues[m - 1] = km * km;
        }
    } else {
        b->eigenvalues.resize(N * N);
        for (int m1 = 1; m1 <= N; ++m1)
            for (int m2 = 1; m2 <= N; ++m2) {
                const double k1 = M_PI * m1 / lengths[0];
                const double k2 = M_PI * m2 / lengths[1];
                b->eigenvalues[(m1 - 1) * N + (m2 - 1)] = k1 * k1 + k2 * k2;
            }
    }
    return b;
}

inline BasisPtr build_basis(int modes_per_axis, double length) {
    return build_basis(1, modes_per_axis, {length});
}

/// Real coefficient vector in a SpectralBasis, one entry per mode.
struct SpectralField {
    BasisPtr basis;
    Eigen::VectorXd coeffs;

    SpectralField() = default;
    explicit SpectralField(BasisPtr b)
        : basis(std::move(b)), coeffs(Eigen::VectorXd::Zero(basis->num_modes())) {}
    SpectralField(BasisPtr b, Eigen::VectorXd c) : basis(std::move(b)), coeffs(std::move(c)) {
        if (coeffs.size() != basis->num_modes())
            throw std::invalid_argument("SpectralField: coefficient count != mode count");
    }
};

inline SpectralField zero_field(BasisPtr b) { return SpectralField(std::move(b)); }

inline bool is_finite(const SpectralField& f) { return f.coeffs.allFinite(); }

inline void require_same_basis(const SpectralField& a, const SpectralField& b, const char* op) {
    if (!a.basis || !b.basis || !a.basis->same_as(*b.basis))
        throw std::invalid_argument(std::string(op) + ": basis mismatch");
}

/// coeffs_m <- λ_m^p coeffs_m.  Realizes A (p = 1) and A^{1/2} (p = 1/2).
inline SpectralField apply_power_A(const SpectralField& f, double p) {
    SpectralField out = f;
    out.coeffs = f.basis->eigenvalues.array().pow(p) * f.coeffs.array();
    return out;
}

/// Parseval inner product (orthonormal basis): (f,g) = Σ_m f_m g_m.
inline double l2_inner(const SpectralField& f, const SpectralField& g) {
    require_same_basis(f, g, "l2_inner");
    return f.coeffs.dot(g.coeffs);
}

inline double l2_norm_sq(const SpectralField& f) { return f.coeffs.squaredNorm(); }
inline double l2_norm(const SpectralField& f) { return f.coeffs.norm(); }

/// ||A^{p} f||² = Σ λ^{2p} f_m² without materializing the operator power.
inline double sobolev_norm_sq(const SpectralField& f, double p) {
    if (p == 0.0) return f.coeffs.squaredNorm();
    return (f.basis->eigenvalues.array().pow(2.0 * p) * f.coeffs.array().square()).sum();
}

/// Point samples on the interior collocation grid x_j = j L/(M+1), j = 1..M
/// per axis, stored row-major over (j_1, j_2).
struct PhysicalField {
    BasisPtr basis;
    int grid_per_axis = 0;   // M
    Eigen::VectorXd samples; // size M^dim
};

/// Precomputed dense synthesis matrices for one (basis, padding) pair.
///
/// Analysis uses the sine-orthogonality quadrature weight h = L/(M+1),
/// exact for integrands bandlimited to the grid:
///   h Σ_j sin(mπx_j/L) sin(nπx_j/L) = (L/2) δ_mn   for m,n <= M,
/// so analysis∘synthesis is the identity on the retained N modes.
/// The default padding 1.5 (M = 3N/2) keeps quadratic products accurate;
/// modes above N are discarded (dealiasing by truncation).
struct TransformPlan {
    BasisPtr basis;
    double padding = 1.5;
    int grid_per_axis = 0;                      // M = round(padding * N)
    std::array<Eigen::MatrixXd, 2> synth{};     // per axis, M x N: S_jm = sqrt(2/L) sin(m π x_j / L)
    std::array<double, 2> weight{};             // h_i = L_i/(M+1)
};

inline TransformPlan make_plan(BasisPtr basis, double padding) {
    if (!(padding >= 1.0)) throw ConfigError("make_plan: padding must be >= 1");
    TransformPlan plan;
    plan.basis = basis;
    plan.padding = padding;
    const int N = basis->modes_per_axis;
    const int M = static_cast<int>(std::lround(padding * N));
    plan.grid_per_axis = M;
    for (int ax = 0; ax < basis->dim; ++ax) {
        const double L = basis->lengths[ax];
        Eigen::MatrixXd S(M, N);
        const double scale = std::sqrt(2.0 / L);
        for (int j = 1; j <= M; ++j) {
            const double x = j * L / (M + 1);
            for (int m = 1; m <= N; ++m)
                S(j - 1, m - 1) = scale * std::sin(m * M_PI * x / L);
        }
        plan.synth[ax] = std::move(S);
        plan.weight[ax] = L / (M + 1);
    }
    return plan;
}

/// samples_j = Σ_m coeffs_m e_m(x_j).
inline PhysicalField to_physical(const SpectralField& f, const TransformPlan& plan) {
    if (!f.basis->same_as(*plan.basis))
        throw std::invalid_argument("to_physical: plan built for a different basis");
    const int N = f.basis->modes_per_axis;
    const int M = plan.grid_per_axis;
    PhysicalField out;
    out.basis = f.basis;
    out.grid_per_axis = M;
    if (f.basis->dim == 1) {
        out.samples = plan.synth[0] * f.coeffs;
    } else {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            U(f.coeffs.data(), N, N);
        Eigen::MatrixXd P = plan.synth[0] * U * plan.synth[1].transpose();
        out.samples.resize(M * M);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            out.samples.data(), M, M) = P;
    }
    return out;
}

inline PhysicalField to_physical(const SpectralField& f, double padding) {
    return to_physical(f, make_plan(f.basis, padding));
}

/// coeffs_m = h^dim Σ_j g(x_j) e_m(x_j); modes above N are dropped.
inline SpectralField to_spectral(const PhysicalField& g, const TransformPlan& plan) {
    if (!g.basis->same_as(*plan.basis) || g.grid_per_axis != plan.grid_per_axis)
        throw std::invalid_argument("to_spectral: plan/grid mismatch");
    SpectralField out(plan.basis);
    const int N = plan.basis->modes_per_axis;
    const int M = plan.grid_per_axis;
    if (plan.basis->dim == 1) {
        out.coeffs = plan.weight[0] * (plan.synth[0].transpose() * g.samples);
    } else {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            P(g.samples.data(), M, M);
        Eigen::MatrixXd U = plan.weight[0] * plan.weight[1] *
                            (plan.synth[0].transpose() * P * plan.synth[1]);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            out.coeffs.data(), N, N) = U;
    }
    return out;
}

inline SpectralField to_spectral(const PhysicalField& g, BasisPtr target_basis) {
    if (!g.basis->same_as(*target_basis))
        throw std::invalid_argument("to_spectral: target basis differs from field basis");
    TransformPlan plan = make_plan(target_basis,
                                   static_cast<double>(g.grid_per_axis) / target_basis->modes_per_axis);
    if (plan.grid_per_axis != g.grid_per_axis)
        throw std::invalid_argument("to_spectral: grid resolution not reproducible from basis");
    return to_spectral(g, plan);
}

inline PhysicalField pointwise_multiply(const PhysicalField& a, const PhysicalField& b) {
    if (!a.basis->same_as(*b.basis) || a.grid_per_axis != b.grid_per_axis)
        throw std::invalid_argument("pointwise_multiply: grid mismatch");
    PhysicalField out = a;
    out.samples = a.samples.cwiseProduct(b.samples);
    return out;
}

} // namespace jmgtlab

#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "mpdae/index_lab.hpp"
#include "mpdae/initializer.hpp"
#include "mpdae/mol_system.hpp"

namespace testing {

using namespace mpdae;

inline std::mt19937_64& rng()
{
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo = -1.0, double hi = 1.0)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Vector random_vector(int n, double lo = -1.0, double hi = 1.0)
{
    Vector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = uniform(lo, hi);
    return v;
}

inline Matrix random_matrix(int r, int c, double lo = -1.0, double hi = 1.0)
{
    Matrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            M(i, j) = uniform(lo, hi);
    return M;
}

/// Random linear model with a well-conditioned G_z.
inline SemiExplicitModel random_linear_model(int ny, int nz)
{
    LinearModelSpec s;
    s.A = random_matrix(ny, ny);
    s.B = random_matrix(ny, nz);
    s.G_y = random_matrix(nz, ny);
    s.G_z = Matrix::Identity(nz, nz) * 2.0 + 0.3 * random_matrix(nz, nz);
    return make_linear_model(s);
}

/// Grid whose lines sample a smooth periodic profile with random harmonics.
inline Lines smooth_periodic_lines(int m, int n)
{
    Lines L(m, n);
    for (int c = 0; c < n; ++c) {
        const double a1 = uniform(0.5, 1.0), a2 = uniform(-0.3, 0.3), ph = uniform(0.0, 6.0), off = uniform();
        for (int i = 0; i < m; ++i) {
            const double s = 2.0 * std::numbers::pi * i / m;
            L(i, c) = off + a1 * std::sin(s + ph) + a2 * std::cos(2.0 * s + ph);
        }
    }
    return L;
}

inline double rel_diff(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Small method-of-lines instance from a random linear model at a random point.
struct RandomInstance
{
    MolSystem sys;
    GridState state;
    GridState xdot;
    JacobianBlocks blocks;
};

inline RandomInstance random_instance(CouplingKind kind)
{
    const int m = uniform(0.0, 1.0) < 0.5 ? 4 : 8;
    const int ny = uniform(0.0, 1.0) < 0.5 ? 1 : 2;
    const int nz = uniform(0.0, 1.0) < 0.5 ? 1 : 2;
    const auto model = random_linear_model(ny, nz);
    const auto st = uniform(0.0, 1.0) < 0.5 ? bdf1() : bdf2();
    const int comp = static_cast<int>(uniform(0.0, 1.0) * (kind == CouplingKind::PhaseAlgebraic ? nz : ny)) %
                     (kind == CouplingKind::PhaseAlgebraic ? nz : ny);
    CouplingCondition c = CouplingCondition::phase_differential(comp);
    if (kind == CouplingKind::PhaseAlgebraic)
        c = CouplingCondition::phase_algebraic(comp);
    if (kind == CouplingKind::Optimality) {
        Vector wy = random_vector(ny, 0.2, 2.0), wz = random_vector(nz, 0.2, 2.0);
        const double r = uniform(0.0, 1.0);
        if (r < 0.3)
            wz.setZero();
        else if (r < 0.5)
            wy.setZero();
        c = CouplingCondition::optimality(wy, wz);
    }
    MolSystem sys(model, st, m, c);
    GridState x = GridState::zeros(m, ny, nz);
    x.y_lines() = smooth_periodic_lines(m, ny) + 0.1 * Lines(random_matrix(m, ny));
    x.z_lines() = smooth_periodic_lines(m, nz) + 0.1 * Lines(random_matrix(m, nz));
    x.nu = uniform(0.5, 3.0);
    GridState v = GridState::zeros(m, ny, nz);
    v.x1 = random_vector(m * ny);
    v.x2 = random_vector(m * nz);
    auto blocks = jacobian_blocks(sys, 0.0, x, v);
    return {std::move(sys), std::move(x), std::move(v), std::move(blocks)};
}

} // namespace testing

#include <doctest.h>

#include <numbers>

#include "mpdae/error.hpp"
#include "mpdae/postproc.hpp"
#include "support.hpp"

using namespace mpdae;
using namespace testing;

namespace {

Trajectory synthetic(const std::vector<double>& times, const std::vector<double>& nu, int m, int ny, int nz)
{
    Trajectory tr;
    tr.times = times;
    tr.nu = nu;
    for (std::size_t n = 0; n < times.size(); ++n) {
        GridState s = GridState::zeros(m, ny, nz);
        s.x1 = random_vector(m * ny);
        s.x2 = random_vector(m * nz);
        s.nu = nu[n];
        tr.states.push_back(s);
        tr.iterations.push_back(0);
        tr.constraint_residual.push_back(0.0);
    }
    return tr;
}

/// Periodic linear interpolation of line values at t2 in [0, 1).
double sample_lines(const Vector& col, double t2)
{
    const int m = static_cast<int>(col.size());
    const double pos = t2 * m;
    const int i = static_cast<int>(std::floor(pos)) % m;
    const double th = pos - std::floor(pos);
    return (1.0 - th) * col(i) + th * col((i + 1) % m);
}

} // namespace

TEST_CASE("oscillation functional")
{
    const int m = 200;
    const CirculantOperator<double> op(bdf2(), m);
    GridState s = GridState::zeros(m, 1, 1);
    CHECK(functional_value(s, op, Vector::Ones(1), Vector::Ones(1)) == 0.0);
    s.x1.setConstant(3.0);
    s.x2.setConstant(-1.0);
    CHECK(functional_value(s, op, Vector::Ones(1), Vector::Ones(1)) == 0.0);

    for (int i = 0; i < m; ++i)
        s.x1(i) = std::sin(2.0 * std::numbers::pi * i / m);
    const double J = functional_value(s, op, Vector::Ones(1), Vector::Zero(1));
    CHECK(J == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(0.01));
    CHECK(functional_value(s, op, Vector::Constant(1, 2.0), Vector::Zero(1)) == doctest::Approx(2.0 * J));
    CHECK_THROWS_AS(functional_value(s, op, Vector::Ones(2), Vector::Zero(1)), InvalidArgument);

    const auto tr = synthetic({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}, 8, 2, 1);
    const CirculantOperator<double> op8(bdf1(), 8);
    const auto f = functional_pointwise(tr, op8, Vector::Ones(2), Vector::Ones(1));
    REQUIRE(f.values.size() == 3);
    for (std::size_t n = 0; n < 3; ++n)
        CHECK(f.values[n] == functional_value(tr.states[n], op8, Vector::Ones(2), Vector::Ones(1)));
}

TEST_CASE("phase bookkeeping")
{
    Phase p;
    p.add(0.75);
    p.add(0.5);
    CHECK(p.turns == 1.0);
    CHECK(p.fraction == doctest::Approx(0.25));
    p.add(1e6 + 0.125);
    CHECK(p.turns == 1e6 + 1.0);
    CHECK(p.fraction == doctest::Approx(0.375).epsilon(1e-9));

    const auto tr = synthetic({0.0, 1.0, 3.0}, {2.0, 4.0, 4.0}, 4, 1, 1);
    const auto ph = phase_at_steps(tr);
    CHECK(ph[0].value() == 0.0);
    CHECK(ph[1].value() == doctest::Approx(3.0));
    CHECK(ph[2].value() == doctest::Approx(11.0));
}

TEST_CASE("reconstruction")
{
    SUBCASE("constant frequency gives Psi = nu t")
    {
        const double nu = 3.3;
        const auto tr = synthetic({0.0, 0.4, 0.8, 1.2}, {nu, nu, nu, nu}, 10, 2, 1);
        const auto rs = reconstruct(tr, {7, {}});
        REQUIRE(rs.times.size() == 3 * 7 + 1);
        for (std::size_t k = 0; k < rs.times.size(); ++k) {
            CHECK(rs.psi[k] == doctest::Approx(nu * rs.times[k]).epsilon(1e-13).scale(1.0));
            CHECK(rs.psi_fraction[k] >= 0.0);
            CHECK(rs.psi_fraction[k] < 1.0);
        }
    }
    SUBCASE("bilinear sampling agrees with an independent interpolation")
    {
        const std::vector<double> times = {0.0, 0.25, 0.5};
        const std::vector<double> nu = {2.0, 3.0, 2.5};
        const auto tr = synthetic(times, nu, 12, 2, 2);
        std::vector<double> sample_t;
        for (int k = 0; k <= 50; ++k)
            sample_t.push_back(0.5 * k / 50.0);
        const auto rs = reconstruct(tr, {1, sample_t});
        for (std::size_t k = 0; k < sample_t.size(); ++k) {
            const double t = sample_t[k];
            const std::size_t n = t <= 0.25 ? 0 : 1;
            const double ta = times[n], dt = 0.25, tau = t - ta;
            double psi = n == 0 ? 0.0 : 0.5 * 0.25 * (2.0 + 3.0);
            psi += tau * nu[n] + 0.5 * tau * tau * (nu[n + 1] - nu[n]) / dt;
            CHECK(rs.psi[k] == doctest::Approx(psi).epsilon(1e-13).scale(1.0));
            const double t2 = psi - std::floor(psi);
            const double th = tau / dt;
            for (int c = 0; c < 2; ++c) {
                const double ya = sample_lines(Vector(tr.states[n].y_lines().col(c)), t2);
                const double yb = sample_lines(Vector(tr.states[n + 1].y_lines().col(c)), t2);
                CHECK(rs.values(static_cast<Eigen::Index>(k), c) ==
                      doctest::Approx((1 - th) * ya + th * yb).epsilon(1e-12).scale(1.0));
                const double za = sample_lines(Vector(tr.states[n].z_lines().col(c)), t2);
                const double zb = sample_lines(Vector(tr.states[n + 1].z_lines().col(c)), t2);
                CHECK(rs.values(static_cast<Eigen::Index>(k), 2 + c) ==
                      doctest::Approx((1 - th) * za + th * zb).epsilon(1e-12).scale(1.0));
            }
        }
    }
    SUBCASE("zero frequency follows line 1")
    {
        const auto tr = synthetic({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, 6, 1, 1);
        const auto rs = reconstruct(tr, {4, {}});
        for (std::size_t k = 0; k < rs.times.size(); ++k) {
            const double t = rs.times[k];
            const std::size_t n = std::min<std::size_t>(1, static_cast<std::size_t>(t));
            const double th = t - static_cast<double>(n);
            CHECK(rs.values(static_cast<Eigen::Index>(k), 0) ==
                  doctest::Approx((1 - th) * tr.states[n].x1(0) + th * tr.states[n + 1].x1(0)));
        }
    }
    SUBCASE("grids constant in t2 ignore the frequency")
    {
        auto tr = synthetic({0.0, 0.5, 1.0}, {5.0, 7.0, 6.0}, 8, 1, 1);
        for (std::size_t n = 0; n < 3; ++n) {
            tr.states[n].x1.setConstant(static_cast<double>(n));
            tr.states[n].x2.setConstant(-2.0 * static_cast<double>(n));
        }
        const auto rs = reconstruct(tr, {5, {}});
        for (std::size_t k = 0; k < rs.times.size(); ++k) {
            CHECK(rs.values(static_cast<Eigen::Index>(k), 0) == doctest::Approx(2.0 * rs.times[k]));
            CHECK(rs.values(static_cast<Eigen::Index>(k), 1) == doctest::Approx(-4.0 * rs.times[k]));
        }
    }
    SUBCASE("phase is monotone for positive frequency")
    {
        const auto tr = synthetic({0.0, 0.1, 0.2, 0.3, 0.4}, {10.0, 80.0, 3.0, 40.0, 1.0}, 4, 1, 1);
        const auto rs = reconstruct(tr, {25, {}});
        for (std::size_t k = 1; k < rs.psi.size(); ++k)
            CHECK(rs.psi[k] > rs.psi[k - 1]);
    }
    SUBCASE("errors")
    {
        const auto tr = synthetic({0.0, 1.0}, {1.0, 1.0}, 4, 1, 1);
        CHECK_THROWS_AS(reconstruct(tr, {1, {1.5}}), InvalidArgument);
        CHECK_THROWS_AS(reconstruct(Trajectory{}), InvalidArgument);
    }
}

TEST_CASE("frequency comparison")
{
    const auto a = synthetic({0.0, 0.5, 1.0}, {2.0, 3.0, 4.0}, 4, 1, 1);
    auto b = a;
    const auto same = frequency_diff(a, b);
    CHECK(same.max_abs == 0.0);
    CHECK(same.max_rel == 0.0);

    b.nu = {2.0, 2.0, 5.0};
    const auto d = frequency_diff(a, b);
    CHECK(d.absolute[1] == 1.0);
    CHECK(d.relative[1] == 0.5);
    CHECK(d.relative[2] == doctest::Approx(0.2));
    CHECK(d.max_abs == 1.0);
    CHECK(d.max_rel == 0.5);
    CHECK(d.mean_abs == doctest::Approx(2.0 / 3.0));

    auto c = a;
    c.times[1] = 0.6;
    CHECK_THROWS_AS(frequency_diff(a, c), InvalidArgument);
    const auto shorter = synthetic({0.0, 0.5}, {1.0, 1.0}, 4, 1, 1);
    CHECK_THROWS_AS(frequency_diff(a, shorter), InvalidArgument);
}

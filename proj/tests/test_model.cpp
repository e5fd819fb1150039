#include <doctest.h>

#include "mpdae/error.hpp"
#include "mpdae/model.hpp"
#include "support.hpp"

using namespace mpdae;
using namespace testing;

namespace {

RingOscillatorParams three_stage()
{
    RingOscillatorParams p;
    p.input = make_input_harmonic(1.0);
    return p;
}

} // namespace

TEST_CASE("ring oscillator has the stated structure")
{
    const auto model = make_ring_oscillator(three_stage());
    CHECK(model.n_y == 3);
    CHECK(model.n_z == 3);

    const Vector zero = Vector::Zero(3);
    for (double t : {0.0, 0.1, 0.37})
        CHECK(model.g(t, zero, zero).norm() == 0.0);

    const Matrix gz = model.dg_dz(0.2, random_vector(3), random_vector(3));
    CHECK((gz - 1e3 * Matrix::Identity(3, 3)).norm() == 0.0);

    // f_1 = z_1 / (C b(t)), f_i = z_i / C, evaluated against a direct formula
    const Vector z = random_vector(3, -1e-3, 1e-3);
    const double t = 0.25;
    const Vector f = model.f(t, random_vector(3), z);
    CHECK(f(0) == doctest::Approx(z(0) / (1e-6 * 1.5)).epsilon(1e-14));
    CHECK(f(1) == doctest::Approx(z(1) / 1e-6).epsilon(1e-14));
    CHECK(f(2) == doctest::Approx(z(2) / 1e-6).epsilon(1e-14));

    // g_i = R z_i - (tanh(G u_pred(i)) - u_i), pred(1) = k
    const Vector y = random_vector(3);
    const Vector g = model.g(t, y, z);
    CHECK(g(0) == doctest::Approx(1e3 * z(0) - (std::tanh(-5.0 * y(2)) - y(0))));
    CHECK(g(1) == doctest::Approx(1e3 * z(1) - (std::tanh(-5.0 * y(0)) - y(1))));
    CHECK(g(2) == doctest::Approx(1e3 * z(2) - (std::tanh(-5.0 * y(1)) - y(2))));

    const Matrix gy = model.dg_dy(t, y, z);
    CHECK(gy.diagonal().isOnes());
    const double th = std::tanh(-5.0 * y(2));
    CHECK(gy(0, 2) == doctest::Approx(5.0 * (1.0 - th * th)));
}

TEST_CASE("ring oscillator parameter validation")
{
    auto p = three_stage();
    p.k = 4;
    CHECK_THROWS_AS(make_ring_oscillator(p), InvalidArgument);
    p = three_stage();
    p.C = 0.0;
    CHECK_THROWS_AS(make_ring_oscillator(p), InvalidArgument);
    p = three_stage();
    p.R = -1.0;
    CHECK_THROWS_AS(make_ring_oscillator(p), InvalidArgument);
    p = three_stage();
    p.k = 11;
    CHECK_NOTHROW(make_ring_oscillator(p));
}

TEST_CASE("input signals")
{
    const auto h = make_input_harmonic(1.0);
    CHECK(h.b(0.0) == 1.0);
    CHECK(h.b(0.25) == doctest::Approx(1.5).epsilon(1e-15));

    const double T = 1e-4;
    const auto s = make_input_sinsq(T);
    CHECK(s.b(T / 4) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.b(0.0) == 1.0);

    const std::vector<std::pair<InputSignal, double>> signals = {
        {h, 1.0}, {s, T}, {make_input_harmonic(0.3, 0.7), 0.3}, {make_input_sinsq(2.0, 0.4), 2.0}};
    for (const auto& [in, period] : signals) {
        for (int k = 0; k < 20; ++k) {
            const double t = uniform(0.0, period);
            const double step = 1e-5 * period;
            const double fd = (in.b(t + step) - in.b(t - step)) / (2.0 * step);
            const double scale = std::abs(in.db_dt(t)) + 1.0 / period;
            CHECK(std::abs(in.db_dt(t) - fd) <= 1e-7 * scale);
        }
    }

    CHECK_THROWS_AS(make_input_harmonic(0.0), InvalidArgument);
    CHECK_THROWS_AS(make_input_sinsq(-1.0), InvalidArgument);
    CHECK(make_input_constant(2.0).db_dt(0.3) == 0.0);
}

TEST_CASE("analytic Jacobians agree with finite differences")
{
    SUBCASE("ring oscillator at random points")
    {
        auto p = three_stage();
        for (int k : {3, 5, 11}) {
            p.k = k;
            const auto model = make_ring_oscillator(p);
            for (int trial = 0; trial < 10; ++trial) {
                const Vector y = random_vector(k, -1.5, 1.5);
                const Vector z = random_vector(k, -2e-3, 2e-3);
                CHECK(check_jacobians(model, uniform(0.0, 1.0), y, z, 1e-6) < 1e-6);
            }
        }
    }
    SUBCASE("linear model is exact up to roundoff")
    {
        const auto model = random_linear_model(3, 2);
        CHECK(check_jacobians(model, 0.1, random_vector(3), random_vector(2), 1e-6) < 1e-9);
    }
    SUBCASE("constant input makes the ring oscillator autonomous")
    {
        RingOscillatorParams p;
        const auto model = make_ring_oscillator(p);
        const Vector y = random_vector(3), z = random_vector(3, -1e-3, 1e-3);
        CHECK(model.df_dt(0.3, y, z).norm() == 0.0);
        CHECK(model.dg_dt(0.3, y, z).norm() == 0.0);
        CHECK((model.f(0.1, y, z) - model.f(0.9, y, z)).norm() == 0.0);
    }
}

TEST_CASE("linear models")
{
    LinearModelSpec s;
    s.A = Matrix::Identity(2, 2);
    s.B = Matrix::Zero(2, 1);
    s.G_y = Matrix::Ones(1, 2);
    s.G_z = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(make_linear_model(s), SingularConstraintJacobian);

    const auto osc = make_linear_oscillator();
    REQUIRE(osc.linear_constraints);
    const Vector y = random_vector(2);
    CHECK(osc.g(0.0, y, y).norm() == 0.0);
}

TEST_CASE("freeze_time holds the input fixed")
{
    const auto model = make_ring_oscillator(three_stage());
    const auto frozen = freeze_time(model, 0.25);
    const Vector y = random_vector(3), z = random_vector(3, -1e-3, 1e-3);
    CHECK((frozen.f(0.9, y, z) - model.f(0.25, y, z)).norm() == 0.0);
    CHECK(frozen.df_dt(0.9, y, z).norm() == 0.0);
}

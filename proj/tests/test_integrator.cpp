#include <doctest.h>

#include "mpdae/error.hpp"
#include "mpdae/integrator.hpp"
#include "support.hpp"

using namespace mpdae;
using namespace testing;

namespace {

/// u' = lambda u, v' = 0, z = u. u is flat in t2 and v is pinned, so nu stays 0.
MolSystem scalar_harness(double lambda, int m)
{
    LinearModelSpec s;
    s.A = Matrix::Zero(2, 2);
    s.A(0, 0) = lambda;
    s.B = Matrix::Zero(2, 1);
    s.G_y = Matrix::Zero(1, 2);
    s.G_y(0, 0) = -1.0;
    s.G_z = Matrix::Ones(1, 1);
    return MolSystem(make_linear_model(s), bdf2(), m, CouplingCondition::phase_differential(1));
}

ConsistentPoint harness_start(const MolSystem& sys, double u0)
{
    InitGuess g;
    g.y.resize(sys.m(), 2);
    for (int i = 0; i < sys.m(); ++i) {
        g.y(i, 0) = u0;
        g.y(i, 1) = std::sin(2.0 * std::numbers::pi * i / sys.m());
    }
    return consistent_init(sys, g);
}

MolSystem ring_system(int m, CouplingCondition c)
{
    RingOscillatorParams p;
    p.input = make_input_harmonic(1.0);
    return MolSystem(make_ring_oscillator(p), bdf2(), m, std::move(c));
}

ConsistentPoint ring_start(const MolSystem& sys)
{
    static const PeriodicSeed seed = [] {
        RingOscillatorParams p;
        p.input = make_input_harmonic(1.0);
        return periodic_seed(make_ring_oscillator(p), 30);
    }();
    return consistent_init(sys, seed.as_guess());
}

} // namespace

TEST_CASE("implicit Euler on the scalar harness matches the closed form")
{
    for (double lambda : {-3.0, -0.5, 1.0}) {
        CAPTURE(lambda);
        const auto sys = scalar_harness(lambda, 8);
        const auto init = harness_start(sys, 1.25);
        CHECK(init.state.nu == 0.0);
        IntegratorConfig cfg;
        cfg.steps = 40;
        cfg.t_end = 2.0;
        const auto traj = integrate(sys, init, cfg);
        REQUIRE(traj.size() == 41);
        const double dt = 2.0 / 40;
        for (std::size_t n = 0; n < traj.size(); ++n) {
            const double expected = 1.25 / std::pow(1.0 - lambda * dt, static_cast<double>(n));
            for (int i = 0; i < 8; ++i) {
                CHECK(traj.states[n].y_line(i)(0) == doctest::Approx(expected).epsilon(1e-12));
                CHECK(traj.states[n].z_line(i)(0) == doctest::Approx(expected).epsilon(1e-12));
            }
            CHECK(std::abs(traj.nu[n]) < 1e-12);
            CHECK(traj.times[n] == doctest::Approx(n * dt).epsilon(1e-15));
        }
        CHECK(!traj.drift_exceeded);
    }
}

TEST_CASE("ring oscillator trajectories stay on the constraint manifold")
{
    Vector w = Vector::Ones(3);
    for (auto c : {CouplingCondition::phase_differential(0), CouplingCondition::optimality(w, Vector::Zero(3)),
                   CouplingCondition::optimality(w, w)}) {
        CAPTURE(c.describe());
        const auto sys = ring_system(30, c);
        IntegratorConfig cfg;
        cfg.steps = 50;
        cfg.t_end = 1.0;
        const auto traj = integrate(sys, ring_start(sys), cfg);
        REQUIRE(traj.size() == 51);
        for (std::size_t n = 0; n < traj.size(); ++n) {
            CHECK(traj.constraint_residual[n] < 1e-10);
            CHECK(traj.nu[n] > 0.0);
            CHECK(traj.iterations[n] <= cfg.max_newton);
        }
        CHECK(traj.iterations[0] == 0);
        if (c.is_phase())
            for (const auto& s : traj.states)
                CHECK(s.y_line(0)(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    }
}

TEST_CASE("step size halving halves the error")
{
    const auto sys = ring_system(30, CouplingCondition::phase_differential(0));
    const auto init = ring_start(sys);
    auto final_nu = [&](int steps) {
        IntegratorConfig cfg;
        cfg.steps = steps;
        cfg.t_end = 0.25;
        cfg.newton_tol = 1e-12;
        return integrate(sys, init, cfg).nu.back();
    };
    const double n1 = final_nu(25), n2 = final_nu(50), n3 = final_nu(100);
    const double ratio = (n1 - n2) / (n2 - n3);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("integration is deterministic")
{
    const auto sys = ring_system(30, CouplingCondition::optimality(Vector::Ones(3), Vector::Ones(3)));
    IntegratorConfig cfg;
    cfg.steps = 20;
    cfg.t_end = 0.5;
    const auto init = ring_start(sys);
    const auto a = integrate(sys, init, cfg);
    const auto b = integrate(sys, init, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        CHECK(a.nu[n] == b.nu[n]);
        CHECK((a.states[n].stacked().array() == b.states[n].stacked().array()).all());
    }
}

TEST_CASE("single steps and workspace reuse")
{
    const auto sys = ring_system(30, CouplingCondition::phase_differential(0));
    const auto init = ring_start(sys);
    CHECK_THROWS_AS(step(sys, 0.0, init.state, 0.0), InvalidArgument);
    CHECK_THROWS_AS(step(sys, 0.0, init.state, -1e-3), InvalidArgument);

    StepWorkspace ws;
    const double dt = 0.01;
    auto r = step(sys, 0.0, init.state, dt, {}, &ws);
    CHECK(scaled_residual_norm(sys, dt, r.state, init.state, dt) <= 1e-10);
    const int after_first = ws.factorizations;
    CHECK(after_first >= 1);
    for (int n = 1; n < 10; ++n)
        r = step(sys, n * dt, r.state, dt, {}, &ws);
    CHECK(ws.factorizations < 10 * after_first + 1);

    const StepResult fresh = step(sys, 0.0, init.state, dt);
    const StepResult reused = step(sys, 0.0, init.state, dt, {}, &ws);
    CHECK((fresh.state.stacked() - reused.state.stacked()).cwiseAbs().maxCoeff() < 1e-9);

    const Vector sc = residual_scaling(sys, dt);
    CHECK(sc.size() == sys.n_bar());
    CHECK(sc(0) == dt);
    CHECK(sc(sys.n1()) == 1.0);
    CHECK(sc(sys.n_bar() - 1) == 1.0);
    const auto opt = ring_system(30, CouplingCondition::optimality(Vector::Ones(3), Vector::Ones(3)));
    CHECK(residual_scaling(opt, dt)(opt.n_bar() - 1) == doctest::Approx(dt * opt.h()));
}

TEST_CASE("configuration checks")
{
    IntegratorConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.newton_tol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());
}

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mpdae/types.hpp"

namespace mpdae {

/// Scalar input signal b(t) with its exact derivative.
struct InputSignal
{
    std::function<double(double)> b;
    std::function<double(double)> db_dt;
    std::string description;
};

/// b(t) = 1 + amplitude * sin(2 pi t / period)
InputSignal make_input_harmonic(double period, double amplitude = 0.5);
/// b(t) = 1 + amplitude * sin^2(2 pi t / period)
InputSignal make_input_sinsq(double period, double amplitude = 2.0);
InputSignal make_input_constant(double value = 1.0);

/// Constant matrices of a constraint g = G_y y + G_z z + b_g(t).
struct LinearConstraints
{
    Matrix G_y;
    Matrix G_z;
};

/// Semi-explicit index-1 DAE
///     y' = f(t, y, z)
///      0 = g(t, y, z)
/// with analytic first-order Jacobians. Input signals are folded into t.
struct SemiExplicitModel
{
    using VecMap = std::function<Vector(double, const Vector&, const Vector&)>;
    using MatMap = std::function<Matrix(double, const Vector&, const Vector&)>;

    int n_y = 0;
    int n_z = 0;

    VecMap f;
    VecMap g;
    MatMap df_dy;
    MatMap df_dz;
    MatMap dg_dy;
    MatMap dg_dz;
    VecMap df_dt;
    VecMap dg_dt;

    std::string name;

    /// Present when g is affine in (y, z) with constant coefficients.
    std::optional<LinearConstraints> linear_constraints;

    /// Throws InvalidArgument when dimensions or callbacks are missing.
    void validate() const;
};

struct RingOscillatorParams
{
    int k = 3;
    double C = 1e-6;
    double R = 1e3;
    double G = -5.0;
    InputSignal input = make_input_constant();

    void validate() const;
};

/// k-stage ring oscillator: y = node voltages u_1..u_k, z = branch currents.
///     u_1' = i_1 / (C b(t)),   u_j' = i_j / C
///        0 = R i_j - (tanh(G u_{j-1}) - u_j),   u_0 := u_k
SemiExplicitModel make_ring_oscillator(const RingOscillatorParams& params);

/// Linear model y' = A y + B z + f0(t), 0 = G_y y + G_z z + b_g(t).
struct LinearModelSpec
{
    Matrix A, B, G_y, G_z;
    std::function<Vector(double)> f0;      // optional, zero if empty
    std::function<Vector(double)> df0_dt;
    std::function<Vector(double)> b_g;
    std::function<Vector(double)> db_g_dt;
};

SemiExplicitModel make_linear_model(const LinearModelSpec& spec);

/// Two-dimensional rotation y' = omega J y wrapped as a DAE with z = y.
/// Period is 2 pi / omega; the constraint is linear.
SemiExplicitModel make_linear_oscillator(double omega = 2.0 * 3.14159265358979323846, double coupling = 0.5);

/// Model evaluated with t held fixed (autonomous version under frozen input).
SemiExplicitModel freeze_time(const SemiExplicitModel& model, double t_frozen);

/// Worst relative deviation between analytic Jacobians and central
/// differences of f, g. Each block is normalised by its largest analytic entry.
double check_jacobians(const SemiExplicitModel& model, double t, const Vector& y, const Vector& z,
                       double h_fd);

} // namespace mpdae

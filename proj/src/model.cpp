#include "mpdae/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpdae/error.hpp"

namespace mpdae {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_period(double period)
{
    if (!(period > 0.0) || !std::isfinite(period))
        throw InvalidArgument("input period must be positive, got " + std::to_string(period));
}

} // namespace

InputSignal make_input_harmonic(double period, double amplitude)
{
    require_period(period);
    const double w = two_pi / period;
    return {
        [=](double t) { return 1.0 + amplitude * std::sin(w * t); },
        [=](double t) { return amplitude * w * std::cos(w * t); },
        "harmonic: 1 + " + std::to_string(amplitude) + " sin(2 pi t / " + std::to_string(period) + ")",
    };
}

InputSignal make_input_sinsq(double period, double amplitude)
{
    require_period(period);
    const double w = two_pi / period;
    return {
        [=](double t) {
            const double s = std::sin(w * t);
            return 1.0 + amplitude * s * s;
        },
        // d/dt sin^2(wt) = w sin(2wt)
        [=](double t) { return amplitude * w * std::sin(2.0 * w * t); },
        "sinsq: 1 + " + std::to_string(amplitude) + " sin^2(2 pi t / " + std::to_string(period) + ")",
    };
}

InputSignal make_input_constant(double value)
{
    return {
        [=](double) { return value; },
        [](double) { return 0.0; },
        "constant: " + std::to_string(value),
    };
}

void SemiExplicitModel::validate() const
{
    if (n_y <= 0 || n_z <= 0)
        throw InvalidArgument("model dimensions must be positive");
    if (!f || !g || !df_dy || !df_dz || !dg_dy || !dg_dz || !df_dt || !dg_dt)
        throw InvalidArgument("model '" + name + "' is missing a callback");
}

void RingOscillatorParams::validate() const
{
    if (k < 1 || k % 2 == 0)
        throw InvalidArgument("ring oscillator needs an odd positive stage count, got k = " +
                              std::to_string(k));
    if (!(C > 0.0))
        throw InvalidArgument("capacitance C must be positive");
    if (!(R > 0.0))
        throw InvalidArgument("resistance R must be positive");
    if (!input.b || !input.db_dt)
        throw InvalidArgument("ring oscillator input signal is empty");
}

SemiExplicitModel make_ring_oscillator(const RingOscillatorParams& params)
{
    params.validate();
    const int k = params.k;
    const double C = params.C;
    const double R = params.R;
    const double G = params.G;
    const InputSignal in = params.input;

    auto pred = [k](int i) { return i == 0 ? k - 1 : i - 1; };

    SemiExplicitModel m;
    m.n_y = k;
    m.n_z = k;
    m.name = "ring_oscillator(k=" + std::to_string(k) + ")";

    m.f = [=](double t, const Vector&, const Vector& z) {
        Vector out = z / C;
        out(0) /= in.b(t);
        return out;
    };
    m.g = [=](double, const Vector& y, const Vector& z) {
        Vector out(k);
        for (int i = 0; i < k; ++i)
            out(i) = R * z(i) - (std::tanh(G * y(pred(i))) - y(i));
        return out;
    };
    m.df_dy = [=](double, const Vector&, const Vector&) { return Matrix::Zero(k, k).eval(); };
    m.df_dz = [=](double t, const Vector&, const Vector&) {
        Matrix J = Matrix::Identity(k, k) / C;
        J(0, 0) /= in.b(t);
        return J;
    };
    m.dg_dy = [=](double, const Vector& y, const Vector&) {
        Matrix J = Matrix::Identity(k, k);
        for (int i = 0; i < k; ++i) {
            const double th = std::tanh(G * y(pred(i)));
            // sech^2 = 1 - tanh^2 stays bounded for large |G u|
            J(i, pred(i)) -= G * (1.0 - th * th);
        }
        return J;
    };
    m.dg_dz = [=](double, const Vector&, const Vector&) {
        return (R * Matrix::Identity(k, k)).eval();
    };
    m.df_dt = [=](double t, const Vector&, const Vector& z) {
        Vector out = Vector::Zero(k);
        const double b = in.b(t);
        out(0) = -z(0) / C * in.db_dt(t) / (b * b);
        return out;
    };
    m.dg_dt = [=](double, const Vector&, const Vector&) { return Vector::Zero(k).eval(); };
    return m;
}

SemiExplicitModel make_linear_model(const LinearModelSpec& spec)
{
    const int ny = static_cast<int>(spec.A.rows());
    const int nz = static_cast<int>(spec.G_z.rows());
    if (spec.A.cols() != ny || spec.B.rows() != ny || spec.B.cols() != nz || spec.G_y.rows() != nz ||
        spec.G_y.cols() != ny || spec.G_z.cols() != nz)
        throw InvalidArgument("linear model matrices have inconsistent shapes");
    if (Eigen::FullPivLU<Matrix>(spec.G_z).rank() < nz)
        throw SingularConstraintJacobian("linear model: G_z is singular");

    const Matrix A = spec.A, B = spec.B, Gy = spec.G_y, Gz = spec.G_z;
    auto zero_y = [ny](double) { return Vector::Zero(ny).eval(); };
    auto zero_z = [nz](double) { return Vector::Zero(nz).eval(); };
    const auto f0 = spec.f0 ? spec.f0 : std::function<Vector(double)>(zero_y);
    const auto df0 = spec.df0_dt ? spec.df0_dt : std::function<Vector(double)>(zero_y);
    const auto bg = spec.b_g ? spec.b_g : std::function<Vector(double)>(zero_z);
    const auto dbg = spec.db_g_dt ? spec.db_g_dt : std::function<Vector(double)>(zero_z);

    SemiExplicitModel m;
    m.n_y = ny;
    m.n_z = nz;
    m.name = "linear(n_y=" + std::to_string(ny) + ", n_z=" + std::to_string(nz) + ")";
    m.f = [=](double t, const Vector& y, const Vector& z) { return (A * y + B * z + f0(t)).eval(); };
    m.g = [=](double t, const Vector& y, const Vector& z) { return (Gy * y + Gz * z + bg(t)).eval(); };
    m.df_dy = [=](double, const Vector&, const Vector&) { return A; };
    m.df_dz = [=](double, const Vector&, const Vector&) { return B; };
    m.dg_dy = [=](double, const Vector&, const Vector&) { return Gy; };
    m.dg_dz = [=](double, const Vector&, const Vector&) { return Gz; };
    m.df_dt = [=](double t, const Vector&, const Vector&) { return df0(t); };
    m.dg_dt = [=](double t, const Vector&, const Vector&) { return dbg(t); };
    m.linear_constraints = LinearConstraints{Gy, Gz};
    return m;
}

SemiExplicitModel make_linear_oscillator(double omega, double coupling)
{
    LinearModelSpec s;
    Matrix rot(2, 2);
    rot << 0.0, omega, -omega, 0.0;
    // On the constraint manifold z = y the coupling terms cancel.
    s.A = rot + coupling * Matrix::Identity(2, 2);
    s.B = -coupling * Matrix::Identity(2, 2);
    s.G_y = -Matrix::Identity(2, 2);
    s.G_z = Matrix::Identity(2, 2);
    auto m = make_linear_model(s);
    m.name = "linear_oscillator";
    return m;
}

SemiExplicitModel freeze_time(const SemiExplicitModel& model, double t_frozen)
{
    SemiExplicitModel m = model;
    auto wrap_vec = [t_frozen](SemiExplicitModel::VecMap fn) {
        return [fn, t_frozen](double, const Vector& y, const Vector& z) { return fn(t_frozen, y, z); };
    };
    auto wrap_mat = [t_frozen](SemiExplicitModel::MatMap fn) {
        return [fn, t_frozen](double, const Vector& y, const Vector& z) { return fn(t_frozen, y, z); };
    };
    m.f = wrap_vec(model.f);
    m.g = wrap_vec(model.g);
    m.df_dy = wrap_mat(model.df_dy);
    m.df_dz = wrap_mat(model.df_dz);
    m.dg_dy = wrap_mat(model.dg_dy);
    m.dg_dz = wrap_mat(model.dg_dz);
    const int ny = model.n_y, nz = model.n_z;
    m.df_dt = [ny](double, const Vector&, const Vector&) { return Vector::Zero(ny).eval(); };
    m.dg_dt = [nz](double, const Vector&, const Vector&) { return Vector::Zero(nz).eval(); };
    m.name = model.name + " @ t=" + std::to_string(t_frozen);
    return m;
}

namespace {

// Blocks whose analytic entries vanish are measured against the magnitude
// of the function itself, so roundoff in the difference quotient does not
// register as a unit relative error.
double block_deviation(const Matrix& analytic, const Matrix& fd, double value_scale)
{
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), value_scale + 1.0);
    return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

} // namespace

double check_jacobians(const SemiExplicitModel& model, double t, const Vector& y, const Vector& z,
                       double h_fd)
{
    if (!(h_fd > 0.0))
        throw InvalidArgument("finite-difference step must be positive");
    const int ny = model.n_y, nz = model.n_z;
    Matrix fy(ny, ny), fz(ny, nz), gy(nz, ny), gz(nz, nz);

    for (int j = 0; j < ny; ++j) {
        Vector yp = y, ym = y;
        yp(j) += h_fd;
        ym(j) -= h_fd;
        fy.col(j) = (model.f(t, yp, z) - model.f(t, ym, z)) / (2.0 * h_fd);
        gy.col(j) = (model.g(t, yp, z) - model.g(t, ym, z)) / (2.0 * h_fd);
    }
    for (int j = 0; j < nz; ++j) {
        Vector zp = z, zm = z;
        zp(j) += h_fd;
        zm(j) -= h_fd;
        fz.col(j) = (model.f(t, y, zp) - model.f(t, y, zm)) / (2.0 * h_fd);
        gz.col(j) = (model.g(t, y, zp) - model.g(t, y, zm)) / (2.0 * h_fd);
    }
    const Matrix ft = (model.f(t + h_fd, y, z) - model.f(t - h_fd, y, z)) / (2.0 * h_fd);
    const Matrix gt = (model.g(t + h_fd, y, z) - model.g(t - h_fd, y, z)) / (2.0 * h_fd);

    const double f_scale = model.f(t, y, z).cwiseAbs().maxCoeff();
    const double g_scale = model.g(t, y, z).cwiseAbs().maxCoeff();
    double worst = 0.0;
    worst = std::max(worst, block_deviation(model.df_dy(t, y, z), fy, f_scale));
    worst = std::max(worst, block_deviation(model.df_dz(t, y, z), fz, f_scale));
    worst = std::max(worst, block_deviation(model.dg_dy(t, y, z), gy, g_scale));
    worst = std::max(worst, block_deviation(model.dg_dz(t, y, z), gz, g_scale));
    worst = std::max(worst, block_deviation(Matrix(model.df_dt(t, y, z)), ft, f_scale));
    worst = std::max(worst, block_deviation(Matrix(model.dg_dt(t, y, z)), gt, g_scale));
    return worst;
}

} // namespace mpdae

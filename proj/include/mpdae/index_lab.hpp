#pragma once

#include <string>

#include "mpdae/mol_system.hpp"

namespace mpdae {

inline constexpr double default_rank_tol = 1e-10;

struct OneFullnessResult
{
    bool is_one_full = false;
    int rank_full = 0;
    int rank_tail = 0;
    int n_bar = 0;
    Vector singular_values;
    Vector singular_values_tail;
    double tol = default_rank_tol;
    /// Some singular value sits in [1e-12, 1e-8] sigma_max.
    bool fragile = false;
};

/// Index verdict. 3 stands for "higher than two or not defined".
struct IndexReport
{
    int index = 3;
    CouplingKind kind = CouplingKind::Optimality;
    double c1 = 0.0;
    double c2 = 0.0;
    double phase_algebraic_criterion = 0.0;
    /// Magnitude the active scalar criterion is compared against.
    double criterion_scale = 0.0;
    int scalar_index = 3;
    OneFullnessResult b1;
    bool b2_evaluated = false;
    OneFullnessResult b2;
    /// Orthogonal projector onto the nu-directions of ker B1 restricted to x'.
    Matrix T;
    int T_rank = 0;
    bool consistent = true;
    bool fragile = false;
    int n_bar = 0;
    double rank_tol = default_rank_tol;

    double active_criterion() const;
};

Matrix build_B1(const JacobianBlocks& blocks);
Matrix build_B2_reduced(const JacobianBlocks& blocks);

/// Ranks of B and of B without its first n_bar columns. With scale set, B is
/// first equilibrated by diagonal row and column scaling, which leaves both
/// ranks unchanged in exact arithmetic.
OneFullnessResult check_one_full(const Matrix& B, int n_bar, double tol = default_rank_tol, bool scale = true);

/// Ruiz equilibration: rows and columns divided by the square root of their
/// max-norm, repeated. The accumulated column factors go to col_scale.
Matrix equilibrate(const Matrix& B, int sweeps = 8, Vector* col_scale = nullptr);

/// Scalar criteria c1, c2, phase-algebraic and the verdict they imply.
void scalar_criteria(const JacobianBlocks& blocks, double tol, IndexReport& report);

/// Index analysis from Jacobian blocks alone (no consistency check).
IndexReport analyse_blocks(const JacobianBlocks& blocks, double tol = default_rank_tol, bool with_projector = true);

/// Rejects points whose residual exceeds 1e-8 with InconsistentPoint.
IndexReport determine_index(const MolSystem& sys, double t, const GridState& state, const GridState& velocity,
                            double tol = default_rank_tol);

struct QuadraticIdentity
{
    double c2 = 0.0;
    double quadratic_form = 0.0;
    double deviation = 0.0;
};

/// c2 against -[(S1 x1)^T W1 (S1 x1) + (S2 x2)^T W2 (S2 x2)] for linear constraints.
QuadraticIdentity verify_quadratic_identity(const MolSystem& sys, const GridState& state);

/// Same with explicit data; zero weights are allowed here.
QuadraticIdentity verify_quadratic_identity(const CirculantOperator<double>& op, const LinearConstraints& lc,
                                            const Lines& y, const Lines& z, const Vector& w_y, const Vector& w_z);

/// Rank tolerance from MPDAE_RANK_TOL if set, otherwise the default.
double rank_tolerance_from_env();

std::string format_report(const IndexReport& report);
std::string report_csv_header();
std::string report_csv_row(const IndexReport& report);

} // namespace mpdae

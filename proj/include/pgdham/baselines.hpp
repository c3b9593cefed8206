// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/full_order.hpp"
#include "pgdham/ritz.hpp"

#include <Eigen/SVD>

namespace pgdham {

/// Separated approximation q ~ Sq Psi_q^T, p ~ Sp Psi_p^T in full coordinates.
struct SeparatedApprox {
    Matrix Sq, Sp, Psi_q, Psi_p;

    Index modes() const { return Sq.cols(); }

    Trajectory to_trajectory(const TimeGrid& grid) const {
        return Trajectory(Sq * Psi_q.transpose(), Sp * Psi_p.transpose(), grid);
    }
};

/// Thin SVDs of the Q and P snapshot blocks, computed once and truncated on
/// demand.
class SnapshotSvd {
public:
    explicit SnapshotSvd(const Trajectory& fom)
        : q_(fom.Q, Eigen::ComputeThinU | Eigen::ComputeThinV), p_(fom.P, Eigen::ComputeThinU | Eigen::ComputeThinV) {}

    Index max_rank() const { return std::min(q_.singularValues().size(), p_.singularValues().size()); }
    const Vector& singular_values_q() const { return q_.singularValues(); }
    const Vector& singular_values_p() const { return p_.singularValues(); }

    /// Rank-m truncation; m above the available rank is clamped (full
    /// reconstruction).
    SeparatedApprox truncate(Index m) const {
        if (m < 0) throw InvalidArgument("svd reference: rank must be >= 0");
        SeparatedApprox a;
        const Index mq = std::min<Index>(m, q_.singularValues().size());
        const Index mp = std::min<Index>(m, p_.singularValues().size());
        a.Sq = q_.matrixU().leftCols(mq);
        a.Psi_q = q_.matrixV().leftCols(mq) * q_.singularValues().head(mq).asDiagonal();
        a.Sp = p_.matrixU().leftCols(mp);
        a.Psi_p = p_.matrixV().leftCols(mp) * p_.singularValues().head(mp).asDiagonal();
        return a;
    }

private:
    Eigen::BDCSVD<Matrix> q_;
    Eigen::BDCSVD<Matrix> p_;
};

/// Rank-m truncated SVD of the Q and P blocks, applied independently.
inline Trajectory svd_reference(const Trajectory& fom, Index m) {
    return SnapshotSvd(fom).truncate(m).to_trajectory(fom.grid());
}

/// Hamilton's equations projected on K/M-orthonormal eigenvectors decouple
/// into scalar oscillators a' = b, b' = V^T f - lambda a, integrated with the
/// same Crank-Nicolson scheme as the full model, zero initial state.
/// Separated form: Sq = V, Sp = M V.
inline SeparatedApprox modal_separated(const RitzBasis& basis, const SparseMatrix& M, const SeparatedLoad& load,
                                       const TimeGrid& grid) {
    grid.validate();
    if (basis.dofs() != M.rows()) throw InvalidArgument("modal reference: basis and mass sizes differ");
    const Index r = basis.size();
    const Index nt = grid.intervals;
    const double h = grid.step();

    Matrix F = Matrix::Zero(r, nt + 1); // reduced load history
    for (const auto& term : load.terms) {
        const Vector red = basis.V.transpose() * term.spatial;
        const Vector g = grid.sample(term.signal);
        F.noalias() += red * g.transpose();
    }

    SeparatedApprox a;
    a.Sq = basis.V;
    a.Sp = M * basis.V;
    a.Psi_q = Matrix::Zero(nt + 1, r);
    a.Psi_p = Matrix::Zero(nt + 1, r);
    for (Index j = 0; j < r; ++j) {
        const double lam = basis.lambda[j];
        // [1, -h/2; h lam/2, 1] (a^i, b^i) = [1, h/2; -h lam/2, 1] (a^{i-1}, b^{i-1}) + (0, h/2 (f^i + f^{i-1}))
        const double det = 1.0 + 0.25 * h * h * lam;
        for (Index i = 1; i <= nt; ++i) {
            const double x = a.Psi_q(i - 1, j), y = a.Psi_p(i - 1, j);
            const double r0 = x + 0.5 * h * y;
            const double r1 = -0.5 * h * lam * x + y + 0.5 * h * (F(j, i) + F(j, i - 1));
            a.Psi_q(i, j) = (r0 + 0.5 * h * r1) / det;
            a.Psi_p(i, j) = (r1 - 0.5 * h * lam * r0) / det;
        }
    }
    return a;
}

inline Trajectory modal_reference(const RitzBasis& basis, const SparseMatrix& M, const SeparatedLoad& load,
                                  const TimeGrid& grid) {
    return modal_separated(basis, M, load, grid).to_trajectory(grid);
}

/// Computes the r lowest eigenpairs at tight tolerance first.
inline Trajectory modal_reference(const SparseMatrix& K, const SparseMatrix& M, Index r, const SeparatedLoad& load,
                                  const TimeGrid& grid, LanczosOptions opt = {.tol = 1e-10}) {
    return modal_reference(compute_ritz_pairs(K, M, r, opt), M, load, grid);
}

} // namespace pgdham

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/assembly.hpp"
#include "pgdham/sparse.hpp"
#include "pgdham/time_grid.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

namespace pgdham {

/// Space-time history of (q, p): column i holds the state at grid node i.
class Trajectory {
public:
    Trajectory(Index n, const TimeGrid& grid)
        : Q(Matrix::Zero(n, grid.nodes())), P(Matrix::Zero(n, grid.nodes())), grid_(grid) {
        ++created_;
    }
    Trajectory(Matrix q, Matrix p, const TimeGrid& grid) : Q(std::move(q)), P(std::move(p)), grid_(grid) {
        if (Q.rows() != P.rows() || Q.cols() != grid.nodes() || P.cols() != grid.nodes())
            throw InvalidArgument("trajectory: block shapes do not match the grid");
        ++created_;
    }
    Trajectory(const Trajectory& o) : Q(o.Q), P(o.P), grid_(o.grid_) { ++created_; }
    Trajectory(Trajectory&&) noexcept = default;
    Trajectory& operator=(const Trajectory&) = default;
    Trajectory& operator=(Trajectory&&) noexcept = default;

    Index dofs() const { return Q.rows(); }
    const TimeGrid& grid() const { return grid_; }

    /// Number of space-time histories materialized so far in this process.
    /// Reduced solvers are expected never to bump it.
    static std::uint64_t created() { return created_.load(); }

    Matrix Q;
    Matrix P;

private:
    TimeGrid grid_;
    static inline std::atomic<std::uint64_t> created_{0};
};

/// Crank-Nicolson (implicit midpoint) integration of
///   dp/dt = f - K q,   dq/dt = M^{-1} p.
///
/// Eliminating p gives (M + h^2/4 K) q^i = (M - h^2/4 K) q^{i-1} + h p^{i-1} + h^2/4 (f^i + f^{i-1}),
/// then p^i = p^{i-1} - h/2 K (q^i + q^{i-1}) + h/2 (f^i + f^{i-1}).
/// The matrix on the left is factorized once.
inline Trajectory solve_fom(const SparseMatrix& K, const SparseMatrix& M, const SeparatedLoad& load,
                            const TimeGrid& grid, const Vector& q0, const Vector& p0) {
    grid.validate();
    const Index n = K.rows();
    if (M.rows() != n || q0.size() != n || p0.size() != n || (!load.terms.empty() && load.size() != n))
        throw InvalidArgument("solve_fom: operator, load and initial state sizes differ");
    const double h = grid.step();
    const double a = 0.25 * h * h;
    const SparseMatrix lhs = M + a * K;
    SpdFactorization lu(lhs, "M + h^2/4 K");

    Trajectory traj(n, grid);
    traj.Q.col(0) = q0;
    traj.P.col(0) = p0;
    Vector f_prev = load.evaluate(grid.at(0));
    if (load.terms.empty()) f_prev = Vector::Zero(n);
    Vector Kq_prev = K * q0;
    for (Index i = 1; i < grid.nodes(); ++i) {
        Vector f_now = load.terms.empty() ? Vector::Zero(n) : load.evaluate(grid.at(i));
        const Vector fsum = f_now + f_prev;
        // Solve for the increment: it is small next to q, so its rounding
        // error does not accumulate as an energy drift.
        const Vector rhs = h * traj.P.col(i - 1) - 2.0 * a * Kq_prev + a * fsum;
        traj.Q.col(i) = traj.Q.col(i - 1) + lu.solve(rhs);
        Vector Kq_now = K * traj.Q.col(i);
        traj.P.col(i) = traj.P.col(i - 1) - 0.5 * h * (Kq_now + Kq_prev) + 0.5 * h * fsum;
        Kq_prev.swap(Kq_now);
        f_prev.swap(f_now);
    }
    return traj;
}

/// Hamiltonian of the unloaded system, 1/2 q^T K q + 1/2 p^T M^{-1} p.
inline double hamiltonian(const SparseMatrix& K, const SpdFactorization& Mfac, const Vector& q, const Vector& p) {
    const Vector Minv_p = Mfac.solve(p);
    return 0.5 * q.dot(K * q) + 0.5 * p.dot(Minv_p);
}

namespace detail {

// integral over time of u_i^T W v_j A_ij, given columns of U and WV.
inline double time_integral(const Matrix& U, const Matrix& WV, const TimeOperators& ops) {
    const Index n = U.cols();
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += ops.mass_diag(i) * U.col(i).dot(WV.col(i));
    double off = 0.0;
    for (Index i = 0; i + 1 < n; ++i) off += U.col(i).dot(WV.col(i + 1)) + U.col(i + 1).dot(WV.col(i));
    return s + ops.mass_offdiag() * off;
}

} // namespace detail

/// Space-time energy norm sqrt( integral 1/2 p^T M^{-1} p + 1/2 q^T K q dt ),
/// time integral through A_t, M^{-1} p through the Cholesky factor of M.
inline double energy_norm(const Trajectory& traj, const SparseMatrix& K, const SpdFactorization& Mfac,
                          const TimeOperators& ops) {
    if (!(traj.grid() == ops.grid())) throw InvalidArgument("energy_norm: trajectory and operators use different grids");
    if (traj.dofs() != K.rows()) throw InvalidArgument("energy_norm: trajectory size differs from operators");
    const Matrix KQ = K * traj.Q;
    const Matrix MinvP = Mfac.solve(traj.P);
    const double e = 0.5 * detail::time_integral(traj.Q, KQ, ops) + 0.5 * detail::time_integral(traj.P, MinvP, ops);
    return std::sqrt(std::max(e, 0.0));
}

/// Relative energy-norm error || fom - rom ||_e / || fom ||_e.
inline double rom_error(const Trajectory& fom, const Trajectory& rom, const SparseMatrix& K,
                        const SpdFactorization& Mfac, const TimeOperators& ops) {
    if (fom.dofs() != rom.dofs() || !(fom.grid() == rom.grid()))
        throw InvalidArgument("rom_error: trajectories live on different grids or DOF spaces");
    const double ref = energy_norm(fom, K, Mfac, ops);
    if (!(ref > 0.0)) throw SolverError("rom_error: reference trajectory has zero energy norm, relative error undefined");
    const Trajectory diff(fom.Q - rom.Q, fom.P - rom.P, fom.grid());
    return energy_norm(diff, K, Mfac, ops) / ref;
}

/// Energy-norm error of separated approximations q ~ Sq Psi_q^T, p ~ Sp Psi_p^T
/// against a fixed reference trajectory. K Q and M^{-1} P of the reference
/// are computed once, so each evaluation costs a few dense products instead
/// of n_t sparse solves.
class EnergyErrorEvaluator {
public:
    EnergyErrorEvaluator(const Trajectory& reference, const SparseMatrix& K, const SpdFactorization& Mfac,
                         const TimeOperators& ops)
        : ref_(&reference), K_(&K), Mfac_(&Mfac), ops_(ops), KQ_(K * reference.Q), MinvP_(Mfac.solve(reference.P)) {
        if (!(reference.grid() == ops.grid())) throw InvalidArgument("error evaluator: grid mismatch");
        const double e = 0.5 * detail::time_integral(reference.Q, KQ_, ops_) +
                         0.5 * detail::time_integral(reference.P, MinvP_, ops_);
        norm_ = std::sqrt(std::max(e, 0.0));
    }

    double reference_norm() const { return norm_; }

    /// Sq, Sp: n x m full-space modes; Psi_q, Psi_p: (n_t+1) x m histories.
    double relative_error(const Matrix& Sq, const Matrix& Sp, const Matrix& Psi_q, const Matrix& Psi_p) const {
        if (!(norm_ > 0.0)) throw SolverError("relative error undefined: reference has zero energy norm");
        if (Sq.rows() != ref_->dofs() || Sp.rows() != ref_->dofs() || Psi_q.rows() != ops_.size() ||
            Psi_p.rows() != ops_.size() || Sq.cols() != Psi_q.cols() || Sp.cols() != Psi_p.cols())
            throw InvalidArgument("relative error: separated blocks do not match reference dimensions");
        double e = 0.0;
        {
            const Matrix KSq = *K_ * Sq;
            const Matrix E = ref_->Q - Sq * Psi_q.transpose();
            const Matrix KE = KQ_ - KSq * Psi_q.transpose();
            e += 0.5 * detail::time_integral(E, KE, ops_);
        }
        {
            const Matrix MinvSp = Mfac_->solve(Sp);
            const Matrix E = ref_->P - Sp * Psi_p.transpose();
            const Matrix ME = MinvP_ - MinvSp * Psi_p.transpose();
            e += 0.5 * detail::time_integral(E, ME, ops_);
        }
        return std::sqrt(std::max(e, 0.0)) / norm_;
    }

private:
    const Trajectory* ref_;
    const SparseMatrix* K_;
    const SpdFactorization* Mfac_;
    TimeOperators ops_;
    Matrix KQ_;
    Matrix MinvP_;
    double norm_ = 0.0;
};

} // namespace pgdham

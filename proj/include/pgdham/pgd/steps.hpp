// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/pgd/separated.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace pgdham::pgd {

/// Space backend plus everything time-related the steps share: the
/// integration operators and the load signals sampled on the grid.
template <SpaceBackend Space>
struct Problem {
    Space& space;
    TimeOperators ops;
    std::vector<Vector> signals;

    Problem(Space& s, const SeparatedLoad& load, const TimeGrid& grid) : space(s), ops(grid) {
        if (load.terms.size() != s.load_vectors().size())
            throw InvalidArgument("pgd problem: load terms differ from the backend's projected loads");
        for (const auto& t : load.terms) signals.push_back(grid.sample(t.signal));
    }

    const TimeGrid& grid() const { return ops.grid(); }
    Index time_nodes() const { return ops.size(); }
};

/// b_S = integral Psi^T (f_z - J dz_{m-1}/dt - H z_{m-1}) dt from separated
/// terms only: each previous mode contributes its stored spatial images
/// weighted by A_t / C_t products of temporal histories.
template <SpaceBackend Space>
SpaceRhs build_space_rhs(const SeparatedSolution& sol, const Vector& psi_q, const Vector& psi_p,
                         const Problem<Space>& pb) {
    const auto& ops = pb.ops;
    if (sol.modes() > 0 && sol.time_nodes() != ops.size())
        throw InvalidArgument("space rhs: stored temporal modes use a different grid");
    const Index m = sol.modes();
    const auto& loads = pb.space.load_vectors();

    SpaceRhs rhs;
    rhs.q = Vector::Zero(pb.space.dim());
    for (std::size_t j = 0; j < loads.size(); ++j) rhs.q += ops.mass(psi_q, pb.signals[j]) * loads[j];

    Vector wk(m), wc(m), wm(m), wd(m);
    for (Index l = 0; l < m; ++l) {
        const Vector ql = sol.Psi_q.col(l);
        const Vector pl = sol.Psi_p.col(l);
        wk[l] = ops.mass(psi_q, ql);
        wc[l] = ops.derivative(pl, psi_q);
        wm[l] = ops.mass(psi_p, pl);
        wd[l] = ops.derivative(ql, psi_p);
    }
    if (m > 0) {
        rhs.q.noalias() -= sol.Sp * wc;
        rhs.q.noalias() -= sol.KSq * wk;
        rhs.mass_p.noalias() = sol.MSq * wd;
        rhs.mass_p.noalias() -= sol.Sp * wm;
    } else {
        rhs.mass_p = Vector::Zero(pb.space.dim());
    }
    return rhs;
}

/// Result of projecting and normalizing a spatial pair: the unit modes and
/// the norms they were divided by.
struct Orthonormalized {
    SpatialPair phi;
    double norm_q = 0.0;
    double norm_p = 0.0;
};

namespace detail {

template <SpaceBackend Space>
double k_norm(const Vector& v, const Space& space) {
    return std::sqrt(std::max(v.dot(space.stiffness(v)), 0.0));
}

template <SpaceBackend Space>
double minv_norm(const Vector& v, const Space& space) {
    return std::sqrt(std::max(v.dot(space.inv_mass(v)), 0.0));
}

// Two passes of classical Gram-Schmidt against the stored modes.
inline void project_in_place(Vector& v, const Matrix& S, const Matrix& WS) {
    if (S.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) v.noalias() -= S * (WS.transpose() * v);
}

inline bool collapsed(double projected, double original, double tol) {
    return !(projected > tol * original) || !(projected > 0.0);
}

} // namespace detail

/// Projects phi onto the K-orthogonal (q) / M^{-1}-orthogonal (p) complement
/// of the current modes and normalizes to unit K / M^{-1} norm. The
/// projection is applied twice (classical Gram-Schmidt with one
/// reorthogonalization pass).
template <SpaceBackend Space>
Orthonormalized orthonormalize_with_norms(SpatialPair phi, const SeparatedSolution& sol, const Space& space,
                                          double collapse_tol = 1e-12) {
    const double nq0 = detail::k_norm(phi.q, space);
    const double np0 = detail::minv_norm(phi.p, space);
    detail::project_in_place(phi.q, sol.Sq, sol.KSq);
    detail::project_in_place(phi.p, sol.Sp, sol.MinvSp);
    const double nq = detail::k_norm(phi.q, space);
    const double np = detail::minv_norm(phi.p, space);
    if (detail::collapsed(nq, nq0, collapse_tol))
        throw ModeCollapse("orthonormalize: coordinate mode collapsed onto the existing basis");
    if (detail::collapsed(np, np0, collapse_tol))
        throw ModeCollapse("orthonormalize: momentum mode collapsed onto the existing basis");
    phi.q /= nq;
    phi.p /= np;
    return {std::move(phi), nq, np};
}

/// Orthonormalization of the first fixed-point iterate. The starting
/// temporal guess is arbitrary and can produce a component lying entirely in
/// the current basis. Such a component is rebuilt from the other one
/// (phi_p = M phi_q, or phi_q = M^{-1} phi_p) before projecting. Collapse
/// of both components, or of the rebuilt one, still throws. Sets `rebuilt`
/// when a substitution happened.
template <SpaceBackend Space>
SpatialPair orthonormalize_first_iterate(SpatialPair phi, const SeparatedSolution& sol, const Space& space,
                                         double collapse_tol, bool& rebuilt) {
    rebuilt = false;
    const double nq0 = detail::k_norm(phi.q, space);
    const double np0 = detail::minv_norm(phi.p, space);
    detail::project_in_place(phi.q, sol.Sq, sol.KSq);
    detail::project_in_place(phi.p, sol.Sp, sol.MinvSp);
    const bool q_gone = detail::collapsed(detail::k_norm(phi.q, space), nq0, collapse_tol);
    const bool p_gone = detail::collapsed(detail::minv_norm(phi.p, space), np0, collapse_tol);
    if (q_gone && p_gone) throw ModeCollapse("orthonormalize: both modes collapsed onto the existing basis");
    if (p_gone) {
        phi.p = space.mass(phi.q);
        rebuilt = true;
    } else if (q_gone) {
        phi.q = space.inv_mass(phi.p);
        rebuilt = true;
    }
    return orthonormalize_with_norms(std::move(phi), sol, space, collapse_tol).phi;
}

template <SpaceBackend Space>
SpatialPair orthonormalize(SpatialPair phi, const SeparatedSolution& sol, const Space& space,
                           double collapse_tol = 1e-12) {
    return orthonormalize_with_norms(std::move(phi), sol, space, collapse_tol).phi;
}

/// P_q v = v - Sq Sq^T K v.
inline Vector project_q(const Vector& v, const SeparatedSolution& sol) {
    return sol.modes() == 0 ? v : Vector(v - sol.Sq * (sol.KSq.transpose() * v));
}

/// P_p v = v - Sp Sp^T M^{-1} v.
inline Vector project_p(const Vector& v, const SeparatedSolution& sol) {
    return sol.modes() == 0 ? v : Vector(v - sol.Sp * (sol.MinvSp.transpose() * v));
}

/// The 2x2 Crank-Nicolson time problem of one enrichment:
/// A_T psi^i = B_T psi^{i-1} + rhs.col(i-1), i = 1..n_t.
struct TimeSystem {
    double h = 0.0;
    double kx = 0.0, cx = 0.0, mx = 0.0;
    Matrix rhs; ///< 2 x n_t

    Eigen::Matrix2d A() const {
        Eigen::Matrix2d a;
        a << h * kx, 2.0 * cx, -2.0 * cx, h * mx;
        return a;
    }
    Eigen::Matrix2d B() const {
        Eigen::Matrix2d b;
        b << -h * kx, 2.0 * cx, -2.0 * cx, -h * mx;
        return b;
    }
};

/// Assembles the time problem for a fixed spatial pair. Everything reduces to
/// scalar couplings between phi and the stored modes, so the cost is
/// O(m n_t) plus a handful of products in the backend dimension.
template <SpaceBackend Space>
TimeSystem assemble_time_system(const SpatialPair& phi, const SeparatedSolution& sol, const Problem<Space>& pb) {
    const auto& space = pb.space;
    const Index nt = pb.grid().intervals;
    const Index nodes = pb.time_nodes();
    TimeSystem sys;
    sys.h = pb.grid().step();
    sys.kx = phi.q.dot(space.stiffness(phi.q));
    sys.mx = phi.p.dot(space.inv_mass(phi.p));
    sys.cx = phi.q.dot(phi.p);

    Vector fq = Vector::Zero(nodes);
    const auto& loads = space.load_vectors();
    for (std::size_t j = 0; j < loads.size(); ++j) fq += phi.q.dot(loads[j]) * pb.signals[j];

    Vector Hq = Vector::Zero(nodes), Hp = Vector::Zero(nodes), Jq = Vector::Zero(nodes), Jp = Vector::Zero(nodes);
    if (sol.modes() > 0) {
        Hq.noalias() = sol.Psi_q * (sol.KSq.transpose() * phi.q);
        Hp.noalias() = sol.Psi_p * (sol.MinvSp.transpose() * phi.p);
        Jq.noalias() = sol.Psi_p * (sol.Sp.transpose() * phi.q);
        Jp.noalias() = -(sol.Psi_q * (sol.Sq.transpose() * phi.p));
    }
    sys.rhs.resize(2, nt);
    const double h = sys.h;
    for (Index i = 1; i <= nt; ++i) {
        sys.rhs(0, i - 1) = h * (fq[i] + fq[i - 1] - Hq[i] - Hq[i - 1]) - 2.0 * (Jq[i] - Jq[i - 1]);
        sys.rhs(1, i - 1) = -h * (Hp[i] + Hp[i - 1]) - 2.0 * (Jp[i] - Jp[i - 1]);
    }
    return sys;
}

/// Marches the 2x2 system from psi^0 = (q0, p0).
inline std::pair<Vector, Vector> march(const TimeSystem& sys, double q0 = 0.0, double p0 = 0.0) {
    const Index nt = sys.rhs.cols();
    const double h = sys.h;
    const double a11 = h * sys.kx, a12 = 2.0 * sys.cx, a21 = -2.0 * sys.cx, a22 = h * sys.mx;
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
        throw SolverError("time step: singular 2x2 Crank-Nicolson matrix (h^2 k_x m_x + 4 c_x^2 = 0)");
    Vector psi_q(nt + 1), psi_p(nt + 1);
    psi_q[0] = q0;
    psi_p[0] = p0;
    for (Index i = 1; i <= nt; ++i) {
        const double x = psi_q[i - 1], y = psi_p[i - 1];
        const double r0 = -a11 * x + a12 * y + sys.rhs(0, i - 1);
        const double r1 = a21 * x - a22 * y + sys.rhs(1, i - 1);
        psi_q[i] = (a22 * r0 - a12 * r1) / det;
        psi_p[i] = (a11 * r1 - a21 * r0) / det;
    }
    return {std::move(psi_q), std::move(psi_p)};
}

template <SpaceBackend Space>
std::pair<Vector, Vector> time_step_march(const SpatialPair& phi, const SeparatedSolution& sol,
                                          const Problem<Space>& pb) {
    return march(assemble_time_system(phi, sol, pb));
}

enum class AitkenSign { AsPrinted, Classical };

/// omega_k = s * omega_{k-1} * r_{k-1}^T (r_k - r_{k-1}) / ||r_k - r_{k-1}||^2 with
/// s = +1 (AsPrinted) or s = -1 (Classical, Irons-Tuck). Returns omega_prev
/// unchanged when the residual difference is negligible.
inline double aitken_weight(double omega_prev, const Vector& r_prev, const Vector& r_new, AitkenSign sign,
                            double scale = 1.0) {
    const Vector dr = r_new - r_prev;
    const double dn2 = dr.squaredNorm();
    if (!(std::sqrt(dn2) > 1e-14 * scale)) return omega_prev;
    const double w = omega_prev * r_prev.dot(dr) / dn2;
    return sign == AitkenSign::AsPrinted ? w : -w;
}

inline Vector relax(double omega, const Vector& phi_new, const Vector& phi_old) {
    return omega * phi_new + (1.0 - omega) * phi_old;
}

namespace detail {

// Squared L2 space-time norm of a phi1 psi1^T - b phi2 psi2^T, written in
// terms of differences so that nearly equal terms do not cancel.
struct RankOneTerm {
    const Vector* phi;
    const Vector* psi;
};

inline double diff_norm2(const RankOneTerm& a, const RankOneTerm& b, const TimeOperators& ops) {
    const Vector dphi = *a.phi - *b.phi;
    const Vector dpsi = *a.psi - *b.psi;
    const double v = dphi.squaredNorm() * ops.mass(*a.psi, *a.psi) +
                     2.0 * dphi.dot(*b.phi) * ops.mass(*a.psi, dpsi) + b.phi->squaredNorm() * ops.mass(dpsi, dpsi);
    return std::max(v, 0.0);
}

inline double sum_norm2(const RankOneTerm& a, const RankOneTerm& b, const TimeOperators& ops) {
    const double v = a.phi->squaredNorm() * ops.mass(*a.psi, *a.psi) +
                     2.0 * a.phi->dot(*b.phi) * ops.mass(*a.psi, *b.psi) +
                     b.phi->squaredNorm() * ops.mass(*b.psi, *b.psi);
    return 0.25 * std::max(v, 0.0);
}

inline double ratio(double delta2, double sigma2) {
    if (sigma2 > 0.0) return std::sqrt(delta2 / sigma2);
    return delta2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

} // namespace detail

struct Stagnation {
    double q = 0.0;
    double p = 0.0;
    double max() const { return std::max(q, p); }
};

/// s = ||Delta|| / ||Sigma|| with Delta = current - previous and
/// Sigma = (current + previous) / 2, evaluated from the separated factors:
/// ||phi psi^T||^2 = (phi^T phi)(psi^T A_t psi).
inline Stagnation stagnation(const SpatialPair& phi_prev, const Vector& psi_q_prev, const Vector& psi_p_prev,
                             const SpatialPair& phi, const Vector& psi_q, const Vector& psi_p,
                             const TimeOperators& ops) {
    using detail::RankOneTerm;
    const RankOneTerm cq{&phi.q, &psi_q}, pq{&phi_prev.q, &psi_q_prev};
    const RankOneTerm cp{&phi.p, &psi_p}, pp{&phi_prev.p, &psi_p_prev};
    Stagnation s;
    s.q = detail::ratio(detail::diff_norm2(cq, pq, ops), detail::sum_norm2(cq, pq, ops));
    s.p = detail::ratio(detail::diff_norm2(cp, pp, ops), detail::sum_norm2(cp, pp, ops));
    return s;
}

/// Re-solves all temporal modes in the span of the current spatial basis:
/// A_U psi^i = B_U psi^{i-1} + h S^T (f^i + f^{i-1}), psi^0 = 0, with
/// A_U = [h Kx, 2 Cx; -2 Cx^T, h Mx] factorized once.
template <SpaceBackend Space>
void temporal_update(SeparatedSolution& sol, const Problem<Space>& pb) {
    const Index m = sol.modes();
    if (m == 0) return;
    const double h = pb.grid().step();
    const Index nt = pb.grid().intervals;
    const Matrix Kx = sol.Kx(), Mx = sol.Mx(), Cx = sol.Cx();
    Matrix A(2 * m, 2 * m), B(2 * m, 2 * m);
    A << h * Kx, 2.0 * Cx, -2.0 * Cx.transpose(), h * Mx;
    B << -h * Kx, 2.0 * Cx, -2.0 * Cx.transpose(), -h * Mx;
    Eigen::PartialPivLU<Matrix> lu(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
        Eigen::JacobiSVD<Matrix> svd(Cx);
        std::ostringstream os;
        os << "temporal update: A_U is singular (rcond " << rcond << "); C_x singular values range ["
           << svd.singularValues().minCoeff() << ", " << svd.singularValues().maxCoeff() << "]";
        throw SolverError(os.str());
    }
    const auto& loads = pb.space.load_vectors();
    Matrix SqTb(m, static_cast<Index>(loads.size()));
    for (std::size_t j = 0; j < loads.size(); ++j) SqTb.col(static_cast<Index>(j)) = sol.Sq.transpose() * loads[j];

    Matrix Psi(2 * m, nt + 1);
    Psi.col(0).setZero();
    Vector rhs(2 * m);
    for (Index i = 1; i <= nt; ++i) {
        rhs.noalias() = B * Psi.col(i - 1);
        for (std::size_t j = 0; j < loads.size(); ++j)
            rhs.head(m) += h * (pb.signals[j][i] + pb.signals[j][i - 1]) * SqTb.col(static_cast<Index>(j));
        Psi.col(i) = lu.solve(rhs);
    }
    sol.Psi_q = Psi.topRows(m).transpose();
    sol.Psi_p = Psi.bottomRows(m).transpose();
}

} // namespace pgdham::pgd

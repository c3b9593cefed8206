// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/pgd/space.hpp"

namespace pgdham::pgd {

/// Rank-m space-time representation z_m(t) = S psi(t) with
/// S = diag(Sq, Sp) and psi = (Psi_q(t,:), Psi_p(t,:)).
///
/// Spatial modes are stored in backend coordinates (full DOFs for the LU
/// variant, Ritz coordinates for the Ritz variant) together with the images
/// K Sq, M Sq and M^{-1} Sp, which every later enrichment reuses.
struct SeparatedSolution {
    Variant variant = Variant::LU;
    Matrix Sq, Sp;
    Matrix Psi_q, Psi_p;
    Matrix KSq, MSq, MinvSp;

    Index modes() const { return Sq.cols(); }
    Index dim() const { return Sq.rows(); }
    Index time_nodes() const { return Psi_q.rows(); }

    template <SpaceBackend Space>
    static SeparatedSolution empty(const Space& space, Index time_nodes) {
        SeparatedSolution s;
        s.variant = Space::variant;
        const Index n = space.dim();
        s.Sq.resize(n, 0);
        s.Sp.resize(n, 0);
        s.KSq.resize(n, 0);
        s.MSq.resize(n, 0);
        s.MinvSp.resize(n, 0);
        s.Psi_q.resize(time_nodes, 0);
        s.Psi_p.resize(time_nodes, 0);
        return s;
    }

    template <SpaceBackend Space>
    void append(const Space& space, const SpatialPair& phi, const Vector& psi_q, const Vector& psi_p) {
        const Index m = modes();
        const auto grow = [m](Matrix& A, const Vector& v) {
            A.conservativeResize(v.size(), m + 1);
            A.col(m) = v;
        };
        grow(Sq, phi.q);
        grow(Sp, phi.p);
        grow(KSq, space.stiffness(phi.q));
        grow(MSq, space.mass(phi.q));
        grow(MinvSp, space.inv_mass(phi.p));
        grow(Psi_q, psi_q);
        grow(Psi_p, psi_p);
    }

    /// Full-space modes (n x m) for export and error evaluation.
    template <SpaceBackend Space>
    Matrix lifted_q(const Space& space) const {
        return space.lift_q(Sq);
    }
    template <SpaceBackend Space>
    Matrix lifted_p(const Space& space) const {
        return space.lift_p(Sp);
    }

    /// K_x = Sq^T K Sq, M_x = Sp^T M^{-1} Sp, C_x = Sq^T Sp.
    Matrix Kx() const { return Sq.transpose() * KSq; }
    Matrix Mx() const { return Sp.transpose() * MinvSp; }
    Matrix Cx() const { return Sq.transpose() * Sp; }
};

} // namespace pgdham::pgd

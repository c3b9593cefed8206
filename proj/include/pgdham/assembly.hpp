// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <sstream>
#include <utility>

namespace pgdham {

struct Operators {
    SparseMatrix K;
    SparseMatrix M;
};

namespace detail {

// Gradients of the four P1 barycentric functions, scaled by nothing; throws
// on a degenerate element.
inline Eigen::Matrix<double, 4, 3> p1_gradients(const Mesh& mesh, Index e, double& volume) {
    const auto& t = mesh.tets[static_cast<std::size_t>(e)];
    Eigen::Matrix3d J;
    const auto& x0 = mesh.nodes[static_cast<std::size_t>(t[0])];
    for (int c = 0; c < 3; ++c) {
        const auto& xc = mesh.nodes[static_cast<std::size_t>(t[c + 1])];
        for (int d = 0; d < 3; ++d) J(d, c) = xc[d] - x0[d];
    }
    volume = J.determinant() / 6.0;
    if (!(volume > 0.0)) {
        std::ostringstream os;
        os << "assembly: degenerate or inverted element " << e << " (volume " << volume << ")";
        throw SolverError(os.str());
    }
    const Eigen::Matrix3d Jinv = J.inverse();
    Eigen::Matrix<double, 4, 3> G;
    // Reference gradients: N0 = 1 - xi - eta - zeta, N1 = xi, N2 = eta, N3 = zeta.
    G.row(1) = Jinv.row(0);
    G.row(2) = Jinv.row(1);
    G.row(3) = Jinv.row(2);
    G.row(0) = -(G.row(1) + G.row(2) + G.row(3));
    return G;
}

// Element stiffness and consistent mass in local (node-major, xyz) order.
// Only the upper triangle is computed; the lower one is mirrored so the
// element matrices are bitwise symmetric.
inline void element_matrices(const Mesh& mesh, const Material& mat, Index e, Eigen::Matrix<double, 12, 12>& Ke,
                             Eigen::Matrix<double, 12, 12>& Me) {
    double V = 0.0;
    const auto G = p1_gradients(mesh, e, V);
    const double mu = mat.mu(), lam = mat.lambda();
    // K_(a i),(b j) = V [ lam g_a,i g_b,j + mu g_a,j g_b,i + mu delta_ij (g_a . g_b) ]
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 3; ++i)
            for (int b = 0; b < 4; ++b)
                for (int j = 0; j < 3; ++j) {
                    const int r = 3 * a + i, c = 3 * b + j;
                    if (c < r) continue;
                    double v = lam * G(a, i) * G(b, j) + mu * G(a, j) * G(b, i);
                    if (i == j) v += mu * G.row(a).dot(G.row(b));
                    Ke(r, c) = V * v;
                    Ke(c, r) = Ke(r, c);
                }
    Me.setZero();
    const double m0 = mat.rho * V / 20.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int i = 0; i < 3; ++i) Me(3 * a + i, 3 * b + i) = (a == b ? 2.0 : 1.0) * m0;
}

} // namespace detail

/// Assembles P1 stiffness and consistent mass.
///
/// With `eliminate_dirichlet` the clamped rows and columns are deleted and
/// the operators act on `mesh.num_dofs` unknowns; otherwise they act on all
/// `3 * num_nodes` components (rigid-body modes included).
inline Operators assemble_operators(const Mesh& mesh, const Material& mat, bool eliminate_dirichlet = true) {
    mat.validate();
    const Index n = eliminate_dirichlet ? mesh.num_dofs : mesh.full_dofs();
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(static_cast<std::size_t>(mesh.num_tets()) * 144);
    mt.reserve(static_cast<std::size_t>(mesh.num_tets()) * 48);
    Eigen::Matrix<double, 12, 12> Ke, Me;
    std::array<Index, 12> dofs{};
    for (Index e = 0; e < mesh.num_tets(); ++e) {
        detail::element_matrices(mesh, mat, e, Ke, Me);
        const auto& t = mesh.tets[static_cast<std::size_t>(e)];
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i)
                dofs[static_cast<std::size_t>(3 * a + i)] =
                    eliminate_dirichlet ? mesh.dof_map[static_cast<std::size_t>(t[a])][static_cast<std::size_t>(i)]
                                        : 3 * t[a] + i;
        for (int r = 0; r < 12; ++r) {
            const Index gr = dofs[static_cast<std::size_t>(r)];
            if (gr < 0) continue;
            for (int c = 0; c < 12; ++c) {
                const Index gc = dofs[static_cast<std::size_t>(c)];
                if (gc < 0) continue;
                kt.emplace_back(gr, gc, Ke(r, c));
                if (Me(r, c) != 0.0) mt.emplace_back(gr, gc, Me(r, c));
            }
        }
    }
    Operators ops;
    ops.K.resize(n, n);
    ops.M.resize(n, n);
    ops.K.setFromTriplets(kt.begin(), kt.end());
    ops.M.setFromTriplets(mt.begin(), mt.end());
    ops.K.makeCompressed();
    ops.M.makeCompressed();
    return ops;
}

using TimeSignal = std::function<double(double)>;

/// One separated load term: spatial vector times scalar signal of time.
struct LoadTerm {
    Vector spatial;
    TimeSignal signal;
};

/// f(t) = sum_j spatial_j * signal_j(t).
struct SeparatedLoad {
    std::vector<LoadTerm> terms;

    Index size() const { return terms.empty() ? 0 : terms.front().spatial.size(); }

    Vector evaluate(double t) const {
        Vector f = Vector::Zero(size());
        for (const auto& term : terms) f += term.signal(t) * term.spatial;
        return f;
    }
};

/// Neumann load for a unit upward (+y) traction on the tagged top face,
/// integrated exactly against the P1 facet shape functions (area / 3 per
/// vertex). The returned load carries `signal` as its time dependence.
inline SeparatedLoad assemble_neumann_load(const Mesh& mesh, TimeSignal signal, bool eliminate_dirichlet = true) {
    const Index n = eliminate_dirichlet ? mesh.num_dofs : mesh.full_dofs();
    Vector b = Vector::Zero(n);
    bool any = false;
    for (const auto& f : mesh.facets) {
        if (f.tag != FacetTag::Neumann) continue;
        any = true;
        const double share = mesh.facet_area(f) / 3.0;
        for (Index node : f.nodes) {
            const Index dof = eliminate_dirichlet ? mesh.dof_map[static_cast<std::size_t>(node)][1] : 3 * node + 1;
            if (dof >= 0) b[dof] += share;
        }
    }
    if (!any) throw SolverError("assemble_neumann_load: mesh has no Neumann facets (empty load)");
    SeparatedLoad load;
    load.terms.push_back({std::move(b), std::move(signal)});
    return load;
}

} // namespace pgdham

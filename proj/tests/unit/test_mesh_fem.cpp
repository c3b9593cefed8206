// SPDX-License-Identifier: Apache-2.0
#include "pgdham/pgdham.hpp"

#include <gtest/gtest.h>

using namespace pgdham;

namespace {

double box_volume(const Mesh& m) {
    double v = 0.0;
    for (Index e = 0; e < m.num_tets(); ++e) v += m.tet_volume(e);
    return v;
}

} // namespace

TEST(Mesh, UnitCubeCounts) {
    const Mesh m = build_beam_mesh({1, 1, 1}, {1, 1, 1});
    EXPECT_EQ(m.num_nodes(), 8);
    EXPECT_EQ(m.num_tets(), 6);
    EXPECT_NEAR(box_volume(m), 1.0, 1e-14);
}

TEST(Mesh, BeamCountsFollowFormula) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 1, 1});
    EXPECT_EQ(m.num_nodes(), 28);
    EXPECT_EQ(m.num_tets(), 36);
    const Mesh m2 = build_beam_mesh({6, 1, 1}, {5, 3, 2});
    EXPECT_EQ(m2.num_nodes(), 6 * 4 * 3);
    EXPECT_EQ(m2.num_tets(), 6 * 5 * 3 * 2);
}

TEST(Mesh, PositiveVolumesSumToBox) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {7, 3, 2});
    for (Index e = 0; e < m.num_tets(); ++e) EXPECT_GT(m.tet_volume(e), 0.0);
    EXPECT_NEAR(box_volume(m) / 6.0, 1.0, 1e-12);
}

TEST(Mesh, TaggedAreas) {
    for (auto d : {std::array<int, 3>{6, 1, 1}, std::array<int, 3>{12, 2, 3}, std::array<int, 3>{5, 4, 4}}) {
        const Mesh m = build_beam_mesh({6, 1, 1}, d);
        EXPECT_NEAR(m.tagged_area(FacetTag::Dirichlet), 1.0, 1e-12);
        EXPECT_NEAR(m.tagged_area(FacetTag::Neumann), 6.0, 1e-12);
        EXPECT_NEAR(m.tagged_area(FacetTag::Free), 6.0 + 6.0 + 6.0 + 1.0, 1e-12);
    }
}

TEST(Mesh, TagsLieOnTheirFaces) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    for (const auto& f : m.facets)
        for (Index n : f.nodes) {
            const auto& x = m.nodes[static_cast<std::size_t>(n)];
            if (f.tag == FacetTag::Dirichlet) {
                EXPECT_EQ(x[0], 0.0);
            }
            if (f.tag == FacetTag::Neumann) {
                EXPECT_EQ(x[1], 1.0);
            }
        }
}

TEST(Mesh, ClampedNodesOwnNoDofs) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    Index clamped = 0;
    for (std::size_t n = 0; n < m.nodes.size(); ++n) {
        if (m.nodes[n][0] == 0.0) {
            ++clamped;
            for (Index d : m.dof_map[n]) EXPECT_EQ(d, -1);
        } else {
            for (int c = 0; c < 3; ++c) EXPECT_GE(m.dof_map[n][static_cast<std::size_t>(c)], 0);
        }
    }
    EXPECT_EQ(clamped, 9);
    EXPECT_EQ(m.num_dofs, 3 * (m.num_nodes() - clamped));
}

TEST(Mesh, InvalidArgumentsRejected) {
    EXPECT_THROW(build_beam_mesh({6, 1, 1}, {0, 1, 1}), InvalidArgument);
    EXPECT_THROW(build_beam_mesh({6, -1, 1}, {1, 1, 1}), InvalidArgument);
    EXPECT_THROW(build_beam_mesh({0, 1, 1}, {1, 1, 1}), InvalidArgument);
}

TEST(Mesh, RefinementHalvesEdgeLength) {
    const Mesh a = build_beam_mesh({6, 1, 1}, {6, 1, 1});
    const Mesh b = build_beam_mesh({6, 1, 1}, {12, 2, 2});
    EXPECT_DOUBLE_EQ(b.max_edge_length(), 0.5 * a.max_edge_length());
}

TEST(Material, LameCoefficients) {
    const Material mat{220e9, 0.3, 7000};
    EXPECT_NEAR(mat.mu() / 84.6154e9, 1.0, 1e-6);
    EXPECT_NEAR(mat.lambda() / 126.9231e9, 1.0, 1e-6);
    EXPECT_THROW((Material{220e9, 0.5, 7000}.validate()), InvalidArgument);
    EXPECT_THROW((Material{220e9, 0.3, -1}.validate()), InvalidArgument);
}

TEST(Assembly, RigidTranslationInKernel) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    const Material mat{};
    const auto ops = assemble_operators(m, mat, false);
    for (int c = 0; c < 3; ++c) {
        Vector v = Vector::Zero(ops.K.rows());
        for (Index n = 0; n < m.num_nodes(); ++n) v[3 * n + c] = 1.0;
        const double scale = Matrix(ops.K).cwiseAbs().maxCoeff() * v.norm();
        EXPECT_LE((ops.K * v).norm(), 1e-9 * scale);
    }
}

TEST(Assembly, MassSumsToTotalMass) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 3});
    const Material mat{220e9, 0.3, 7000};
    const auto ops = assemble_operators(m, mat, false);
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (Index j = 0; j < ops.M.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(ops.M, j); it; ++it)
                if (it.row() % 3 == c && it.col() % 3 == c) s += it.value();
        EXPECT_NEAR(s / (7000.0 * 6.0), 1.0, 1e-10);
    }
}

TEST(Assembly, ReducedOperatorsSymmetricPositiveDefinite) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    const auto ops = assemble_operators(m, Material{});
    EXPECT_EQ(ops.K.rows(), m.num_dofs);
    EXPECT_EQ(SparseMatrix(ops.K - SparseMatrix(ops.K.transpose())).norm(), 0.0);
    EXPECT_EQ(SparseMatrix(ops.M - SparseMatrix(ops.M.transpose())).norm(), 0.0);
    EXPECT_NO_THROW(SpdFactorization(ops.K, "K"));
    EXPECT_NO_THROW(SpdFactorization(ops.M, "M"));
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(ops.K));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Assembly, DegenerateElementNamesId) {
    Mesh m = build_beam_mesh({1, 1, 1}, {1, 1, 1});
    m.tets[3] = {m.tets[3][0], m.tets[3][1], m.tets[3][1], m.tets[3][2]};
    try {
        assemble_operators(m, Material{}, false);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("element 3"), std::string::npos);
    }
}

TEST(Load, NeumannLoadIntegratesTraction) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    const auto load = assemble_neumann_load(m, [](double) { return 1.0; }, false);
    const Vector& b = load.terms.front().spatial;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (Index n = 0; n < m.num_nodes(); ++n) {
        sx += std::abs(b[3 * n]);
        sy += b[3 * n + 1];
        sz += std::abs(b[3 * n + 2]);
    }
    EXPECT_NEAR(sy, 6.0, 1e-12);
    EXPECT_EQ(sx, 0.0);
    EXPECT_EQ(sz, 0.0);
}

TEST(Load, SeparatedEvaluationMatchesSignal) {
    const Mesh m = build_beam_mesh({6, 1, 1}, {6, 1, 1});
    const double F = 0.5e9, t1 = 0.625, t2 = 0.75;
    const auto load = assemble_neumann_load(m, [=](double t) { return triangle_signal(t, t1, t2, F); });
    const Vector& b = load.terms.front().spatial;
    EXPECT_LE((load.evaluate(0.5 * t1) - 0.5 * F * b).cwiseAbs().maxCoeff(), 1e-14 * F * b.cwiseAbs().maxCoeff());
    EXPECT_EQ(load.evaluate(3.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Load, NoNeumannFacetsIsAnError) {
    Mesh m = build_beam_mesh({1, 1, 1}, {1, 1, 1});
    for (auto& f : m.facets)
        if (f.tag == FacetTag::Neumann) f.tag = FacetTag::Free;
    EXPECT_THROW(assemble_neumann_load(m, [](double) { return 1.0; }), SolverError);
}

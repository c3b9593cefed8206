// SPDX-License-Identifier: Apache-2.0
#include "pgdham/baselines.hpp"
#include "pgdham/pgdham.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pgdham;

namespace {

SparseMatrix scalar(double v) {
    SparseMatrix A(1, 1);
    A.insert(0, 0) = v;
    A.makeCompressed();
    return A;
}

struct SmallBeam {
    Mesh mesh = build_beam_mesh({6, 1, 1}, {6, 2, 2});
    Operators ops = assemble_operators(mesh, Material{});
    SeparatedLoad load = assemble_neumann_load(mesh, [](double t) { return triangle_signal(t, 0.625, 0.75, 0.5e9); });
    TimeGrid grid{5.0, 400};
};

double max_cos_error(Index nt) {
    const TimeGrid g(2.0, nt);
    const auto traj = solve_fom(scalar(1.0), scalar(1.0), SeparatedLoad{}, g, Vector::Ones(1), Vector::Zero(1));
    double e = 0.0;
    for (Index i = 0; i < g.nodes(); ++i) e = std::max(e, std::abs(traj.Q(0, i) - std::cos(g.at(i))));
    return e;
}

} // namespace

TEST(Fom, ZeroLoadZeroStateStaysZero) {
    SmallBeam b;
    const Vector z = Vector::Zero(b.ops.K.rows());
    const auto traj = solve_fom(b.ops.K, b.ops.M, SeparatedLoad{}, TimeGrid(1.0, 20), z, z);
    EXPECT_EQ(traj.Q.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(traj.P.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fom, ScalarOscillatorConservesEnergy) {
    const TimeGrid g(10.0, 500);
    const auto traj = solve_fom(scalar(1.0), scalar(1.0), SeparatedLoad{}, g, Vector::Ones(1), Vector::Zero(1));
    for (Index i = 0; i < g.nodes(); ++i) {
        const double q = traj.Q(0, i), p = traj.P(0, i);
        EXPECT_NEAR(0.5 * (q * q + p * p), 0.5, 1e-12);
    }
}

TEST(Fom, SecondOrderInTime) {
    const double ratio = max_cos_error(200) / max_cos_error(400);
    EXPECT_NEAR(std::log2(ratio), 2.0, 0.1);
}

TEST(Fom, BeamFreeVibrationEnergyDrift) {
    SmallBeam b;
    const Index n = b.ops.K.rows();
    Vector q0(n);
    for (Index i = 0; i < n; ++i) q0[i] = 1e-4 * std::sin(0.37 * i);
    const Vector p0 = 0.3 * (b.ops.M * q0);
    const TimeGrid g(0.05, 200);
    const auto traj = solve_fom(b.ops.K, b.ops.M, SeparatedLoad{}, g, q0, p0);
    SpdFactorization Mfac(b.ops.M, "M");
    const double H0 = hamiltonian(b.ops.K, Mfac, q0, p0);
    double drift = 0.0;
    for (Index i = 0; i < g.nodes(); ++i)
        drift = std::max(drift, std::abs(hamiltonian(b.ops.K, Mfac, traj.Q.col(i), traj.P.col(i)) - H0) / H0);
    EXPECT_LE(drift, 1e-10);
}

TEST(Fom, SizeMismatchRejected) {
    EXPECT_THROW(solve_fom(scalar(1.0), scalar(1.0), SeparatedLoad{}, TimeGrid(1, 2), Vector::Ones(2), Vector::Ones(1)),
                 InvalidArgument);
}

TEST(EnergyNorm, ConstantState) {
    SmallBeam b;
    const Index n = b.ops.K.rows();
    const TimeGrid g(2.0, 10);
    const Vector q0 = Vector::LinSpaced(n, 0.0, 1e-3);
    Trajectory traj(n, g);
    traj.Q.colwise() = q0;
    SpdFactorization Mfac(b.ops.M, "M");
    const double expected = std::sqrt(2.0 * 0.5 * q0.dot(b.ops.K * q0));
    EXPECT_NEAR(energy_norm(traj, b.ops.K, Mfac, TimeOperators(g)) / expected, 1.0, 1e-12);
    EXPECT_EQ(energy_norm(Trajectory(n, g), b.ops.K, Mfac, TimeOperators(g)), 0.0);
}

TEST(RomError, BasicProperties) {
    SmallBeam b;
    const Vector z = Vector::Zero(b.ops.K.rows());
    const auto fom = solve_fom(b.ops.K, b.ops.M, b.load, b.grid, z, z);
    SpdFactorization Mfac(b.ops.M, "M");
    const TimeOperators ops(b.grid);
    EXPECT_EQ(rom_error(fom, fom, b.ops.K, Mfac, ops), 0.0);
    EXPECT_NEAR(rom_error(fom, Trajectory(fom.dofs(), b.grid), b.ops.K, Mfac, ops), 1.0, 1e-14);
    const Trajectory scaled(1.01 * fom.Q, 1.01 * fom.P, b.grid);
    EXPECT_NEAR(rom_error(fom, scaled, b.ops.K, Mfac, ops), 0.01, 1e-12);
    // scale invariance
    const Trajectory f2(3.0 * fom.Q, 3.0 * fom.P, b.grid), s2(3.0 * scaled.Q, 3.0 * scaled.P, b.grid);
    EXPECT_NEAR(rom_error(f2, s2, b.ops.K, Mfac, ops), rom_error(fom, scaled, b.ops.K, Mfac, ops), 1e-14);
    EXPECT_THROW(rom_error(Trajectory(fom.dofs(), b.grid), fom, b.ops.K, Mfac, ops), SolverError);
}

TEST(RomError, EvaluatorMatchesDirectComputation) {
    SmallBeam b;
    const Vector z = Vector::Zero(b.ops.K.rows());
    const auto fom = solve_fom(b.ops.K, b.ops.M, b.load, b.grid, z, z);
    SpdFactorization Mfac(b.ops.M, "M");
    const TimeOperators ops(b.grid);
    const SnapshotSvd svd(fom);
    const auto a = svd.truncate(3);
    const EnergyErrorEvaluator ev(fom, b.ops.K, Mfac, ops);
    const double direct = rom_error(fom, a.to_trajectory(b.grid), b.ops.K, Mfac, ops);
    EXPECT_NEAR(ev.relative_error(a.Sq, a.Sp, a.Psi_q, a.Psi_p), direct, 1e-10 * direct);
}

TEST(SvdReference, RankProperties) {
    SmallBeam b;
    const Vector z = Vector::Zero(b.ops.K.rows());
    const auto fom = solve_fom(b.ops.K, b.ops.M, b.load, b.grid, z, z);
    const SnapshotSvd svd(fom);
    const auto full = svd.truncate(svd.max_rank()).to_trajectory(b.grid);
    EXPECT_LE((full.Q - fom.Q).norm(), 1e-10 * fom.Q.norm());
    EXPECT_LE((full.P - fom.P).norm(), 1e-10 * fom.P.norm());
    double prev = std::numeric_limits<double>::infinity();
    for (Index m : {0, 1, 2, 5, 10, 20}) {
        const auto t = svd.truncate(m).to_trajectory(b.grid);
        const double f = std::sqrt((t.Q - fom.Q).squaredNorm() + (t.P - fom.P).squaredNorm());
        EXPECT_LE(f, prev);
        prev = f;
    }
    const auto zero = svd_reference(fom, 0);
    EXPECT_EQ(zero.Q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SvdReference, RankOneIsExact) {
    const TimeGrid g(1.0, 30);
    const Vector a = Vector::LinSpaced(7, 1.0, 2.0);
    const Vector t = g.sample([](double s) { return std::sin(3 * s) + 0.1; });
    const Trajectory traj(a * t.transpose(), 2.0 * a * t.transpose(), g);
    const auto r = svd_reference(traj, 1);
    EXPECT_LE((r.Q - traj.Q).norm(), 1e-12 * traj.Q.norm());
    EXPECT_LE((r.P - traj.P).norm(), 1e-12 * traj.P.norm());
}

TEST(ModalReference, CompleteBasisMatchesFom) {
    const Mesh mesh = build_beam_mesh({6, 1, 1}, {3, 1, 1});
    const auto ops = assemble_operators(mesh, Material{});
    const auto load = assemble_neumann_load(mesh, [](double t) { return triangle_signal(t, 0.625, 0.75, 0.5e9); });
    const TimeGrid g(5.0, 300);
    const Index n = ops.K.rows();
    const auto md = modal_reference(ops.K, ops.M, n, load, g);
    const Vector z = Vector::Zero(n);
    const auto fom = solve_fom(ops.K, ops.M, load, g, z, z);
    SpdFactorization Mfac(ops.M, "M");
    EXPECT_LE(rom_error(fom, md, ops.K, Mfac, TimeOperators(g)), 1e-8);
}

TEST(ModalReference, ScalarSystemIdenticalToFom) {
    SeparatedLoad load;
    load.terms.push_back({Vector::Ones(1), [](double t) { return std::sin(t); }});
    const TimeGrid g(3.0, 60);
    const auto md = modal_reference(scalar(4.0), scalar(2.0), 1, load, g);
    const auto fom = solve_fom(scalar(4.0), scalar(2.0), load, g, Vector::Zero(1), Vector::Zero(1));
    EXPECT_LE((md.Q - fom.Q).cwiseAbs().maxCoeff(), 1e-13 * fom.Q.cwiseAbs().maxCoeff());
    EXPECT_LE((md.P - fom.P).cwiseAbs().maxCoeff(), 1e-13 * fom.P.cwiseAbs().maxCoeff());
}

TEST(ModalReference, ErrorDecreasesWithModes) {
    SmallBeam b;
    const Vector z = Vector::Zero(b.ops.K.rows());
    const auto fom = solve_fom(b.ops.K, b.ops.M, b.load, b.grid, z, z);
    SpdFactorization Mfac(b.ops.M, "M");
    const EnergyErrorEvaluator ev(fom, b.ops.K, Mfac, TimeOperators(b.grid));
    const auto basis = compute_ritz_pairs(b.ops.K, b.ops.M, 20, {.tol = 1e-10});
    const auto md = modal_separated(basis, b.ops.M, b.load, b.grid);
    double prev = 2.0;
    for (Index r : {5, 10, 20}) {
        const double e = ev.relative_error(md.Sq.leftCols(r), md.Sp.leftCols(r), md.Psi_q.leftCols(r), md.Psi_p.leftCols(r));
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(Trajectory, CreationCounter) {
    const auto before = Trajectory::created();
    Trajectory t(3, TimeGrid(1.0, 4));
    Trajectory copy = t;
    (void)copy;
    EXPECT_EQ(Trajectory::created(), before + 2);
}

// SPDX-License-Identifier: Apache-2.0
#include "pgdham/time_grid.hpp"

#include <gtest/gtest.h>

using namespace pgdham;

TEST(TimeGrid, NodesAndStep) {
    const TimeGrid g(5.0, 1200);
    EXPECT_EQ(g.nodes(), 1201);
    EXPECT_DOUBLE_EQ(g.step(), 5.0 / 1200);
    EXPECT_EQ(g.at(150), 0.625);
    EXPECT_EQ(g.at(180), 0.75);
    EXPECT_EQ(g.at(1200), 5.0);
    EXPECT_THROW(TimeGrid(5.0, 0), InvalidArgument);
    EXPECT_THROW(TimeGrid(-1.0, 10), InvalidArgument);
}

TEST(TimeOperators, TwoNodeMatrices) {
    const TimeOperators ops(TimeGrid(1.0, 1));
    Matrix A(2, 2), C(2, 2);
    A << 2, 1, 1, 2;
    A /= 6.0;
    C << -1, -1, 1, 1;
    C *= 0.5;
    EXPECT_LE((ops.dense_mass() - A).cwiseAbs().maxCoeff(), 1e-16);
    EXPECT_EQ((ops.dense_derivative() - C).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TimeOperators, SummationByPartsExact) {
    for (Index nt : {1, 2, 7, 64, 1200}) {
        const TimeOperators ops(TimeGrid(5.0, nt));
        const Matrix C = ops.dense_derivative();
        Matrix S = Matrix::Zero(nt + 1, nt + 1);
        S(0, 0) = -1.0;
        S(nt, nt) = 1.0;
        EXPECT_EQ((C + C.transpose() - S).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(TimeOperators, DenseAndMatrixFreeAgree) {
    const TimeOperators ops(TimeGrid(2.0, 9));
    const Vector u = Vector::LinSpaced(10, -1, 3).array().sin();
    const Vector v = Vector::LinSpaced(10, 0, 2).array().exp();
    EXPECT_NEAR(ops.mass(u, v), u.dot(ops.dense_mass() * v), 1e-14);
    EXPECT_NEAR(ops.derivative(u, v), u.dot(ops.dense_derivative() * v), 1e-14);
    EXPECT_LE((ops.apply_mass(v) - ops.dense_mass() * v).norm(), 1e-14);
}

TEST(TimeOperators, ExactForPiecewiseLinearProducts) {
    // Piecewise-linear data (nodal interpolants of arbitrary samples): the
    // integral over each interval of a product of two linears is
    // h/6 (2 u0 v0 + u0 v1 + u1 v0 + 2 u1 v1); sum it independently.
    const TimeGrid g(3.0, 17);
    const TimeOperators ops(g);
    Vector u(18), v(18);
    for (Index i = 0; i < 18; ++i) {
        u[i] = std::cos(0.7 * i) + 0.1 * i;
        v[i] = std::sin(1.3 * i) - 0.05 * i * i;
    }
    const double h = g.step();
    double ref = 0.0, dref = 0.0;
    for (Index i = 1; i < 18; ++i) {
        ref += h / 6.0 * (2 * u[i - 1] * v[i - 1] + u[i - 1] * v[i] + u[i] * v[i - 1] + 2 * u[i] * v[i]);
        dref += (u[i] - u[i - 1]) * 0.5 * (v[i - 1] + v[i]);
    }
    EXPECT_LE(std::abs(ops.mass(u, v) - ref), 1e-14 * std::abs(ref));
    EXPECT_LE(std::abs(ops.derivative(u, v) - dref), 1e-14 * std::abs(dref));
}

TEST(TimeOperators, AnalyticIntegralsOfLinearFunctions) {
    const TimeGrid g(1.0, 64);
    const TimeOperators ops(g);
    const Vector one = Vector::Ones(65);
    const Vector t = g.sample([](double s) { return s; });
    const Vector lin = g.sample([](double s) { return 2.0 - 3.0 * s; });
    EXPECT_NEAR(ops.mass(one, one), 1.0, 1e-14);
    EXPECT_NEAR(ops.derivative(t, one), 1.0, 1e-14);
    // integral of t (2 - 3t) on (0,1) = 1 - 1 = 0; of t^2 = 1/3 is not piecewise linear
    EXPECT_NEAR(ops.mass(t, lin), 0.0, 1e-14);
    EXPECT_NEAR(ops.mass(one, lin), 0.5, 1e-14);
}

TEST(TimeOperators, SizeMismatchThrows) {
    const TimeOperators ops(TimeGrid(1.0, 4));
    EXPECT_THROW(ops.mass(Vector::Ones(4), Vector::Ones(5)), InvalidArgument);
    EXPECT_THROW(ops.derivative(Vector::Ones(5), Vector::Ones(3)), InvalidArgument);
}

TEST(TriangleSignal, Branches) {
    const double F = 0.5e9, t1 = 0.625, t2 = 0.75;
    EXPECT_EQ(triangle_signal(0.0, t1, t2, F), 0.0);
    EXPECT_EQ(triangle_signal(0.5 * t1, t1, t2, F), 0.5 * F);
    EXPECT_EQ(triangle_signal(t1, t1, t2, F), -0.5 * F);
    EXPECT_EQ(triangle_signal(t2, t1, t2, F), 0.0);
    EXPECT_EQ(triangle_signal(4.0, t1, t2, F), 0.0);
    EXPECT_NEAR(triangle_signal(0.5 * (t1 + t2), t1, t2, F), -0.25 * F, 1e-6);
    EXPECT_THROW(triangle_signal(0.1, 0.8, 0.75, F), InvalidArgument);
    EXPECT_THROW(triangle_signal(0.1, 0.0, 0.75, F), InvalidArgument);
}

TEST(TimeCoeffs, ZeroModes) {
    const TimeOperators ops(TimeGrid(1.0, 10));
    const Vector z = Vector::Zero(11);
    const TimeCoeffs tc = time_coeffs(z, z, ops);
    EXPECT_EQ(tc.k, 0.0);
    EXPECT_EQ(tc.c, 0.0);
    EXPECT_EQ(tc.d, 0.0);
    EXPECT_EQ(tc.m, 0.0);
}

TEST(TimeCoeffs, LinearModes) {
    const TimeGrid g(1.0, 2000);
    const TimeOperators ops(g);
    const Vector t = g.sample([](double s) { return s; });
    const TimeCoeffs tc = time_coeffs(t, t, ops);
    EXPECT_NEAR(tc.k, 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(tc.m, 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(tc.c, 0.5, 1e-14);
    EXPECT_NEAR(tc.d, -0.5, 1e-14);
}

TEST(TimeCoeffs, ConstantModesHaveZeroCoupling) {
    // The discrete C_t annihilates constants: 1^T C 1 = 0, so both coupling
    // coefficients vanish.
    const TimeOperators ops(TimeGrid(2.0, 50));
    const Vector one = Vector::Ones(51);
    const TimeCoeffs tc = time_coeffs(one, one, ops);
    EXPECT_EQ(tc.c, 0.0);
    EXPECT_EQ(tc.d, 0.0);
    EXPECT_NEAR(tc.k, 2.0, 1e-14);
}

TEST(TimeCoeffs, SummationByPartsIdentity) {
    const TimeGrid g(1.5, 33);
    const TimeOperators ops(g);
    Vector q(34), p(34);
    for (Index i = 0; i < 34; ++i) {
        q[i] = std::sin(0.3 * i) + 0.2;
        p[i] = std::cos(0.5 * i);
    }
    const TimeCoeffs tc = time_coeffs(q, p, ops);
    const double boundary = q[33] * p[33] - q[0] * p[0];
    EXPECT_NEAR(tc.d, tc.c - boundary, 1e-14);
    EXPECT_GE(tc.k, 0.0);
    EXPECT_GE(tc.m, 0.0);
}

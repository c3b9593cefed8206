// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/ritz.hpp"
#include "pgdham/sparse.hpp"
#include "pgdham/time_grid.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <sstream>
#include <string_view>

namespace pgdham::pgd {

/// Right-hand side of the space problem. `mass_p` stores M b_p rather than
/// b_p: b_p carries M^{-1} applied to momentum modes, and the Schur-reduced
/// solve only ever needs M b_p.
struct SpaceRhs {
    Vector q;
    Vector mass_p;
};

struct SpatialPair {
    Vector q;
    Vector p;
};

enum class Variant { LU, Ritz };

inline constexpr std::string_view variant_name(Variant v) { return v == Variant::LU ? "pgd-lu" : "pgd-ritz"; }

/// Operations the greedy solver needs from a spatial representation.
///
/// Vectors live in the backend's own coordinates. Inner products used by
/// the algorithm are stiffness(a).dot(b) (K-inner product for coordinate
/// modes), inv_mass(a).dot(b) (M^{-1}-inner product for momentum modes) and
/// the plain dot product, which is both the coupling q^T p and the
/// Euclidean norm used by the stagnation test.
template <class S>
concept SpaceBackend = requires(const S& s, S& ms, const Vector& v, const TimeCoeffs& tc, const SpaceRhs& rhs) {
    { s.dim() } -> std::convertible_to<Index>;
    { s.stiffness(v) } -> std::convertible_to<Vector>;
    { s.mass(v) } -> std::convertible_to<Vector>;
    { s.inv_mass(v) } -> std::convertible_to<Vector>;
    { ms.solve(tc, rhs) } -> std::convertible_to<SpatialPair>;
    { s.load_vectors() } -> std::convertible_to<const std::vector<Vector>&>;
    { s.lift_q(Matrix{}) } -> std::convertible_to<Matrix>;
    { s.lift_p(Matrix{}) } -> std::convertible_to<Matrix>;
    { S::variant } -> std::convertible_to<Variant>;
};

/// Full finite-element space: A_q = m_t k_t K - c_t d_t M is refactorized at
/// every call (symbolic analysis done once), M through its Cholesky factor.
class FullSpace {
public:
    static constexpr Variant variant = Variant::LU;

    FullSpace(const SparseMatrix& K, const SparseMatrix& M, const SeparatedLoad& load)
        : K_(&K), M_(&M), Mfac_(M, "mass matrix M") {
        if (K.rows() != M.rows()) throw InvalidArgument("full space: K and M sizes differ");
        for (const auto& t : load.terms) {
            if (t.spatial.size() != K.rows()) throw InvalidArgument("full space: load size differs from operators");
            loads_.push_back(t.spatial);
        }
        Aq_ = K + M; // pattern of K contains pattern of M
        Aq_.makeCompressed();
        solver_.analyze(Aq_);
    }

    Index dim() const { return K_->rows(); }
    Vector stiffness(const Vector& v) const { return *K_ * v; }
    Vector mass(const Vector& v) const { return *M_ * v; }
    Vector inv_mass(const Vector& v) const { return Mfac_.solve(v); }
    const std::vector<Vector>& load_vectors() const { return loads_; }
    Matrix lift_q(const Matrix& x) const { return x; }
    Matrix lift_p(const Matrix& x) const { return x; }
    const SpdFactorization& mass_factorization() const { return Mfac_; }

    /// m_t k_t K phi_q - c_t d_t M phi_q = m_t b_q - c_t M b_p,
    /// phi_p = (M b_p - d_t M phi_q) / m_t.
    SpatialPair solve(const TimeCoeffs& tc, const SpaceRhs& rhs) {
        if (!(tc.m > 0.0) || !std::isfinite(tc.m)) throw SolverError("space step: degenerate temporal mode (m_t = 0)");
        const double a = tc.m * tc.k, b = -tc.c * tc.d;
        // Same pattern as Aq_, so the numeric values can be overwritten in place.
        SparseMatrix next = a * *K_ + b * *M_;
        next.makeCompressed();
        if (next.nonZeros() != Aq_.nonZeros()) {
            Aq_ = next;
            solver_.analyze(Aq_);
        } else {
            Aq_ = std::move(next);
        }
        if (!solver_.factorize(Aq_)) {
            std::ostringstream os;
            os << "space step: A_q = m_t k_t K - c_t d_t M is singular (k_t=" << tc.k << ", c_t=" << tc.c
               << ", d_t=" << tc.d << ", m_t=" << tc.m << ")";
            throw SolverError(os.str());
        }
        SpatialPair out;
        out.q = solver_.solve(tc.m * rhs.q - tc.c * rhs.mass_p);
        out.p = (rhs.mass_p - tc.d * (*M_ * out.q)) / tc.m;
        if (!out.q.allFinite() || !out.p.allFinite()) throw SolverError("space step: non-finite solution");
        return out;
    }

private:
    const SparseMatrix* K_;
    const SparseMatrix* M_;
    SpdFactorization Mfac_;
    std::vector<Vector> loads_;
    SparseMatrix Aq_;
    SymmetricPatternSolver solver_;
};

/// Ritz subspace: q = V q^, p = M V p^. In these coordinates K becomes
/// diag(lambda) and both M and M^{-1} become the identity, so the space
/// problem is diagonal.
class RitzSpace {
public:
    static constexpr Variant variant = Variant::Ritz;

    RitzSpace(const RitzBasis& basis, const SparseMatrix& M, const SeparatedLoad& load)
        : basis_(&basis), map_(build_symplectic_map(basis, M)) {
        for (const auto& t : project_load(load, basis).terms) loads_.push_back(t.spatial);
    }

    Index dim() const { return basis_->size(); }
    Vector stiffness(const Vector& v) const { return basis_->lambda.cwiseProduct(v); }
    Vector mass(const Vector& v) const { return v; }
    Vector inv_mass(const Vector& v) const { return v; }
    const std::vector<Vector>& load_vectors() const { return loads_; }
    Matrix lift_q(const Matrix& x) const { return map_.V * x; }
    Matrix lift_p(const Matrix& x) const { return map_.MV * x; }
    const SymplecticMap& map() const { return map_; }
    const RitzBasis& basis() const { return *basis_; }

    SpatialPair solve(const TimeCoeffs& tc, const SpaceRhs& rhs) const {
        if (!(tc.m > 0.0) || !std::isfinite(tc.m)) throw SolverError("space step: degenerate temporal mode (m_t = 0)");
        const Vector& lam = basis_->lambda;
        SpatialPair out;
        out.q.resize(dim());
        const double a = tc.m * tc.k, b = -tc.c * tc.d;
        for (Index i = 0; i < dim(); ++i) {
            const double den = a * lam[i] + b;
            if (std::abs(den) <= 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(a * lam[i]) + std::abs(b))) {
                std::ostringstream os;
                os << "space step: resonance at Ritz index " << i << " (lambda=" << lam[i] << ", m_t k_t=" << a
                   << ", c_t d_t=" << -b << ")";
                throw SolverError(os.str());
            }
            out.q[i] = (tc.m * rhs.q[i] - tc.c * rhs.mass_p[i]) / den;
        }
        out.p = (rhs.mass_p - tc.d * out.q) / tc.m;
        return out;
    }

private:
    const RitzBasis* basis_;
    SymplecticMap map_;
    std::vector<Vector> loads_;
};

static_assert(SpaceBackend<FullSpace>);
static_assert(SpaceBackend<RitzSpace>);

/// Stand-alone form of the Schur-reduced space step on given operators.
inline SpatialPair space_step_lu(const TimeCoeffs& tc, const SpaceRhs& rhs, const SparseMatrix& K,
                                 const SparseMatrix& M) {
    FullSpace space(K, M, SeparatedLoad{});
    return space.solve(tc, rhs);
}

inline SpatialPair space_step_ritz(const TimeCoeffs& tc, const SpaceRhs& rhs, const RitzBasis& basis,
                                   const SparseMatrix& M) {
    RitzSpace space(basis, M, SeparatedLoad{});
    return space.solve(tc, rhs);
}

} // namespace pgdham::pgd

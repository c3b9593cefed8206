// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/pgd/steps.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace pgdham::pgd {

struct PgdConfig {
    Index max_modes = 20;
    double eps = 1e-9;
    int k_max = 35;
    bool aitken = true;
    AitkenSign aitken_sign = AitkenSign::Classical; // the printed sign stalls on the beam
    bool temporal_update = true;
    double collapse_tol = 1e-12;

    void validate() const {
        if (max_modes < 0) throw InvalidArgument("pgd: max_modes must be >= 0");
        if (!(eps > 0.0)) throw InvalidArgument("pgd: eps must be > 0");
        if (k_max < 1) throw InvalidArgument("pgd: k_max must be >= 1");
    }
};

/// Outcome of one fixed-point enrichment, before the pair is appended.
struct Enrichment {
    SpatialPair phi;
    Vector psi_q, psi_p;
    int iterations = 0;
    bool converged = false;
    Stagnation stagnation;
    double omega_q = 1.0, omega_p = 1.0;
    bool rebuilt_first_iterate = false; ///< a collapsed first-iterate component was rebuilt
    double seconds_fixed_point = 0.0;
    double seconds_orthonormalization = 0.0;
};

/// Per-mode log line: iteration counts (Fig. 4 style data) and stage timings.
struct EnrichmentRecord {
    Index mode = 0; ///< 1-based
    int iterations = 0;
    bool converged = false;
    double stagnation = 0.0;
    bool rebuilt_first_iterate = false;
    double seconds_fixed_point = 0.0;
    double seconds_orthonormalization = 0.0;
    double seconds_update = 0.0;
    double orthonormality_defect = 0.0; ///< max of ||Sq^T K Sq - I||_max, ||Sp^T M^-1 Sp - I||_max
};

struct PgdResult {
    SeparatedSolution solution;
    std::vector<EnrichmentRecord> log;
    bool stopped_early = false;
    std::string stop_reason;

    int total_iterations() const {
        int s = 0;
        for (const auto& r : log) s += r.iterations;
        return s;
    }
};

/// Called after each accepted enrichment (and its temporal update) with the
/// current solution. Time spent in the callback is not counted in the log.
using EnrichmentCallback = std::function<void(const SeparatedSolution&, const EnrichmentRecord&)>;

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline double max_identity_defect(const Matrix& G) {
    if (G.size() == 0) return 0.0;
    return (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

} // namespace detail

/// Temporal starting guess: psi_q follows the load signal and psi_p its
/// running integral, each normalized in the A_t norm. Taking psi_p equal to
/// psi_q makes d_t vanish whenever the signal starts and ends at zero, which
/// forces phi_p = 0 and a collapsed first mode.
template <SpaceBackend Space>
std::pair<Vector, Vector> initial_temporal_guess(const Problem<Space>& pb) {
    const Index n = pb.time_nodes();
    const double h = pb.grid().step();
    Vector g = Vector::Zero(n);
    for (const auto& s : pb.signals) g += s;
    if (!(g.cwiseAbs().maxCoeff() > 0.0)) g.setOnes();
    Vector G(n);
    G[0] = 0.0;
    for (Index i = 1; i < n; ++i) G[i] = G[i - 1] + 0.5 * h * (g[i] + g[i - 1]);
    if (!(G.cwiseAbs().maxCoeff() > 0.0)) G.setOnes();
    const double ng = std::sqrt(pb.ops.mass(g, g));
    const double nG = std::sqrt(pb.ops.mass(G, G));
    return {g / ng, G / nG};
}

/// Alternating space/time fixed point with optional Aitken relaxation of the
/// spatial modes. Stops when max(s_q, s_p) <= eps or after k_max iterations.
/// ModeCollapse from the projection step propagates.
template <SpaceBackend Space>
Enrichment fixed_point_enrich(const SeparatedSolution& sol, const Problem<Space>& pb, const PgdConfig& cfg) {
    using detail::Clock;
    const auto t_start = Clock::now();
    auto& space = pb.space;
    const Index n = space.dim();

    Enrichment out;
    auto [psi_q, psi_p] = initial_temporal_guess(pb);
    SpatialPair phi_prev{Vector::Zero(n), Vector::Zero(n)};
    Vector rq_prev, rp_prev;
    double omega_q = 1.0, omega_p = 1.0;
    double t_ortho = 0.0;

    for (int k = 1; k <= cfg.k_max; ++k) {
        const TimeCoeffs tc = time_coeffs(psi_q, psi_p, pb.ops);
        const SpaceRhs rhs = build_space_rhs(sol, psi_q, psi_p, pb);
        SpatialPair raw = space.solve(tc, rhs);

        const auto t_o = Clock::now();
        SpatialPair phi = k == 1 ? orthonormalize_first_iterate(std::move(raw), sol, space, cfg.collapse_tol,
                                                                out.rebuilt_first_iterate)
                                 : orthonormalize(std::move(raw), sol, space, cfg.collapse_tol);
        t_ortho += detail::seconds_since(t_o);

        if (cfg.aitken) {
            Vector rq = phi.q - phi_prev.q;
            Vector rp = phi.p - phi_prev.p;
            if (k > 1) {
                omega_q = aitken_weight(omega_q, rq_prev, rq, cfg.aitken_sign, phi.q.norm());
                omega_p = aitken_weight(omega_p, rp_prev, rp, cfg.aitken_sign, phi.p.norm());
                phi.q = relax(omega_q, phi.q, phi_prev.q);
                phi.p = relax(omega_p, phi.p, phi_prev.p);
            }
            rq_prev = std::move(rq);
            rp_prev = std::move(rp);
        }

        auto [nq, np] = time_step_march(phi, sol, pb);
        const Stagnation s = stagnation(phi_prev, psi_q, psi_p, phi, nq, np, pb.ops);

        phi_prev = std::move(phi);
        psi_q = std::move(nq);
        psi_p = std::move(np);
        out.iterations = k;
        out.stagnation = s;
        if (s.max() <= cfg.eps) {
            out.converged = true;
            break;
        }
    }
    out.phi = std::move(phi_prev);
    out.psi_q = std::move(psi_q);
    out.psi_p = std::move(psi_p);
    out.omega_q = omega_q;
    out.omega_p = omega_p;
    out.seconds_orthonormalization = t_ortho;
    out.seconds_fixed_point = detail::seconds_since(t_start) - t_ortho;
    return out;
}

/// Greedy rank-one enrichment: for m = 1..max_modes run the fixed point,
/// append the orthonormalized pair and (optionally) re-solve all temporal
/// modes. A collapsed mode or a failed solve ends the loop with the partial
/// solution and a reason.
template <SpaceBackend Space>
PgdResult greedy_solve(Space& space, const SeparatedLoad& load, const TimeGrid& grid, const PgdConfig& cfg,
                       const EnrichmentCallback& on_enrichment = {}) {
    cfg.validate();
    grid.validate();
    const Problem<Space> pb(space, load, grid);
    PgdResult res;
    res.solution = SeparatedSolution::empty(space, pb.time_nodes());

    for (Index m = 1; m <= cfg.max_modes; ++m) {
        EnrichmentRecord rec;
        rec.mode = m;
        try {
            Enrichment e = fixed_point_enrich(res.solution, pb, cfg);

            // The relaxed iterate is a combination of unit, projected modes;
            // re-normalize it exactly and move the scale into psi.
            const auto t_o = detail::Clock::now();
            Orthonormalized fin = orthonormalize_with_norms(std::move(e.phi), res.solution, space, cfg.collapse_tol);
            e.seconds_orthonormalization += detail::seconds_since(t_o);
            res.solution.append(space, fin.phi, Vector(e.psi_q * fin.norm_q), Vector(e.psi_p * fin.norm_p));

            const auto t_u = detail::Clock::now();
            if (cfg.temporal_update) temporal_update(res.solution, pb);
            rec.seconds_update = detail::seconds_since(t_u);

            rec.iterations = e.iterations;
            rec.converged = e.converged;
            rec.stagnation = e.stagnation.max();
            rec.rebuilt_first_iterate = e.rebuilt_first_iterate;
            rec.seconds_fixed_point = e.seconds_fixed_point;
            rec.seconds_orthonormalization = e.seconds_orthonormalization;
        } catch (const SolverError& err) {
            res.stopped_early = true;
            res.stop_reason = "enrichment " + std::to_string(m) + " rejected: " + err.what();
            break;
        }
        rec.orthonormality_defect = std::max(detail::max_identity_defect(res.solution.Kx()),
                                             detail::max_identity_defect(res.solution.Mx()));
        res.log.push_back(rec);
        if (on_enrichment) on_enrichment(res.solution, rec);
    }
    if (!res.stopped_early) res.stop_reason = "reached max_modes";
    return res;
}

} // namespace pgdham::pgd

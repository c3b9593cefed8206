// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/baselines.hpp"
#include "pgdham/harness/config.hpp"
#include "pgdham/io.hpp"
#include "pgdham/pgd/solver.hpp"
#include "pgdham/symplectic.hpp"

#include "json.hpp"

#include <Eigen/Core>
#include <algorithm>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace pgdham::harness {

inline constexpr int kSchemaVersion = 1;

/// Assembled benchmark problem described by a config.
struct Benchmark {
    Mesh mesh;
    Operators ops;
    SeparatedLoad load;
    TimeGrid grid;
    double assembly_seconds = 0.0;

    Index dofs() const { return ops.K.rows(); }
};

inline SeparatedLoad beam_load(const Mesh& mesh, const ExperimentConfig::Load& l) {
    const double F = l.F, t1 = l.t1, t2 = l.t2;
    return assemble_neumann_load(mesh, [F, t1, t2](double t) { return triangle_signal(t, t1, t2, F); });
}

inline Benchmark build_benchmark(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    Benchmark b;
    b.mesh = build_beam_mesh(cfg.geometry.lengths, cfg.geometry.divisions);
    b.ops = assemble_operators(b.mesh, cfg.material);
    b.load = beam_load(b.mesh, cfg.load);
    b.grid = TimeGrid(cfg.time.T, cfg.time.n_t);
    b.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return b;
}

struct ErrorPoint {
    Index modes = 0;
    double error = 0.0;
};

struct IterationRow {
    Index mode = 0;
    int iterations = 0;
    bool converged = false;
    std::string aitken_sign; ///< printed | classical | off
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct MethodReport {
    std::string method;
    std::vector<ErrorPoint> errors;
    std::vector<IterationRow> iterations;
    std::vector<StageTiming> timings;
    double total_seconds = 0.0;
    std::string stop_reason;
    double orthonormality_defect = 0.0;             ///< worst over enrichments
    std::map<std::string, double> symplectic;       ///< defect before/after recombination, reconstruction error

    double stage_sum() const {
        double s = 0.0;
        for (const auto& t : timings) s += t.seconds;
        return s;
    }
    int total_iterations() const {
        int s = 0;
        for (const auto& r : iterations) s += r.iterations;
        return s;
    }
};

struct Table1Row {
    Index dofs = 0;
    Index n_t = 0;
    double dT_fom_svd = std::numeric_limits<double>::quiet_NaN();
    double dT_pgd_lu = std::numeric_limits<double>::quiet_NaN();
    double dT_pgd_ritz = std::numeric_limits<double>::quiet_NaN();

    double gain_fom_svd_over_ritz() const { return dT_fom_svd / dT_pgd_ritz; }
    double gain_lu_over_ritz() const { return dT_pgd_lu / dT_pgd_ritz; }
};

struct RunReport {
    int schema_version = kSchemaVersion;
    std::string config_yaml;
    std::string label;
    Index dofs = 0;
    Index n_t = 0;
    double T = 0.0;
    std::array<int, 3> divisions{};
    double assembly_seconds = 0.0;
    double total_seconds = 0.0;
    std::vector<MethodReport> methods;
    std::map<std::string, std::string> environment;

    const MethodReport* find(const std::string& method) const {
        for (const auto& m : methods)
            if (m.method == method) return &m;
        return nullptr;
    }

    Table1Row table1() const {
        Table1Row r;
        r.dofs = dofs;
        r.n_t = n_t;
        const auto* fom = find("fom");
        const auto* svd = find("svd");
        if (fom && svd) r.dT_fom_svd = fom->total_seconds + svd->total_seconds;
        if (const auto* lu = find("pgd-lu")) r.dT_pgd_lu = lu->total_seconds;
        if (const auto* rz = find("pgd-ritz")) r.dT_pgd_ritz = rz->total_seconds;
        return r;
    }
};

/// Compiler, library and build stamp recorded in every report.
inline std::map<std::string, std::string> environment_stamp() {
    std::map<std::string, std::string> env;
    env["compiler"] = __VERSION__;
    env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                   std::to_string(EIGEN_MINOR_VERSION);
#ifdef PGDHAM_USE_CHOLMOD
    env["sparse_cholesky"] = "cholmod-supernodal";
#else
    env["sparse_cholesky"] = "eigen-simplicial";
#endif
#ifdef NDEBUG
    env["build"] = "release";
#else
    env["build"] = "debug";
#endif
    env["eigen_threads"] = std::to_string(Eigen::nbThreads());
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    env["timestamp_utc"] = buf;
    return env;
}

// ---- JSON ----------------------------------------------------------------

inline void to_json(nlohmann::json& j, const MethodReport& m) {
    j["method"] = m.method;
    j["total_seconds"] = m.total_seconds;
    j["stop_reason"] = m.stop_reason;
    j["orthonormality_defect"] = m.orthonormality_defect;
    j["symplectic"] = m.symplectic;
    auto& e = j["errors"] = nlohmann::json::array();
    for (const auto& p : m.errors) e.push_back({{"modes", p.modes}, {"error", p.error}});
    auto& it = j["iterations"] = nlohmann::json::array();
    for (const auto& r : m.iterations)
        it.push_back({{"mode", r.mode}, {"iterations", r.iterations}, {"converged", r.converged},
                      {"aitken_sign", r.aitken_sign}});
    auto& t = j["timings"] = nlohmann::json::array();
    for (const auto& s : m.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
}

inline void from_json(const nlohmann::json& j, MethodReport& m) {
    m.method = j.at("method").get<std::string>();
    m.total_seconds = j.at("total_seconds").get<double>();
    m.stop_reason = j.value("stop_reason", "");
    m.orthonormality_defect = j.value("orthonormality_defect", 0.0);
    m.symplectic = j.value("symplectic", std::map<std::string, double>{});
    for (const auto& e : j.at("errors")) m.errors.push_back({e.at("modes").get<Index>(), e.at("error").get<double>()});
    for (const auto& r : j.at("iterations"))
        m.iterations.push_back({r.at("mode").get<Index>(), r.at("iterations").get<int>(), r.at("converged").get<bool>(),
                                r.at("aitken_sign").get<std::string>()});
    for (const auto& s : j.at("timings")) m.timings.push_back({s.at("stage").get<std::string>(), s.at("seconds").get<double>()});
}

inline void to_json(nlohmann::json& j, const RunReport& r) {
    j["schema_version"] = r.schema_version;
    j["label"] = r.label;
    j["config"] = r.config_yaml;
    j["dofs"] = r.dofs;
    j["n_t"] = r.n_t;
    j["T"] = r.T;
    j["divisions"] = r.divisions;
    j["assembly_seconds"] = r.assembly_seconds;
    j["total_seconds"] = r.total_seconds;
    j["methods"] = r.methods;
    j["environment"] = r.environment;
}

inline void from_json(const nlohmann::json& j, RunReport& r) {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion)
        throw InvalidArgument("report: unsupported schema version " + std::to_string(r.schema_version));
    r.label = j.value("label", "");
    r.config_yaml = j.value("config", "");
    r.dofs = j.at("dofs").get<Index>();
    r.n_t = j.at("n_t").get<Index>();
    r.T = j.at("T").get<double>();
    r.divisions = j.at("divisions").get<std::array<int, 3>>();
    r.assembly_seconds = j.value("assembly_seconds", 0.0);
    r.total_seconds = j.value("total_seconds", 0.0);
    r.methods = j.at("methods").get<std::vector<MethodReport>>();
    r.environment = j.value("environment", std::map<std::string, std::string>{});
}

inline RunReport read_report(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("report: cannot read " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("report: " + path.string() + " is not valid JSON: " + e.what());
    }
    RunReport r = j.get<RunReport>();
    if (r.label.empty()) r.label = path.parent_path().filename().string();
    return r;
}

inline void write_report_json(const std::filesystem::path& path, const RunReport& r) {
    auto os = io::detail::open_out(path);
    os << std::setw(2) << nlohmann::json(r) << '\n';
}

// ---- CSV -----------------------------------------------------------------

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void schema_line(std::ostream& os, const char* name) {
    os << "# pgdham-" << name << " v" << kSchemaVersion << '\n';
}

} // namespace detail

/// errors.csv: `method,modes,error` (relative energy-norm error).
inline void write_errors_csv(const std::filesystem::path& path, const RunReport& r) {
    auto os = io::detail::open_out(path);
    detail::schema_line(os, "errors");
    os << "method,modes,error\n";
    for (const auto& m : r.methods)
        for (const auto& p : m.errors) os << m.method << ',' << p.modes << ',' << detail::num(p.error) << '\n';
}

/// iterations.csv: `method,mode,iterations,converged,aitken_sign`.
inline void write_iterations_csv(const std::filesystem::path& path, const RunReport& r) {
    auto os = io::detail::open_out(path);
    detail::schema_line(os, "iterations");
    os << "method,mode,iterations,converged,aitken_sign\n";
    for (const auto& m : r.methods)
        for (const auto& it : m.iterations)
            os << m.method << ',' << it.mode << ',' << it.iterations << ',' << (it.converged ? 1 : 0) << ','
               << it.aitken_sign << '\n';
}

/// timings.csv: `method,stage,seconds`; stage `total` closes each method.
inline void write_timings_csv(const std::filesystem::path& path, const RunReport& r) {
    auto os = io::detail::open_out(path);
    detail::schema_line(os, "timings");
    os << "method,stage,seconds\n";
    os << "assembly,total," << detail::num(r.assembly_seconds) << '\n';
    for (const auto& m : r.methods) {
        for (const auto& t : m.timings) os << m.method << ',' << t.stage << ',' << detail::num(t.seconds) << '\n';
        os << m.method << ",total," << detail::num(m.total_seconds) << '\n';
    }
}

/// table1.csv: one summary row; missing methods leave empty cells.
inline void write_table1_csv(const std::filesystem::path& path, const RunReport& r) {
    const Table1Row t = r.table1();
    auto os = io::detail::open_out(path);
    detail::schema_line(os, "table1");
    os << "dofs,n_t,dT_fom_svd,dT_pgd_lu,dT_pgd_ritz,gain_fom_svd_over_pgd_ritz,gain_pgd_lu_over_pgd_ritz\n";
    os << t.dofs << ',' << t.n_t << ',' << detail::num(t.dT_fom_svd) << ',' << detail::num(t.dT_pgd_lu) << ','
       << detail::num(t.dT_pgd_ritz) << ',' << detail::num(t.gain_fom_svd_over_ritz()) << ','
       << detail::num(t.gain_lu_over_ritz()) << '\n';
}

inline void write_report_csvs(const std::filesystem::path& dir, const RunReport& r) {
    write_errors_csv(dir / "errors.csv", r);
    write_iterations_csv(dir / "iterations.csv", r);
    write_timings_csv(dir / "timings.csv", r);
    write_table1_csv(dir / "table1.csv", r);
}

/// Plain-text summary for terminals.
inline std::string summarize(const RunReport& r) {
    std::ostringstream os;
    os << "run " << (r.label.empty() ? "-" : r.label) << ": " << r.dofs << " DOF, n_t = " << r.n_t << ", divisions "
       << r.divisions[0] << "x" << r.divisions[1] << "x" << r.divisions[2] << '\n';
    os << std::setprecision(4);
    for (const auto& m : r.methods) {
        os << "  " << std::left << std::setw(9) << m.method << std::right << " time " << std::setw(10) << m.total_seconds
           << " s";
        if (!m.errors.empty())
            os << "  error(m=" << m.errors.back().modes << ") " << std::scientific << m.errors.back().error
               << std::defaultfloat;
        if (!m.iterations.empty()) os << "  iterations " << m.total_iterations();
        if (!m.stop_reason.empty()) os << "  [" << m.stop_reason << "]";
        os << '\n';
    }
    return os.str();
}

// ---- orchestration -------------------------------------------------------

/// Large intermediate results kept for export; not part of the report.
struct Artifacts {
    std::optional<Trajectory> fom;
    std::optional<RitzBasis> ritz;
    std::map<std::string, SeparatedApprox> separated; ///< full-space modes per PGD method
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

inline std::string sign_label(const pgd::PgdConfig& c) {
    if (!c.aitken) return "off";
    return c.aitken_sign == pgd::AitkenSign::Classical ? "classical" : "printed";
}

inline void add_symplectic_checks(MethodReport& rep, const SeparatedApprox& s) {
    rep.symplectic["defect_raw"] = symplectic_defect(s.Sq, s.Sp);
    for (auto method : {BiorthMethod::LU, BiorthMethod::SVD}) {
        const std::string tag(method_name(method));
        try {
            const auto f = biorthogonalize(s.Sq, s.Sp, method);
            const auto rc = recombine(s.Sq, s.Sp, s.Psi_q, s.Psi_p, f);
            rep.symplectic["defect_" + tag] = symplectic_defect(rc.Sq, rc.Sp);
            const Matrix z0 = s.Sq * s.Psi_q.transpose(), z1 = rc.Sq * rc.Psi_q.transpose();
            const Matrix p0 = s.Sp * s.Psi_p.transpose(), p1 = rc.Sp * rc.Psi_p.transpose();
            const double ref = std::sqrt(z0.squaredNorm() + p0.squaredNorm());
            rep.symplectic["reconstruction_" + tag] =
                ref > 0.0 ? std::sqrt((z0 - z1).squaredNorm() + (p0 - p1).squaredNorm()) / ref : 0.0;
        } catch (const SolverError&) {
            rep.symplectic["defect_" + tag] = std::numeric_limits<double>::infinity();
        }
    }
}

} // namespace detail

struct PgdRunOutput {
    MethodReport report;
    SeparatedApprox separated;
};

/// Runs one PGD variant on a backend, timing the greedy loop stage by stage.
/// Error evaluation happens in the enrichment callback and is excluded from
/// every timing.
template <pgd::SpaceBackend Space>
PgdRunOutput run_pgd(const std::string& method, Space& space, const Benchmark& b, const pgd::PgdConfig& pc,
                     const EnergyErrorEvaluator* errors, double preprocessing_seconds) {
    PgdRunOutput out;
    out.report.method = method;
    double callback_seconds = 0.0;
    const auto cb = [&](const pgd::SeparatedSolution& sol, const pgd::EnrichmentRecord& rec) {
        const auto t0 = detail::Clock::now();
        if (errors) {
            const double e = errors->relative_error(sol.lifted_q(space), sol.lifted_p(space), sol.Psi_q, sol.Psi_p);
            out.report.errors.push_back({rec.mode, e});
        }
        callback_seconds += detail::since(t0);
    };
    const auto t0 = detail::Clock::now();
    const pgd::PgdResult res = pgd::greedy_solve(space, b.load, b.grid, pc, cb);
    const double loop_seconds = detail::since(t0) - callback_seconds;

    double fp = 0.0, orth = 0.0, upd = 0.0;
    for (const auto& r : res.log) {
        fp += r.seconds_fixed_point;
        orth += r.seconds_orthonormalization;
        upd += r.seconds_update;
        out.report.iterations.push_back({r.mode, r.iterations, r.converged, detail::sign_label(pc)});
        out.report.orthonormality_defect = std::max(out.report.orthonormality_defect, r.orthonormality_defect);
    }
    out.report.timings = {{"preprocessing", preprocessing_seconds},
                          {"fixed_point", fp},
                          {"orthonormalization", orth},
                          {"update", upd}};
    out.report.total_seconds = preprocessing_seconds + loop_seconds;
    out.report.stop_reason = res.stop_reason;
    const auto& sol = res.solution;
    out.separated = SeparatedApprox{sol.lifted_q(space), sol.lifted_p(space), sol.Psi_q, sol.Psi_p};
    return out;
}

inline pgd::PgdConfig pgd_config(const ExperimentConfig& cfg, pgd::AitkenSign sign) {
    pgd::PgdConfig pc;
    pc.max_modes = cfg.solver.m_max;
    pc.eps = cfg.solver.eps;
    pc.k_max = cfg.solver.k_max;
    pc.aitken = cfg.solver.aitken;
    pc.aitken_sign = sign;
    pc.temporal_update = cfg.solver.temporal_update;
    return pc;
}

/// With `aitken_sign: auto` both conventions are run. The one with more
/// converged enrichments is kept, ties going to fewer total iterations.
template <class Runner>
PgdRunOutput run_with_sign_policy(const ExperimentConfig& cfg, Runner&& run) {
    if (!cfg.solver.aitken || cfg.solver.aitken_sign != "auto") return run(pgd_config(cfg, cfg.sign()));
    PgdRunOutput a = run(pgd_config(cfg, pgd::AitkenSign::AsPrinted));
    PgdRunOutput c = run(pgd_config(cfg, pgd::AitkenSign::Classical));
    const auto converged = [](const MethodReport& m) {
        return std::count_if(m.iterations.begin(), m.iterations.end(), [](const IterationRow& r) { return r.converged; });
    };
    const bool pick_c = converged(c.report) != converged(a.report)
                            ? converged(c.report) > converged(a.report)
                            : c.report.total_iterations() <= a.report.total_iterations();
    return pick_c ? std::move(c) : std::move(a);
}

/// Runs the configured methods on an assembled benchmark. Every error is
/// measured against the Crank-Nicolson full-order trajectory.
inline RunReport run_experiment(const ExperimentConfig& cfg, const Benchmark& b, Artifacts* artifacts = nullptr) {
    cfg.validate();
    const auto t_run = detail::Clock::now();
    RunReport rep;
    rep.config_yaml = dump_config(cfg);
    rep.dofs = b.dofs();
    rep.n_t = b.grid.intervals;
    rep.T = b.grid.T;
    rep.divisions = cfg.geometry.divisions;
    rep.assembly_seconds = b.assembly_seconds;
    rep.environment = environment_stamp();
    const int reps = cfg.outputs.warmup_runs + 1;
    const auto stage = [](const std::string& what, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw SolverError(what + ": " + e.what());
        }
    };

    const bool need_fom = cfg.wants("fom") || cfg.wants("svd") || cfg.solver.compute_errors;
    std::optional<Trajectory> fom;
    if (need_fom) {
        MethodReport m;
        m.method = "fom";
        const Vector zero = Vector::Zero(b.dofs());
        for (int k = 0; k < reps; ++k) {
            fom.reset();
            const auto t0 = detail::Clock::now();
            fom.emplace(stage("fom", [&] { return solve_fom(b.ops.K, b.ops.M, b.load, b.grid, zero, zero); }));
            m.total_seconds = detail::since(t0);
        }
        m.timings = {{"solve", m.total_seconds}};
        if (cfg.wants("fom")) rep.methods.push_back(m);
    }

    std::optional<SpdFactorization> Mfac;
    std::optional<EnergyErrorEvaluator> eval;
    if (cfg.solver.compute_errors && fom) {
        Mfac.emplace(b.ops.M, "mass matrix M");
        eval.emplace(*fom, b.ops.K, *Mfac, TimeOperators(b.grid));
        if (!(eval->reference_norm() > 0.0)) throw SolverError("errors: full-order reference has zero energy norm");
    }
    const Index m_max = cfg.solver.m_max;

    if (cfg.wants("svd")) {
        MethodReport m;
        m.method = "svd";
        std::optional<SnapshotSvd> svd;
        for (int k = 0; k < reps; ++k) {
            svd.reset();
            const auto t0 = detail::Clock::now();
            svd.emplace(stage("svd", [&] { return SnapshotSvd(*fom); }));
            m.total_seconds = detail::since(t0);
        }
        m.timings = {{"svd", m.total_seconds}};
        if (eval)
            for (Index k = 1; k <= std::min(m_max, svd->max_rank()); ++k) {
                const auto a = svd->truncate(k);
                m.errors.push_back({k, eval->relative_error(a.Sq, a.Sp, a.Psi_q, a.Psi_p)});
            }
        rep.methods.push_back(m);
    }

    std::optional<RitzBasis> ritz;
    double ritz_seconds = 0.0;
    if (cfg.wants("pgd-ritz") || cfg.wants("modal")) {
        LanczosOptions lo;
        lo.tol = cfg.solver.ritz_tol;
        lo.seed = cfg.seed;
        for (int k = 0; k < reps; ++k) {
            ritz.reset();
            const auto t0 = detail::Clock::now();
            ritz.emplace(stage("ritz", [&] { return compute_ritz_pairs(b.ops.K, b.ops.M, cfg.solver.r, lo); }));
            ritz_seconds = detail::since(t0);
        }
    }

    if (cfg.wants("modal")) {
        MethodReport m;
        m.method = "modal";
        std::optional<SeparatedApprox> md;
        for (int k = 0; k < reps; ++k) {
            md.reset();
            const auto t0 = detail::Clock::now();
            md.emplace(stage("modal", [&] { return modal_separated(*ritz, b.ops.M, b.load, b.grid); }));
            m.total_seconds = ritz_seconds + detail::since(t0);
        }
        m.timings = {{"preprocessing", ritz_seconds}, {"integration", m.total_seconds - ritz_seconds}};
        if (eval) {
            const Index r = ritz->size();
            const auto at = [&](Index k) {
                return eval->relative_error(md->Sq.leftCols(k), md->Sp.leftCols(k), md->Psi_q.leftCols(k),
                                            md->Psi_p.leftCols(k));
            };
            for (Index k = 1; k <= std::min(m_max, r); ++k) m.errors.push_back({k, at(k)});
            if (m_max < r) m.errors.push_back({r, at(r)});
        }
        rep.methods.push_back(m);
    }

    if (cfg.wants("pgd-lu")) {
        PgdRunOutput out;
        for (int k = 0; k < reps; ++k) {
            out = stage("pgd-lu", [&] {
                return run_with_sign_policy(cfg, [&](const pgd::PgdConfig& pc) {
                    const auto t0 = detail::Clock::now();
                    pgd::FullSpace space(b.ops.K, b.ops.M, b.load);
                    const double pre = detail::since(t0);
                    return run_pgd("pgd-lu", space, b, pc, eval ? &*eval : nullptr, pre);
                });
            });
        }
        detail::add_symplectic_checks(out.report, out.separated);
        rep.methods.push_back(out.report);
        if (artifacts) artifacts->separated["pgd-lu"] = std::move(out.separated);
    }

    if (cfg.wants("pgd-ritz")) {
        PgdRunOutput out;
        for (int k = 0; k < reps; ++k) {
            out = stage("pgd-ritz", [&] {
                return run_with_sign_policy(cfg, [&](const pgd::PgdConfig& pc) {
                    const auto t0 = detail::Clock::now();
                    pgd::RitzSpace space(*ritz, b.ops.M, b.load);
                    const double pre = ritz_seconds + detail::since(t0);
                    return run_pgd("pgd-ritz", space, b, pc, eval ? &*eval : nullptr, pre);
                });
            });
        }
        detail::add_symplectic_checks(out.report, out.separated);
        rep.methods.push_back(out.report);
        if (artifacts) artifacts->separated["pgd-ritz"] = std::move(out.separated);
    }

    if (artifacts) {
        artifacts->fom = std::move(fom);
        artifacts->ritz = std::move(ritz);
    }
    rep.total_seconds = detail::since(t_run);
    return rep;
}

/// Writes the report and the requested artifacts into `dir`.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const Benchmark& b,
                          const RunReport& rep, const Artifacts& art) {
    std::filesystem::create_directories(dir);
    save_config(dir / "config.yaml", cfg);
    if (cfg.wants_format("csv")) write_report_csvs(dir, rep);
    if (cfg.wants_format("json")) write_report_json(dir / "report.json", rep);
    if (cfg.wants_format("mtx")) {
        io::write_matrix_market(dir / "K.mtx", b.ops.K);
        io::write_matrix_market(dir / "M.mtx", b.ops.M);
    }
    if (cfg.wants_format("binary")) {
        if (art.fom) io::write_trajectory(dir / "fom.traj", *art.fom);
        if (art.ritz) io::write_ritz_basis(dir / "ritz.basis", *art.ritz);
    }
    for (const auto& [method, s] : art.separated) {
        if (cfg.wants_format("csv")) io::write_temporal_modes_csv(dir / ("temporal_modes_" + method + ".csv"), b.grid, s.Psi_q, s.Psi_p);
        if (cfg.wants_format("vtk")) {
            std::vector<std::pair<std::string, Vector>> fields;
            const Index k = std::min(cfg.outputs.vtk_modes, s.modes());
            for (Index j = 0; j < k; ++j) {
                fields.emplace_back("phi_q_" + std::to_string(j + 1), s.Sq.col(j));
                fields.emplace_back("phi_p_" + std::to_string(j + 1), s.Sp.col(j));
            }
            io::write_vtk(dir / ("modes_" + method + ".vtk"), b.mesh, fields);
        }
    }
    if (cfg.wants_format("vtk") && art.separated.empty()) io::write_vtk(dir / "mesh.vtk", b.mesh);
}

// ---- comparison ----------------------------------------------------------

struct ComparisonEntry {
    std::string label; ///< report label / method
    double seconds = 0.0;
    Index modes = 0;
    double error = std::numeric_limits<double>::quiet_NaN();
};

/// gain(i, j) = seconds_i / seconds_j over all (report, method) entries.
struct Comparison {
    std::vector<ComparisonEntry> entries;
    Matrix gain;

    std::string csv() const {
        std::ostringstream os;
        detail::schema_line(os, "compare");
        os << "entry_i,entry_j,seconds_i,seconds_j,gain_i_over_j,modes_j,error_j\n";
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (std::size_t j = 0; j < entries.size(); ++j)
                os << entries[i].label << ',' << entries[j].label << ',' << detail::num(entries[i].seconds) << ','
                   << detail::num(entries[j].seconds) << ','
                   << detail::num(gain(static_cast<Index>(i), static_cast<Index>(j))) << ',' << entries[j].modes << ','
                   << detail::num(entries[j].error) << '\n';
        return os.str();
    }

    std::string table() const {
        std::ostringstream os;
        std::size_t w = 8;
        for (const auto& e : entries) w = std::max(w, e.label.size() + 1);
        os << std::left << std::setw(static_cast<int>(w)) << "" << std::right;
        for (const auto& e : entries) os << std::setw(static_cast<int>(w)) << e.label;
        os << '\n' << std::fixed << std::setprecision(3);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            os << std::left << std::setw(static_cast<int>(w)) << entries[i].label << std::right;
            for (std::size_t j = 0; j < entries.size(); ++j)
                os << std::setw(static_cast<int>(w)) << gain(static_cast<Index>(i), static_cast<Index>(j));
            os << '\n';
        }
        os << std::defaultfloat << std::setprecision(4) << "\nentry seconds modes error\n";
        for (const auto& e : entries)
            os << e.label << ' ' << e.seconds << ' ' << e.modes << ' ' << (std::isnan(e.error) ? std::string("-") : detail::num(e.error)) << '\n';
        return os.str();
    }
};

/// Refuses reports on different discretizations, listing what differs.
inline Comparison compare_runs(const std::vector<RunReport>& reports) {
    if (reports.size() < 2) throw InvalidArgument("compare: at least two reports are required");
    const auto& ref = reports.front();
    for (std::size_t k = 1; k < reports.size(); ++k) {
        const auto& r = reports[k];
        std::ostringstream diff;
        if (r.dofs != ref.dofs) diff << " dofs " << ref.dofs << " vs " << r.dofs << ";";
        if (r.n_t != ref.n_t) diff << " n_t " << ref.n_t << " vs " << r.n_t << ";";
        if (r.T != ref.T) diff << " T " << ref.T << " vs " << r.T << ";";
        if (r.divisions != ref.divisions) diff << " divisions differ;";
        if (!diff.str().empty())
            throw InvalidArgument("compare: reports '" + ref.label + "' and '" + r.label +
                                  "' use different discretizations:" + diff.str());
    }
    Comparison c;
    for (std::size_t k = 0; k < reports.size(); ++k)
        for (const auto& m : reports[k].methods) {
            ComparisonEntry e;
            e.label = (reports[k].label.empty() ? "run" + std::to_string(k) : reports[k].label) + "/" + m.method;
            e.seconds = m.total_seconds;
            if (!m.errors.empty()) {
                e.modes = m.errors.back().modes;
                e.error = m.errors.back().error;
            }
            c.entries.push_back(e);
        }
    const Index n = static_cast<Index>(c.entries.size());
    c.gain.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            c.gain(i, j) = c.entries[static_cast<std::size_t>(i)].seconds / c.entries[static_cast<std::size_t>(j)].seconds;
    return c;
}

} // namespace pgdham::harness

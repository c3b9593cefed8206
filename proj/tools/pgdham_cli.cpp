// SPDX-License-Identifier: Apache-2.0
// Command line front end for the beam benchmark.

#include "pgdham/harness/experiment.hpp"
#include "pgdham/pgdham.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace fs = std::filesystem;
using namespace pgdham;
using harness::ExperimentConfig;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? harness::parse_config("") : harness::load_config(c.config);
    if (!c.out.empty()) cfg.outputs.directory = c.out;
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

int run(ExperimentConfig cfg) {
    cfg.validate();
    const auto b = harness::build_benchmark(cfg);
    std::cout << "assembled " << b.dofs() << " DOF (" << b.mesh.num_tets() << " tets) in " << b.assembly_seconds
              << " s\n";
    harness::Artifacts art;
    const auto rep = harness::run_experiment(cfg, b, &art);
    harness::write_outputs(cfg.outputs.directory, cfg, b, rep, art);
    std::cout << harness::summarize(rep) << "outputs in " << cfg.outputs.directory << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Space-time PGD reduced-order solver for linear elastodynamics"};
    app.require_subcommand(1);
    Common common;
    std::uint64_t seed = 0;
    app.add_option("-c,--config", common.config, "YAML experiment config (defaults if omitted)")->check(CLI::ExistingFile);
    app.add_option("-o,--out", common.out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed for the Lanczos start vector");

    auto* assemble = app.add_subcommand("assemble", "export K, M (Matrix Market) and the tagged mesh (VTK)");

    auto* fom = app.add_subcommand("fom", "full-order Crank-Nicolson run");

    auto* pgd_cmd = app.add_subcommand("pgd", "PGD run (errors against the full-order solution)");
    std::string variant = "ritz";
    Index modes = -1, ritz_r = -1;
    std::string aitken, aitken_sign;
    pgd_cmd->add_option("--variant", variant, "lu or ritz")->check(CLI::IsMember({"lu", "ritz"}));
    pgd_cmd->add_option("--modes", modes, "number of enrichments");
    pgd_cmd->add_option("--ritz", ritz_r, "Ritz subspace size r");
    pgd_cmd->add_option("--aitken", aitken, "on or off")->check(CLI::IsMember({"on", "off"}));
    pgd_cmd->add_option("--aitken-sign", aitken_sign, "printed, classical or auto")
        ->check(CLI::IsMember({"printed", "classical", "auto"}));

    auto* baseline = app.add_subcommand("baseline", "SVD or modal decomposition baseline");
    bool svd = false, modal = false;
    baseline->add_flag("--svd", svd, "truncated SVD of the full-order snapshots");
    baseline->add_flag("--modal", modal, "modal decomposition on the Ritz basis");

    auto* run_cmd = app.add_subcommand("run", "run every method listed in the config");

    auto* report = app.add_subcommand("report", "summarize a report.json and regenerate its CSVs");
    std::string report_path, csv_dir;
    report->add_option("report", report_path, "report.json")->required()->check(CLI::ExistingFile);
    report->add_option("--csv-dir", csv_dir, "write errors/iterations/timings/table1 CSVs here");

    auto* compare = app.add_subcommand("compare", "gain ratios between runs on the same discretization");
    std::vector<std::string> compare_paths;
    compare->add_option("reports", compare_paths, "report.json files")->required()->expected(2, -1);

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) common.seed = seed;

    try {
        if (*assemble) {
            auto cfg = load(common);
            const auto b = harness::build_benchmark(cfg);
            const fs::path dir = cfg.outputs.directory;
            io::write_matrix_market(dir / "K.mtx", b.ops.K);
            io::write_matrix_market(dir / "M.mtx", b.ops.M);
            io::write_vtk(dir / "mesh.vtk", b.mesh, {{"load", b.load.terms.front().spatial}});
            std::cout << b.dofs() << " DOF, " << b.mesh.num_tets() << " tets, " << b.mesh.facets.size()
                      << " boundary facets written to " << dir << '\n';
            return 0;
        }
        if (*fom) {
            auto cfg = load(common);
            cfg.solver.variant = {"fom"};
            cfg.solver.compute_errors = false;
            cfg.outputs.formats.push_back("binary");
            return run(cfg);
        }
        if (*pgd_cmd) {
            auto cfg = load(common);
            cfg.solver.variant = {variant == "lu" ? "pgd-lu" : "pgd-ritz"};
            if (modes >= 0) cfg.solver.m_max = modes;
            if (ritz_r > 0) cfg.solver.r = ritz_r;
            if (!aitken.empty()) cfg.solver.aitken = aitken == "on";
            if (!aitken_sign.empty()) cfg.solver.aitken_sign = aitken_sign;
            return run(cfg);
        }
        if (*baseline) {
            if (svd == modal) throw InvalidArgument("baseline: pass exactly one of --svd or --modal");
            auto cfg = load(common);
            cfg.solver.variant = {svd ? "svd" : "modal"};
            return run(cfg);
        }
        if (*run_cmd) return run(load(common));
        if (*report) {
            const auto rep = harness::read_report(report_path);
            std::cout << harness::summarize(rep);
            if (!csv_dir.empty()) harness::write_report_csvs(csv_dir, rep);
            return 0;
        }
        if (*compare) {
            std::vector<harness::RunReport> reps;
            for (const auto& p : compare_paths) reps.push_back(harness::read_report(p));
            const auto c = harness::compare_runs(reps);
            std::cout << c.table();
            if (!common.out.empty()) {
                fs::create_directories(common.out);
                std::ofstream(fs::path(common.out) / "compare.csv") << c.csv();
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

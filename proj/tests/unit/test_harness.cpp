// SPDX-License-Identifier: Apache-2.0
#include "pgdham/harness/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace pgdham;
using namespace pgdham::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.geometry.divisions = {6, 1, 1};
    c.time.n_t = 120;
    c.solver.m_max = 3;
    c.solver.r = 20;
    return c;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pgdham_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST(Config, DefaultsMatchBenchmark) {
    const auto c = parse_config("");
    EXPECT_EQ(c.geometry.lengths, (std::array<double, 3>{6, 1, 1}));
    EXPECT_EQ(c.material.E, 220e9);
    EXPECT_EQ(c.material.nu, 0.3);
    EXPECT_EQ(c.material.rho, 7000.0);
    EXPECT_EQ(c.load.F, 0.5e9);
    EXPECT_EQ(c.time.T, 5.0);
    EXPECT_EQ(c.solver.eps, 1e-9);
    EXPECT_EQ(c.solver.k_max, 35);
    EXPECT_EQ(c.solver.m_max, 20);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, InvalidLoadWindowNamesFields) {
    try {
        parse_config("load:\n  t1: 0.8\n  t2: 0.7\n").validate();
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("t2"), std::string::npos);
    }
}

TEST(Config, UnknownMethodRejected) {
    EXPECT_THROW(parse_config("solver:\n  variant: [fom, magic]\n").validate(), InvalidArgument);
}

TEST(Config, RoundTripIsLossless) {
    auto c = tiny_config();
    c.material.E = 1.2345678901234567e11;
    c.solver.variant = {"fom", "pgd-lu", "svd"};
    c.solver.aitken_sign = "auto";
    c.outputs.formats = {"csv", "binary"};
    c.seed = 42;
    EXPECT_EQ(parse_config(dump_config(c)), c);
    const fs::path dir = scratch("roundtrip");
    save_config(dir / "c.yaml", c);
    EXPECT_EQ(load_config(dir / "c.yaml"), c);
}

TEST(Config, ScalarVariantAccepted) {
    const auto c = parse_config("solver:\n  variant: pgd-lu\n");
    EXPECT_EQ(c.solver.variant, std::vector<std::string>{"pgd-lu"});
}

TEST(Experiment, FomOnlyWritesSchemaVersionedCsvs) {
    auto c = tiny_config();
    c.solver.variant = {"fom"};
    c.solver.compute_errors = false;
    c.outputs.formats = {"csv", "json"};
    const auto b = build_benchmark(c);
    Artifacts art;
    const auto rep = run_experiment(c, b, &art);
    ASSERT_NE(rep.find("fom"), nullptr);
    EXPECT_EQ(rep.find("pgd-ritz"), nullptr);
    EXPECT_TRUE(art.fom.has_value());
    const fs::path dir = scratch("fomonly");
    write_outputs(dir, c, b, rep, art);
    for (const char* f : {"errors.csv", "iterations.csv", "timings.csv", "table1.csv", "report.json", "config.yaml"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(slurp(dir / "timings.csv").rfind("# pgdham-timings v1", 0), 0u);
    const auto back = read_report(dir / "report.json");
    EXPECT_EQ(back.dofs, rep.dofs);
    EXPECT_EQ(back.methods.size(), rep.methods.size());
}

TEST(Experiment, TimingStagesSumToTotal) {
    auto c = tiny_config();
    c.solver.variant = {"pgd-lu", "pgd-ritz"};
    const auto rep = run_experiment(c, build_benchmark(c));
    for (const char* m : {"pgd-lu", "pgd-ritz"}) {
        const auto* r = rep.find(m);
        ASSERT_NE(r, nullptr) << m;
        EXPECT_NEAR(r->stage_sum(), r->total_seconds, 0.05 * r->total_seconds + 1e-3) << m;
        EXPECT_EQ(r->errors.size(), 3u) << m;
    }
}

TEST(Experiment, DeterministicOutputs) {
    auto c = tiny_config();
    c.solver.variant = {"pgd-ritz", "modal"};
    c.outputs.formats = {"csv"};
    const auto b = build_benchmark(c);
    const fs::path d1 = scratch("det1"), d2 = scratch("det2");
    for (const auto& d : {d1, d2}) {
        Artifacts art;
        const auto rep = run_experiment(c, b, &art);
        write_outputs(d, c, b, rep, art);
    }
    for (const char* f : {"errors.csv", "iterations.csv", "temporal_modes_pgd-ritz.csv"})
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
}

TEST(Compare, SelfComparisonHasUnitGain) {
    auto c = tiny_config();
    c.solver.variant = {"pgd-lu"};
    const auto rep = run_experiment(c, build_benchmark(c));
    const auto cmp = compare_runs({rep, rep});
    for (Index i = 0; i < cmp.gain.rows(); ++i) EXPECT_DOUBLE_EQ(cmp.gain(i, i), 1.0);
    const Index k = cmp.gain.rows() / 2;
    EXPECT_DOUBLE_EQ(cmp.gain(0, k), 1.0);
}

TEST(Compare, MismatchedDiscretizationsRefused) {
    RunReport a, b;
    a.dofs = 10;
    b.dofs = 20;
    a.n_t = b.n_t = 5;
    try {
        compare_runs({a, b});
        FAIL() << "expected InvalidArgument";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("dofs"), std::string::npos);
    }
}

TEST(Cli, SmokeRunReportCompare) {
    const char* cli = std::getenv("PGDHAM_CLI");
    if (!cli) GTEST_SKIP() << "PGDHAM_CLI not set";
    const fs::path dir = scratch("cli");
    auto c = tiny_config();
    c.solver.variant = {"fom", "pgd-ritz"};
    c.outputs.formats = {"csv", "json"};
    save_config(dir / "c.yaml", c);
    const std::string base = std::string(cli) + " --config " + (dir / "c.yaml").string();
    EXPECT_EQ(std::system((base + " --out " + (dir / "a").string() + " run > /dev/null").c_str()), 0);
    EXPECT_EQ(std::system((base + " --out " + (dir / "b").string() + " pgd --variant lu --modes 2 > /dev/null").c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "a" / "report.json"));
    EXPECT_EQ(std::system((std::string(cli) + " report " + (dir / "a" / "report.json").string() + " > /dev/null").c_str()), 0);
    EXPECT_EQ(std::system((std::string(cli) + " --out " + (dir / "cmp").string() + " compare " +
                           (dir / "a" / "report.json").string() + " " + (dir / "b" / "report.json").string() +
                           " > /dev/null").c_str()),
              0);
    EXPECT_TRUE(fs::exists(dir / "cmp" / "compare.csv"));
    EXPECT_NE(std::system((std::string(cli) + " pgd --variant bogus > /dev/null 2>&1").c_str()), 0);
}

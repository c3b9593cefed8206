// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/mesh.hpp"
#include "pgdham/pgd/steps.hpp"

#include <yaml-cpp/yaml.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace pgdham::harness {

/// Method names accepted in `solver.variant`.
inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m{"fom", "pgd-lu", "pgd-ritz", "svd", "modal"};
    return m;
}

struct ExperimentConfig {
    struct Geometry {
        std::array<double, 3> lengths{6.0, 1.0, 1.0};
        std::array<int, 3> divisions{24, 4, 4};
        bool operator==(const Geometry&) const = default;
    } geometry;

    Material material{};

    struct Load {
        double F = 0.5e9;
        double t1 = 0.625;
        double t2 = 0.75;
        bool operator==(const Load&) const = default;
    } load;

    struct Time {
        double T = 5.0;
        Index n_t = 4800;
        bool operator==(const Time&) const = default;
    } time;

    struct Solver {
        std::vector<std::string> variant{"pgd-ritz"};
        Index m_max = 20;
        Index r = 300;
        double eps = 1e-9;
        int k_max = 35;
        bool aitken = true;
        std::string aitken_sign = "classical"; ///< classical | printed | auto
        bool temporal_update = true;
        double ritz_tol = 1e-8;
        bool compute_errors = true;
        bool operator==(const Solver&) const = default;
    } solver;

    struct Outputs {
        std::string directory = "out";
        std::vector<std::string> formats{"csv", "json", "vtk"};
        Index vtk_modes = 4;   ///< spatial modes exported per method
        int warmup_runs = 0;   ///< untimed repetitions before the measured run
        bool operator==(const Outputs&) const = default;
    } outputs;

    std::uint64_t seed = 20240607;

    bool operator==(const ExperimentConfig& o) const {
        return geometry == o.geometry && material.E == o.material.E && material.nu == o.material.nu &&
               material.rho == o.material.rho && load == o.load && time == o.time && solver == o.solver &&
               outputs == o.outputs && seed == o.seed;
    }

    bool wants(const std::string& method) const {
        for (const auto& v : solver.variant)
            if (v == method) return true;
        return false;
    }
    bool wants_format(const std::string& f) const {
        for (const auto& v : outputs.formats)
            if (v == f) return true;
        return false;
    }

    pgd::AitkenSign sign() const {
        return solver.aitken_sign == "classical" ? pgd::AitkenSign::Classical : pgd::AitkenSign::AsPrinted;
    }

    /// Throws InvalidArgument naming the offending field.
    void validate() const {
        using detail::require;
        for (int i = 0; i < 3; ++i) {
            require(geometry.lengths[static_cast<std::size_t>(i)] > 0.0, "geometry.lengths: all entries must be > 0");
            require(geometry.divisions[static_cast<std::size_t>(i)] >= 1, "geometry.divisions: all entries must be >= 1");
        }
        require(material.E > 0.0, "material.E: must be > 0");
        require(material.nu > 0.0 && material.nu < 0.5, "material.nu: must satisfy 0 < nu < 0.5");
        require(material.rho > 0.0, "material.rho: must be > 0");
        require(load.F > 0.0, "load.F: must be > 0");
        require(load.t1 > 0.0, "load.t1: must be > 0");
        require(load.t1 < load.t2, "load.t1/load.t2: must satisfy t1 < t2");
        require(load.t2 <= time.T, "load.t2/time.T: must satisfy t2 <= T");
        require(time.T > 0.0, "time.T: must be > 0");
        require(time.n_t >= 1, "time.n_t: must be >= 1");
        require(!solver.variant.empty(), "solver.variant: at least one method is required");
        for (const auto& v : solver.variant) {
            bool ok = false;
            for (const auto& k : known_methods()) ok = ok || k == v;
            require(ok, "solver.variant: unknown method '" + v + "' (fom, pgd-lu, pgd-ritz, svd, modal)");
        }
        require(solver.m_max >= 0, "solver.m_max: must be >= 0");
        require(solver.r >= 1, "solver.r: must be >= 1");
        require(solver.eps > 0.0, "solver.eps: must be > 0");
        require(solver.k_max >= 1, "solver.k_max: must be >= 1");
        require(solver.aitken_sign == "printed" || solver.aitken_sign == "classical" || solver.aitken_sign == "auto",
                "solver.aitken_sign: must be printed, classical or auto");
        require(solver.ritz_tol > 0.0, "solver.ritz_tol: must be > 0");
        if (wants("pgd-ritz")) require(solver.m_max <= solver.r, "solver.m_max: must be <= solver.r for pgd-ritz");
        require(outputs.vtk_modes >= 0, "outputs.vtk_modes: must be >= 0");
        require(outputs.warmup_runs >= 0, "outputs.warmup_runs: must be >= 0");
        static const std::set<std::string> formats{"csv", "json", "vtk", "binary", "mtx"};
        for (const auto& f : outputs.formats)
            require(formats.count(f) == 1, "outputs.formats: unknown format '" + f + "' (csv, json, vtk, binary, mtx)");
    }
};

namespace detail {

template <class T>
void read_field(const YAML::Node& node, const char* section, const char* key, T& out) {
    if (!node || !node[key]) return;
    try {
        out = node[key].template as<T>();
    } catch (const YAML::Exception&) {
        throw InvalidArgument(std::string(section) + "." + key + ": cannot parse value");
    }
}

inline std::vector<std::string> read_string_list(const YAML::Node& n, const std::string& field) {
    try {
        if (n.IsScalar()) return {n.as<std::string>()};
        return n.as<std::vector<std::string>>();
    } catch (const YAML::Exception&) {
        throw InvalidArgument(field + ": expected a string or a list of strings");
    }
}

} // namespace detail

/// Parses YAML text; missing fields keep their defaults.
inline ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw InvalidArgument(std::string("config: YAML syntax error: ") + e.what());
    }
    ExperimentConfig c;
    if (!root || root.IsNull()) {
        c.validate();
        return c;
    }
    if (!root.IsMap()) throw InvalidArgument("config: top level must be a mapping");
    using detail::read_field;
    if (auto g = root["geometry"]) {
        std::vector<double> l;
        std::vector<int> d;
        read_field(g, "geometry", "lengths", l);
        read_field(g, "geometry", "divisions", d);
        if (!l.empty()) {
            if (l.size() != 3) throw InvalidArgument("geometry.lengths: expected 3 values");
            c.geometry.lengths = {l[0], l[1], l[2]};
        }
        if (!d.empty()) {
            if (d.size() != 3) throw InvalidArgument("geometry.divisions: expected 3 values");
            c.geometry.divisions = {d[0], d[1], d[2]};
        }
    }
    if (auto m = root["material"]) {
        read_field(m, "material", "E", c.material.E);
        read_field(m, "material", "nu", c.material.nu);
        read_field(m, "material", "rho", c.material.rho);
    }
    if (auto l = root["load"]) {
        read_field(l, "load", "F", c.load.F);
        read_field(l, "load", "t1", c.load.t1);
        read_field(l, "load", "t2", c.load.t2);
    }
    if (auto t = root["time"]) {
        read_field(t, "time", "T", c.time.T);
        read_field(t, "time", "n_t", c.time.n_t);
    }
    if (auto s = root["solver"]) {
        if (s["variant"]) c.solver.variant = detail::read_string_list(s["variant"], "solver.variant");
        read_field(s, "solver", "m_max", c.solver.m_max);
        read_field(s, "solver", "r", c.solver.r);
        read_field(s, "solver", "eps", c.solver.eps);
        read_field(s, "solver", "k_max", c.solver.k_max);
        read_field(s, "solver", "aitken", c.solver.aitken);
        read_field(s, "solver", "aitken_sign", c.solver.aitken_sign);
        read_field(s, "solver", "temporal_update", c.solver.temporal_update);
        read_field(s, "solver", "ritz_tol", c.solver.ritz_tol);
        read_field(s, "solver", "compute_errors", c.solver.compute_errors);
    }
    if (auto o = root["outputs"]) {
        read_field(o, "outputs", "directory", c.outputs.directory);
        if (o["formats"]) c.outputs.formats = detail::read_string_list(o["formats"], "outputs.formats");
        read_field(o, "outputs", "vtk_modes", c.outputs.vtk_modes);
        read_field(o, "outputs", "warmup_runs", c.outputs.warmup_runs);
    }
    detail::read_field(root, "config", "seed", c.seed);
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("config: cannot read " + path.string());
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

inline std::string dump_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lengths" << YAML::Value << YAML::Flow
        << std::vector<double>(c.geometry.lengths.begin(), c.geometry.lengths.end());
    out << YAML::Key << "divisions" << YAML::Value << YAML::Flow
        << std::vector<int>(c.geometry.divisions.begin(), c.geometry.divisions.end());
    out << YAML::EndMap;
    out << YAML::Key << "material" << YAML::Value << YAML::BeginMap << YAML::Key << "E" << YAML::Value << c.material.E
        << YAML::Key << "nu" << YAML::Value << c.material.nu << YAML::Key << "rho" << YAML::Value << c.material.rho
        << YAML::EndMap;
    out << YAML::Key << "load" << YAML::Value << YAML::BeginMap << YAML::Key << "F" << YAML::Value << c.load.F
        << YAML::Key << "t1" << YAML::Value << c.load.t1 << YAML::Key << "t2" << YAML::Value << c.load.t2
        << YAML::EndMap;
    out << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "T" << YAML::Value << c.time.T
        << YAML::Key << "n_t" << YAML::Value << c.time.n_t << YAML::EndMap;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "variant" << YAML::Value << YAML::Flow << c.solver.variant;
    out << YAML::Key << "m_max" << YAML::Value << c.solver.m_max;
    out << YAML::Key << "r" << YAML::Value << c.solver.r;
    out << YAML::Key << "eps" << YAML::Value << c.solver.eps;
    out << YAML::Key << "k_max" << YAML::Value << c.solver.k_max;
    out << YAML::Key << "aitken" << YAML::Value << c.solver.aitken;
    out << YAML::Key << "aitken_sign" << YAML::Value << c.solver.aitken_sign;
    out << YAML::Key << "temporal_update" << YAML::Value << c.solver.temporal_update;
    out << YAML::Key << "ritz_tol" << YAML::Value << c.solver.ritz_tol;
    out << YAML::Key << "compute_errors" << YAML::Value << c.solver.compute_errors;
    out << YAML::EndMap;
    out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "directory" << YAML::Value << c.outputs.directory;
    out << YAML::Key << "formats" << YAML::Value << YAML::Flow << c.outputs.formats;
    out << YAML::Key << "vtk_modes" << YAML::Value << c.outputs.vtk_modes;
    out << YAML::Key << "warmup_runs" << YAML::Value << c.outputs.warmup_runs;
    out << YAML::EndMap;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

inline void save_config(const std::filesystem::path& path, const ExperimentConfig& c) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw InvalidArgument("config: cannot write " + path.string());
    os << dump_config(c);
}

} // namespace pgdham::harness

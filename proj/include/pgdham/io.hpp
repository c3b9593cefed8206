// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/full_order.hpp"
#include "pgdham/mesh.hpp"
#include "pgdham/ritz.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace pgdham::io {

namespace fs = std::filesystem;

namespace detail {

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

inline std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    if (!is) throw std::runtime_error("cannot open " + path.string() + " for reading");
    return is;
}

inline void write_doubles(std::ostream& os, const double* data, std::size_t count) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_doubles(std::istream& is, double* data, std::size_t count, const std::string& what) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double)) throw std::runtime_error(what + ": truncated data");
}

} // namespace detail

/// Matrix Market coordinate file, `real symmetric`, lower triangle, 1-based.
inline void write_matrix_market(const fs::path& path, const SparseMatrix& A) {
    if (A.rows() != A.cols()) throw InvalidArgument("matrix market: symmetric output needs a square matrix");
    std::vector<std::tuple<Index, Index, double>> entries;
    for (Index j = 0; j < A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(A, j); it; ++it)
            if (it.row() >= it.col()) entries.emplace_back(it.row(), it.col(), it.value());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return std::get<1>(a) != std::get<1>(b) ? std::get<1>(a) < std::get<1>(b) : std::get<0>(a) < std::get<0>(b);
    });
    auto os = detail::open_out(path);
    os << "%%MatrixMarket matrix coordinate real symmetric\n";
    os << A.rows() << ' ' << A.cols() << ' ' << entries.size() << '\n';
    os << std::setprecision(17);
    for (const auto& [i, j, v] : entries) os << i + 1 << ' ' << j + 1 << ' ' << v << '\n';
}

/// Reads a `coordinate real symmetric|general` Matrix Market file.
inline SparseMatrix read_matrix_market(const fs::path& path) {
    auto is = detail::open_in(path);
    std::string line;
    std::getline(is, line);
    if (line.rfind("%%MatrixMarket matrix coordinate real", 0) != 0)
        throw std::runtime_error(path.string() + ": unsupported Matrix Market header");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {}
    std::istringstream hdr(line);
    Index rows = 0, cols = 0, nnz = 0;
    hdr >> rows >> cols >> nnz;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (Index k = 0; k < nnz; ++k) {
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw std::runtime_error(path.string() + ": truncated entries");
        trip.emplace_back(i - 1, j - 1, v);
        if (symmetric && i != j) trip.emplace_back(j - 1, i - 1, v);
    }
    SparseMatrix A(rows, cols);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// Expands a reduced DOF vector to per-node xyz values (clamped nodes get 0).
inline std::vector<std::array<double, 3>> nodal_field(const Mesh& mesh, const Vector& v) {
    if (v.size() != mesh.num_dofs) throw InvalidArgument("nodal field: vector size differs from mesh DOF count");
    std::vector<std::array<double, 3>> out(mesh.nodes.size(), {0.0, 0.0, 0.0});
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
        for (int c = 0; c < 3; ++c) {
            const Index d = mesh.dof_map[n][static_cast<std::size_t>(c)];
            if (d >= 0) out[n][static_cast<std::size_t>(c)] = v[d];
        }
    return out;
}

/// Legacy ASCII VTK unstructured grid: tetrahedra (type 10) followed by the
/// tagged boundary triangles (type 5). Cell scalar `tag` is 0 for volume
/// cells and the facet tag otherwise. Each named vector becomes a point-data
/// VECTORS field.
inline void write_vtk(const fs::path& path, const Mesh& mesh,
                      const std::vector<std::pair<std::string, Vector>>& fields = {}) {
    auto os = detail::open_out(path);
    os << "# vtk DataFile Version 3.0\n";
    os << "beam mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(17);
    os << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes) os << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    const std::size_t ncells = mesh.tets.size() + mesh.facets.size();
    os << "CELLS " << ncells << ' ' << 5 * mesh.tets.size() + 4 * mesh.facets.size() << '\n';
    for (const auto& t : mesh.tets) os << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
    for (const auto& f : mesh.facets) os << "3 " << f.nodes[0] << ' ' << f.nodes[1] << ' ' << f.nodes[2] << '\n';
    os << "CELL_TYPES " << ncells << '\n';
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) os << "10\n";
    for (std::size_t i = 0; i < mesh.facets.size(); ++i) os << "5\n";
    os << "CELL_DATA " << ncells << "\nSCALARS tag int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < mesh.tets.size(); ++i) os << "0\n";
    for (const auto& f : mesh.facets) os << static_cast<int>(f.tag) << '\n';
    if (!fields.empty()) {
        os << "POINT_DATA " << mesh.nodes.size() << '\n';
        for (const auto& [name, v] : fields) {
            os << "VECTORS " << name << " double\n";
            for (const auto& x : nodal_field(mesh, v)) os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
        }
    }
}

/// Binary trajectory: one text header line
/// `pgdham-trajectory n=<n> nt=<n_t> T=<T> h=<h> order=col-major,Q-then-P`
/// followed by Q and P as column-major doubles (column = time node).
inline void write_trajectory(const fs::path& path, const Trajectory& traj) {
    auto os = detail::open_out(path, std::ios::out | std::ios::binary);
    os << std::setprecision(17) << "pgdham-trajectory n=" << traj.dofs() << " nt=" << traj.grid().intervals
       << " T=" << traj.grid().T << " h=" << traj.grid().step() << " order=col-major,Q-then-P\n";
    detail::write_doubles(os, traj.Q.data(), static_cast<std::size_t>(traj.Q.size()));
    detail::write_doubles(os, traj.P.data(), static_cast<std::size_t>(traj.P.size()));
}

namespace detail {

inline std::map<std::string, std::string> header_fields(const std::string& line, const std::string& magic,
                                                        const std::string& where) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok != magic) throw std::runtime_error(where + ": not a " + magic + " file");
    std::map<std::string, std::string> kv;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

} // namespace detail

inline Trajectory read_trajectory(const fs::path& path) {
    auto is = detail::open_in(path, std::ios::in | std::ios::binary);
    std::string line;
    std::getline(is, line);
    auto kv = detail::header_fields(line, "pgdham-trajectory", path.string());
    const Index n = std::stol(kv.at("n"));
    TimeGrid grid{std::stod(kv.at("T")), static_cast<Index>(std::stol(kv.at("nt")))};
    Matrix Q(n, grid.nodes()), P(n, grid.nodes());
    detail::read_doubles(is, Q.data(), static_cast<std::size_t>(Q.size()), path.string());
    detail::read_doubles(is, P.data(), static_cast<std::size_t>(P.size()), path.string());
    return Trajectory(std::move(Q), std::move(P), grid);
}

/// Binary Ritz basis: header `pgdham-ritz n=<n> r=<r> seed=<seed>`, then
/// lambda (r doubles) and V (column-major n x r).
inline void write_ritz_basis(const fs::path& path, const RitzBasis& b) {
    auto os = detail::open_out(path, std::ios::out | std::ios::binary);
    os << "pgdham-ritz n=" << b.dofs() << " r=" << b.size() << " seed=" << b.seed << '\n';
    detail::write_doubles(os, b.lambda.data(), static_cast<std::size_t>(b.lambda.size()));
    detail::write_doubles(os, b.V.data(), static_cast<std::size_t>(b.V.size()));
}

inline RitzBasis read_ritz_basis(const fs::path& path) {
    auto is = detail::open_in(path, std::ios::in | std::ios::binary);
    std::string line;
    std::getline(is, line);
    auto kv = detail::header_fields(line, "pgdham-ritz", path.string());
    const Index n = std::stol(kv.at("n")), r = std::stol(kv.at("r"));
    RitzBasis b;
    b.seed = std::stoull(kv.at("seed"));
    b.lambda.resize(r);
    b.V.resize(n, r);
    detail::read_doubles(is, b.lambda.data(), static_cast<std::size_t>(r), path.string());
    detail::read_doubles(is, b.V.data(), static_cast<std::size_t>(b.V.size()), path.string());
    return b;
}

/// Temporal modes as CSV: `t,psi_q_1..psi_q_m,psi_p_1..psi_p_m`.
inline void write_temporal_modes_csv(const fs::path& path, const TimeGrid& grid, const Matrix& Psi_q,
                                     const Matrix& Psi_p) {
    if (Psi_q.rows() != grid.nodes() || Psi_p.rows() != grid.nodes() || Psi_q.cols() != Psi_p.cols())
        throw InvalidArgument("temporal modes csv: shapes do not match the grid");
    auto os = detail::open_out(path);
    os << "t";
    for (Index j = 0; j < Psi_q.cols(); ++j) os << ",psi_q_" << j + 1;
    for (Index j = 0; j < Psi_p.cols(); ++j) os << ",psi_p_" << j + 1;
    os << '\n' << std::setprecision(17);
    for (Index i = 0; i < grid.nodes(); ++i) {
        os << grid.at(i);
        for (Index j = 0; j < Psi_q.cols(); ++j) os << ',' << Psi_q(i, j);
        for (Index j = 0; j < Psi_p.cols(); ++j) os << ',' << Psi_p(i, j);
        os << '\n';
    }
}

} // namespace pgdham::io

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pgdham/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace pgdham {

enum class FacetTag : std::uint8_t { Dirichlet = 1, Neumann = 2, Free = 3 };

struct Facet {
    std::array<Index, 3> nodes;
    FacetTag tag;
};

/// Structured tetrahedral mesh of the box (0,Lx)x(0,Ly)x(0,Lz).
///
/// The face x = 0 is clamped, the face y = Ly carries the traction, every
/// other boundary facet is free. DOFs are node-major and xyz-interleaved;
/// clamped nodes own no DOF (dof_map entry -1).
struct Mesh {
    std::array<double, 3> lengths{};
    std::array<int, 3> divisions{};
    std::vector<std::array<double, 3>> nodes;
    std::vector<std::array<Index, 4>> tets;
    std::vector<Facet> facets;
    std::vector<std::array<Index, 3>> dof_map;
    Index num_dofs = 0;

    Index num_nodes() const { return static_cast<Index>(nodes.size()); }
    Index num_tets() const { return static_cast<Index>(tets.size()); }
    Index full_dofs() const { return 3 * num_nodes(); }

    double tet_volume(Index e) const {
        const auto& t = tets[static_cast<std::size_t>(e)];
        const auto& a = nodes[static_cast<std::size_t>(t[0])];
        const auto& b = nodes[static_cast<std::size_t>(t[1])];
        const auto& c = nodes[static_cast<std::size_t>(t[2])];
        const auto& d = nodes[static_cast<std::size_t>(t[3])];
        const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const double w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
        const double det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                           u[2] * (v[0] * w[1] - v[1] * w[0]);
        return det / 6.0;
    }

    double facet_area(const Facet& f) const {
        const auto& a = nodes[static_cast<std::size_t>(f.nodes[0])];
        const auto& b = nodes[static_cast<std::size_t>(f.nodes[1])];
        const auto& c = nodes[static_cast<std::size_t>(f.nodes[2])];
        const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
        const double n[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
        return 0.5 * std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    }

    double tagged_area(FacetTag tag) const {
        double area = 0.0;
        for (const auto& f : facets)
            if (f.tag == tag) area += facet_area(f);
        return area;
    }

    /// Longest tetrahedron edge.
    double max_edge_length() const {
        double h = 0.0;
        for (const auto& t : tets)
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    const auto& a = nodes[static_cast<std::size_t>(t[i])];
                    const auto& b = nodes[static_cast<std::size_t>(t[j])];
                    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
                    h = std::max(h, std::sqrt(dx * dx + dy * dy + dz * dz));
                }
        return h;
    }
};

/// Builds the beam mesh: every grid cell is split into the six Kuhn
/// tetrahedra sharing its main diagonal, which keeps neighbouring cells
/// conforming.
inline Mesh build_beam_mesh(std::array<double, 3> lengths, std::array<int, 3> divisions) {
    for (int d = 0; d < 3; ++d) {
        detail::require(divisions[d] >= 1, "build_beam_mesh: divisions must be >= 1");
        detail::require(lengths[d] > 0.0 && std::isfinite(lengths[d]), "build_beam_mesh: lengths must be > 0");
    }
    Mesh mesh;
    mesh.lengths = lengths;
    mesh.divisions = divisions;
    const int nx = divisions[0], ny = divisions[1], nz = divisions[2];
    const auto node_id = [&](int i, int j, int k) -> Index {
        return static_cast<Index>(i) + static_cast<Index>(nx + 1) * (j + static_cast<Index>(ny + 1) * k);
    };

    mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                // i == nx is computed as the exact length so tagged facets sit on the planes.
                const double x = (i == nx) ? lengths[0] : lengths[0] * i / nx;
                const double y = (j == ny) ? lengths[1] : lengths[1] * j / ny;
                const double z = (k == nz) ? lengths[2] : lengths[2] * k / nz;
                mesh.nodes.push_back({x, y, z});
            }

    // Corner c of a cell has offset bits (x = 1, y = 2, z = 4). Each Kuhn
    // tetrahedron walks 0 -> e_a -> e_a + e_b -> 7 for one axis ordering.
    static constexpr std::array<std::array<int, 3>, 6> orders = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    mesh.tets.reserve(static_cast<std::size_t>(6 * nx * ny * nz));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const auto corner = [&](int bits) {
                    return node_id(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
                };
                for (const auto& ord : orders) {
                    const int b1 = 1 << ord[0];
                    const int b2 = b1 | (1 << ord[1]);
                    std::array<Index, 4> t{corner(0), corner(b1), corner(b2), corner(7)};
                    mesh.tets.push_back(t);
                    if (mesh.tet_volume(mesh.num_tets() - 1) < 0.0) std::swap(mesh.tets.back()[2], mesh.tets.back()[3]);
                }
            }

    // Boundary facets are the tetrahedron faces that appear exactly once.
    std::map<std::array<Index, 3>, std::pair<int, std::array<Index, 3>>> faces;
    static constexpr int face_local[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (const auto& t : mesh.tets)
        for (const auto& fl : face_local) {
            std::array<Index, 3> f{t[fl[0]], t[fl[1]], t[fl[2]]};
            auto key = f;
            std::sort(key.begin(), key.end());
            auto [it, inserted] = faces.try_emplace(key, 0, f);
            ++it->second.first;
        }
    const auto on_plane = [&](const std::array<Index, 3>& f, int axis, double value) {
        return std::all_of(f.begin(), f.end(),
                           [&](Index n) { return mesh.nodes[static_cast<std::size_t>(n)][axis] == value; });
    };
    for (const auto& [key, entry] : faces) {
        if (entry.first != 1) continue;
        const auto& f = entry.second;
        FacetTag tag = FacetTag::Free;
        if (on_plane(f, 0, 0.0))
            tag = FacetTag::Dirichlet;
        else if (on_plane(f, 1, lengths[1]))
            tag = FacetTag::Neumann;
        mesh.facets.push_back({f, tag});
    }

    mesh.dof_map.resize(mesh.nodes.size());
    Index next = 0;
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
        if (mesh.nodes[n][0] == 0.0) {
            mesh.dof_map[n] = {-1, -1, -1};
        } else {
            mesh.dof_map[n] = {next, next + 1, next + 2};
            next += 3;
        }
    }
    mesh.num_dofs = next;
    return mesh;
}

/// Isotropic linear elastic material.
struct Material {
    double E = 220e9;
    double nu = 0.3;
    double rho = 7000.0;

    double mu() const { return E / (2.0 * (1.0 + nu)); }
    double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }

    void validate() const {
        detail::require(E > 0.0, "material: E must be > 0");
        detail::require(rho > 0.0, "material: rho must be > 0");
        detail::require(nu > 0.0 && nu < 0.5, "material: nu must lie in (0, 0.5)");
    }
};

} // namespace pgdham

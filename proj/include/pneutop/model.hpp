#pragma once

#include <array>
#include <vector>

#include "pneutop/config.hpp"

namespace pneutop {

// Structured bilinear quad mesh on [0,lx] x [0,ly].
// Node (i,j) -> index j*(nex+1)+i, numbered bottom-to-top.
// Element (ex,ey) -> index ey*nex+ex; corner nodes counter-clockwise
// from the lower-left.
struct MeshGrid {
    double lx = 0, ly = 0;
    int nex = 0, ney = 0;
    double thickness = 0;

    int nnx() const { return nex + 1; }
    int nny() const { return ney + 1; }
    int num_nodes() const { return nnx() * nny(); }
    int num_elems() const { return nex * ney; }
    double hx() const { return lx / nex; }
    double hy() const { return ly / ney; }
    double elem_area() const { return hx() * hy(); }

    int node_index(int i, int j) const { return j * nnx() + i; }
    double node_x(int node) const { return (node % nnx()) * hx(); }
    double node_y(int node) const { return (node / nnx()) * hy(); }

    int elem_index(int ex, int ey) const { return ey * nex + ex; }
    double elem_cx(int e) const { return ((e % nex) + 0.5) * hx(); }
    double elem_cy(int e) const { return ((e / nex) + 0.5) * hy(); }

    // CCW corner nodes: lower-left, lower-right, upper-right, upper-left.
    std::array<int, 4> elem_nodes(int e) const {
        const int ex = e % nex, ey = e / nex;
        const int n0 = node_index(ex, ey);
        return {n0, n0 + 1, n0 + 1 + nnx(), n0 + nnx()};
    }

    // Pressure gather: one DOF per node.
    std::array<int, 4> pressure_dofs(int e) const { return elem_nodes(e); }

    // Displacement gather: interleaved (ux, uy) per node.
    std::array<int, 8> displacement_dofs(int e) const {
        const auto n = elem_nodes(e);
        return {2 * n[0], 2 * n[0] + 1, 2 * n[1], 2 * n[1] + 1,
                2 * n[2], 2 * n[2] + 1, 2 * n[3], 2 * n[3] + 1};
    }

    bool is_boundary_node(int node) const {
        const int i = node % nnx(), j = node / nnx();
        return i == 0 || i == nex || j == 0 || j == ney;
    }
};

struct RegionTags {
    std::vector<int> fixed_nodes;          // both displacement components zero
    std::vector<int> pressure_input_nodes; // p = P_in
    std::vector<int> zero_pressure_nodes;  // p = 0
    std::vector<int> passive_elems;        // density frozen at 0
    std::vector<char> is_passive;          // per-element flag
    int output_node = -1;
    std::array<double, 2> output_dir = {0.0, -1.0};
    double spring_kss = 0;
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProblemModel {
    RunConfig config;
    MeshGrid mesh;
    RegionTags tags;

    int num_design_vars() const {
        return mesh.num_elems() - static_cast<int>(tags.passive_elems.size());
    }
};

// Builds mesh and resolves all region tags from geometric rules.
// Throws ModelError if the chamber touches the outer boundary or the
// optimizable set is empty.
ProblemModel build_model(const RunConfig& config);

}  // namespace pneutop

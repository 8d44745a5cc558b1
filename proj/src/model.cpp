#include "pneutop/model.hpp"

#include <cmath>
#include <sstream>

namespace pneutop {

void RunConfig::validate() const {
    std::ostringstream err;
    auto require = [&](bool ok, const char* msg) {
        if (!ok) err << "  " << msg << "\n";
    };
    require(lx > 0 && ly > 0, "domain.lx_m and domain.ly_m must be positive");
    require(nex >= 1 && ney >= 1, "mesh.nex and mesh.ney must be >= 1");
    require(thickness > 0, "domain.thickness_m must be positive");
    require(chamber_radius_factor > 0, "chamber.radius_factor must be positive");
    require(void_w_factor >= 0 && void_h_factor >= 0, "void size factors must be nonnegative");
    require(pressure_in > 0, "load.pressure must be positive");
    require(spring_kss >= 0, "spring.kss_n_per_m must be nonnegative");
    require(e1 > 0, "material.e1_pa must be positive");
    require(e0_ratio > 0 && e0_ratio < 1, "material.e0_ratio must lie in (0,1)");
    require(nu > -1 && nu < 0.5, "material.nu must lie in (-1,0.5)");
    require(chi >= 1, "material.chi must be >= 1");
    require(flow_kv > 0, "flow.kv must be positive");
    require(flow_contrast > 0 && flow_contrast < 1, "flow.contrast must lie in (0,1)");
    require(flow_beta > 0 && drain_beta > 0, "flow.beta_k and drain.beta_d must be positive");
    require(drain_remainder > 0 && drain_remainder < 1, "drain.remainder must lie in (0,1)");
    require(drain_depth_elems > 0, "drain.depth_elems must be positive");
    require(filter_radius_factor > 0, "filter.radius_factor must be positive");
    require(delta_eta >= 0 && delta_eta < 0.5, "robust.delta_eta must lie in [0,0.5)");
    require(beta_start > 0 && beta_max >= beta_start, "beta schedule must be positive and increasing");
    require(beta_period > 0, "beta.period must be positive");
    require(volume_target > 0 && volume_target < 1, "volume.target must lie in (0,1)");
    require(volume_update_period > 0, "volume.update_period must be positive");
    require(mma_move_limit > 0 && mma_move_limit <= 1, "mma.move_limit must lie in (0,1]");
    require(mma_max_iters >= 1, "mma.max_iters must be >= 1");
    const std::string msg = err.str();
    if (!msg.empty()) throw ConfigError("invalid configuration:\n" + msg);
}

ProblemModel build_model(const RunConfig& config) {
    config.validate();

    ProblemModel model;
    model.config = config;

    MeshGrid& mesh = model.mesh;
    mesh.lx = config.lx;
    mesh.ly = config.ly;
    mesh.nex = config.nex;
    mesh.ney = config.ney;
    mesh.thickness = config.thickness;

    RegionTags& tags = model.tags;
    tags.spring_kss = config.spring_kss;

    const double cx = 0.5 * mesh.lx, cy = 0.5 * mesh.ly;
    const double radius = config.chamber_radius();
    const double y_split = 0.5 * mesh.ly;
    const double tol = 1e-12 * std::max(mesh.lx, mesh.ly);

    for (int node = 0; node < mesh.num_nodes(); ++node) {
        const double x = mesh.node_x(node), y = mesh.node_y(node);

        const bool in_chamber = std::hypot(x - cx, y - cy) <= radius + tol;
        const bool on_boundary = mesh.is_boundary_node(node);
        if (in_chamber && on_boundary)
            throw ModelError("chamber radius reaches the domain boundary: node at (" +
                             std::to_string(x) + ", " + std::to_string(y) +
                             ") would carry both p=P_in and p=0");
        if (in_chamber)
            tags.pressure_input_nodes.push_back(node);
        else if (on_boundary)
            tags.zero_pressure_nodes.push_back(node);

        if (x <= tol) {
            const bool in_half = (config.fixed_half == FixedHalf::Upper)
                                     ? (y >= y_split - tol)
                                     : (y <= y_split + tol);
            if (in_half) tags.fixed_nodes.push_back(node);
        }
    }

    if (tags.pressure_input_nodes.empty())
        throw ModelError("pressure chamber contains no mesh nodes; refine the mesh or enlarge the chamber");

    // Passive void rectangle, selected by element centroid.
    const double vx0 = config.void_cx_factor * mesh.lx - 0.5 * config.void_w_factor * mesh.lx;
    const double vx1 = vx0 + config.void_w_factor * mesh.lx;
    const double vy0 = config.void_cy_factor * mesh.ly - 0.5 * config.void_h_factor * mesh.ly;
    const double vy1 = vy0 + config.void_h_factor * mesh.ly;
    tags.is_passive.assign(mesh.num_elems(), 0);
    for (int e = 0; e < mesh.num_elems(); ++e) {
        const double ex = mesh.elem_cx(e), ey = mesh.elem_cy(e);
        if (ex > vx0 && ex < vx1 && ey > vy0 && ey < vy1) {
            tags.passive_elems.push_back(e);
            tags.is_passive[e] = 1;
        }
    }
    if (model.num_design_vars() == 0)
        throw ModelError("passive void region covers the whole domain; nothing to optimize");

    // Output point: node nearest the bottom-right corner, pulled downward.
    tags.output_node = mesh.node_index(mesh.nex, 0);
    tags.output_dir = {0.0, -1.0};
    for (int fixed : tags.fixed_nodes)
        if (fixed == tags.output_node)
            throw ModelError("output node coincides with a fixed node");

    return model;
}

}  // namespace pneutop

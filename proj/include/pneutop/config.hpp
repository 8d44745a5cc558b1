#pragma once

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace pneutop {

// Which half of the left edge carries the structural clamp.
enum class FixedHalf { Upper, Lower };

// Validated run configuration. All lengths in meters, pressures in Pa,
// moduli in Pa, spring stiffness in N/m.
struct RunConfig {
    // domain / mesh
    double lx = 0.1;
    double ly = 0.15;
    int nex = 100;
    int ney = 150;
    double thickness = 0.001;

    // regions
    FixedHalf fixed_half = FixedHalf::Upper;
    double chamber_radius_factor = 0.25;  // radius = factor * lx
    double void_cx_factor = 0.5;          // center, fraction of lx
    double void_cy_factor = 0.75;         // center, fraction of ly
    double void_w_factor = 0.5;           // width, fraction of lx
    double void_h_factor = 0.1;           // height, fraction of ly

    // loading
    double pressure_in = 1.0e5;
    double spring_kss = 1.0e4;

    // material
    double e1 = 100.0e6;
    double e0_ratio = 1.0e-6;
    double nu = 0.4;
    double chi = 3.0;

    // flow
    double flow_kv = 1.0;
    double flow_contrast = 1.0e-7;
    double flow_eta = 0.2;
    double flow_beta = 10.0;

    // drainage penetration rule: Ds = Ks * (ln(remainder)/depth)^2
    double drain_remainder = 0.1;
    double drain_depth_elems = 1.0;
    double drain_eta = 0.3;
    double drain_beta = 10.0;

    // filtering / robust projection
    double filter_radius_factor = 6.0;
    double delta_eta = 0.15;
    double beta_start = 1.0;
    double beta_max = 128.0;
    int beta_period = 50;

    // optimization
    double volume_target = 0.2;
    int volume_update_period = 25;
    double mma_move_limit = 0.1;
    int mma_max_iters = 400;
    bool early_exit = true;

    std::string output_dir = "out";

    double chamber_radius() const { return chamber_radius_factor * lx; }
    double elem_hx() const { return lx / nex; }
    double elem_hy() const { return ly / ney; }
    double min_edge() const { return std::min(elem_hx(), elem_hy()); }
    double filter_radius() const { return filter_radius_factor * min_edge(); }
    double e0() const { return e0_ratio * e1; }

    // Throws ConfigError on violated bounds.
    void validate() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses a flat "key = value" config file ('#' comments, UTF-8).
// Unknown keys are errors; missing required keys are collected and
// reported together. Pressure accepts "bar" / "Pa" suffixes.
RunConfig parse_config(const std::filesystem::path& path);

// Echoes every resolved key back in parseable form.
void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace pneutop

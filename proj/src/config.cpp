#include "pneutop/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pneutop/io.hpp"

namespace pneutop {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("unparsable value for " + key + ": '" + value + "'");
    }
    if (!trim(value.substr(pos)).empty())
        throw ConfigError("unexpected trailing text for " + key + ": '" + value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("value for " + key + " must be an integer: '" + value + "'");
    return i;
}

// Pressure accepts a bare number (Pa) or a "Pa"/"kPa"/"MPa"/"bar" suffix.
double parse_pressure(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("unparsable value for " + key + ": '" + value + "'");
    }
    const std::string unit = trim(value.substr(pos));
    if (unit.empty() || unit == "Pa") return v;
    if (unit == "kPa") return v * 1e3;
    if (unit == "MPa") return v * 1e6;
    if (unit == "bar") return v * 1e5;
    throw ConfigError("unknown pressure unit for " + key + ": '" + unit + "'");
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());

    RunConfig cfg;
    using Handler = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Handler> handlers = {
        {"domain.lx_m", [&](auto& k, auto& v) { cfg.lx = parse_number(k, v); }},
        {"domain.ly_m", [&](auto& k, auto& v) { cfg.ly = parse_number(k, v); }},
        {"mesh.nex", [&](auto& k, auto& v) { cfg.nex = parse_int(k, v); }},
        {"mesh.ney", [&](auto& k, auto& v) { cfg.ney = parse_int(k, v); }},
        {"domain.thickness_m", [&](auto& k, auto& v) { cfg.thickness = parse_number(k, v); }},
        {"bc.fixed_left_half",
         [&](auto& k, auto& v) {
             if (v == "upper")
                 cfg.fixed_half = FixedHalf::Upper;
             else if (v == "lower")
                 cfg.fixed_half = FixedHalf::Lower;
             else
                 throw ConfigError("value for " + k + " must be 'upper' or 'lower'");
         }},
        {"chamber.radius_factor", [&](auto& k, auto& v) { cfg.chamber_radius_factor = parse_number(k, v); }},
        {"void.center_x_factor", [&](auto& k, auto& v) { cfg.void_cx_factor = parse_number(k, v); }},
        {"void.center_y_factor", [&](auto& k, auto& v) { cfg.void_cy_factor = parse_number(k, v); }},
        {"void.width_factor", [&](auto& k, auto& v) { cfg.void_w_factor = parse_number(k, v); }},
        {"void.height_factor", [&](auto& k, auto& v) { cfg.void_h_factor = parse_number(k, v); }},
        {"load.pressure", [&](auto& k, auto& v) { cfg.pressure_in = parse_pressure(k, v); }},
        {"spring.kss_n_per_m", [&](auto& k, auto& v) { cfg.spring_kss = parse_number(k, v); }},
        {"material.e1_pa", [&](auto& k, auto& v) { cfg.e1 = parse_number(k, v); }},
        {"material.e0_ratio", [&](auto& k, auto& v) { cfg.e0_ratio = parse_number(k, v); }},
        {"material.nu", [&](auto& k, auto& v) { cfg.nu = parse_number(k, v); }},
        {"material.chi", [&](auto& k, auto& v) { cfg.chi = parse_number(k, v); }},
        {"flow.kv", [&](auto& k, auto& v) { cfg.flow_kv = parse_number(k, v); }},
        {"flow.contrast", [&](auto& k, auto& v) { cfg.flow_contrast = parse_number(k, v); }},
        {"flow.eta_k", [&](auto& k, auto& v) { cfg.flow_eta = parse_number(k, v); }},
        {"flow.beta_k", [&](auto& k, auto& v) { cfg.flow_beta = parse_number(k, v); }},
        {"drain.remainder", [&](auto& k, auto& v) { cfg.drain_remainder = parse_number(k, v); }},
        {"drain.depth_elems", [&](auto& k, auto& v) { cfg.drain_depth_elems = parse_number(k, v); }},
        {"drain.eta_d", [&](auto& k, auto& v) { cfg.drain_eta = parse_number(k, v); }},
        {"drain.beta_d", [&](auto& k, auto& v) { cfg.drain_beta = parse_number(k, v); }},
        {"filter.radius_factor", [&](auto& k, auto& v) { cfg.filter_radius_factor = parse_number(k, v); }},
        {"robust.delta_eta", [&](auto& k, auto& v) { cfg.delta_eta = parse_number(k, v); }},
        {"beta.start", [&](auto& k, auto& v) { cfg.beta_start = parse_number(k, v); }},
        {"beta.max", [&](auto& k, auto& v) { cfg.beta_max = parse_number(k, v); }},
        {"beta.period", [&](auto& k, auto& v) { cfg.beta_period = parse_int(k, v); }},
        {"volume.target", [&](auto& k, auto& v) { cfg.volume_target = parse_number(k, v); }},
        {"volume.update_period", [&](auto& k, auto& v) { cfg.volume_update_period = parse_int(k, v); }},
        {"mma.move_limit", [&](auto& k, auto& v) { cfg.mma_move_limit = parse_number(k, v); }},
        {"mma.max_iters", [&](auto& k, auto& v) { cfg.mma_max_iters = parse_int(k, v); }},
        {"output.dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
    };

    static const std::set<std::string> required = {
        "domain.lx_m", "domain.ly_m", "mesh.nex", "mesh.ney", "domain.thickness_m",
        "load.pressure", "spring.kss_n_per_m", "material.e1_pa", "material.nu",
        "material.chi", "filter.radius_factor", "robust.delta_eta", "volume.target",
        "mma.max_iters", "output.dir"};

    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = handlers.find(key);
        if (it == handlers.end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        it->second(key, value);
    }

    std::vector<std::string> missing;
    for (const std::string& key : required)
        if (!seen.count(key)) missing.push_back(key);
    if (!missing.empty()) {
        std::ostringstream err;
        err << "missing required config keys:";
        for (const std::string& key : missing) err << "\n  " << key;
        throw ConfigError(err.str());
    }

    cfg.validate();
    return cfg;
}

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ostringstream out;
    auto emit = [&](const std::string& key, auto value) { out << key << " = " << value << "\n"; };
    out.precision(17);
    emit("domain.lx_m", cfg.lx);
    emit("domain.ly_m", cfg.ly);
    emit("mesh.nex", cfg.nex);
    emit("mesh.ney", cfg.ney);
    emit("domain.thickness_m", cfg.thickness);
    emit("bc.fixed_left_half", cfg.fixed_half == FixedHalf::Upper ? "upper" : "lower");
    emit("chamber.radius_factor", cfg.chamber_radius_factor);
    emit("void.center_x_factor", cfg.void_cx_factor);
    emit("void.center_y_factor", cfg.void_cy_factor);
    emit("void.width_factor", cfg.void_w_factor);
    emit("void.height_factor", cfg.void_h_factor);
    emit("load.pressure", cfg.pressure_in);
    emit("spring.kss_n_per_m", cfg.spring_kss);
    emit("material.e1_pa", cfg.e1);
    emit("material.e0_ratio", cfg.e0_ratio);
    emit("material.nu", cfg.nu);
    emit("material.chi", cfg.chi);
    emit("flow.kv", cfg.flow_kv);
    emit("flow.contrast", cfg.flow_contrast);
    emit("flow.eta_k", cfg.flow_eta);
    emit("flow.beta_k", cfg.flow_beta);
    emit("drain.remainder", cfg.drain_remainder);
    emit("drain.depth_elems", cfg.drain_depth_elems);
    emit("drain.eta_d", cfg.drain_eta);
    emit("drain.beta_d", cfg.drain_beta);
    emit("filter.radius_factor", cfg.filter_radius_factor);
    emit("robust.delta_eta", cfg.delta_eta);
    emit("beta.start", cfg.beta_start);
    emit("beta.max", cfg.beta_max);
    emit("beta.period", cfg.beta_period);
    emit("volume.target", cfg.volume_target);
    emit("volume.update_period", cfg.volume_update_period);
    emit("mma.move_limit", cfg.mma_move_limit);
    emit("mma.max_iters", cfg.mma_max_iters);
    emit("output.dir", cfg.output_dir);
    atomic_write(path, out.str());
}

}  // namespace pneutop

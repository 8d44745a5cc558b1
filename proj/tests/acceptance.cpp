// Acceptance gate: one pass/fail line per criterion.
//   acceptance fast      -> criteria 1-4 (seconds to minutes)
//   acceptance flagship  -> criteria 5-9 (two full reference runs)
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "pneutop/gradcheck.hpp"
#include "pneutop/io.hpp"
#include "pneutop/optimizer.hpp"

using namespace pneutop;
namespace fs = std::filesystem;

#ifndef PNEUTOP_REPO_DIR
#define PNEUTOP_REPO_DIR "."
#endif

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %d %-20s %s  (%s)\n", criterion, name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemModel grad_model() {
    RunConfig cfg;
    cfg.nex = 6;
    cfg.ney = 9;
    return cfg.validate(), build_model(cfg);
}

ProblemModel strip_model(int nex, double h, bool outlet) {
    ProblemModel model;
    model.mesh.nex = nex;
    model.mesh.ney = 1;
    model.mesh.lx = nex * h;
    model.mesh.ly = h;
    model.mesh.thickness = 1.0;
    for (int j = 0; j <= 1; ++j) {
        model.tags.pressure_input_nodes.push_back(model.mesh.node_index(0, j));
        if (outlet) model.tags.zero_pressure_nodes.push_back(model.mesh.node_index(nex, j));
    }
    model.tags.is_passive.assign(model.mesh.num_elems(), 0);
    return model;
}

void criterion1_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = grad_model();
    double worst = 0;
    bool pass = true;
    for (unsigned seed : {42u, 7u, 2026u}) {
        GradientCheckOptions opts;
        opts.seed = seed;
        const auto rep = check_gradients(model, opts);
        worst = std::max(worst, rep.max_rel_error);
        pass = pass && rep.passed;
    }
    const double dt = seconds_since(t0);
    pass = pass && worst <= 1e-3 && dt < 120.0;
    std::ostringstream ss;
    ss << "max rel err " << worst << ", " << dt << " s, 3 seeds, 6x9 mesh";
    report(1, "gradient fidelity", pass, ss.str());
}

void criterion2_darcy() {
    const double h = 0.005, pin = 1.0e5;
    bool pass = true;
    std::ostringstream ss;

    {  // all-void strip: linear profile
        auto model = strip_model(20, h, true);
        PressureState st;
        solve_pressure(model, assemble_coupling(model.mesh), Vector::Zero(20), FlowParams{},
                       pin, st);
        double worst = 0;
        for (int n = 0; n < model.mesh.num_nodes(); ++n) {
            const double expect = pin * (1.0 - model.mesh.node_x(n) / model.mesh.lx);
            worst = std::max(worst, std::abs(st.pressure[n] - expect) / pin);
        }
        pass = pass && worst <= 1e-8;
        ss << "linear profile err " << worst;
    }
    {  // solid strip: penetration rule r=0.1, depth 5 elements
        auto model = strip_model(30, h, false);
        FlowParams p;
        p.ds = FlowParams::ds_from_penetration(p.ks(), 0.1, 5 * h);
        PressureState st;
        solve_pressure(model, assemble_coupling(model.mesh), Vector::Ones(30), p, pin, st);
        bool decayed = true;
        for (int i = 6; i <= 30; ++i)
            decayed = decayed && st.pressure[model.mesh.node_index(i, 0)] <= 0.1 * pin;
        pass = pass && decayed;
        ss << "; p(x>5h) <= 0.1 Pin: " << (decayed ? "yes" : "no");
    }
    report(2, "darcy analytics", pass, ss.str());
}

void criterion3_endpoints() {
    FlowParams p;
    p.ds = FlowParams::ds_from_penetration(p.ks(), 0.1, 0.005);
    double worst = 0;
    auto track = [&](double got, double expect, double scale) {
        worst = std::max(worst, std::abs(got - expect) / scale);
    };
    track(flow_coefficient(0.0, p), p.kv, p.kv);
    track(flow_coefficient(1.0, p), p.contrast * p.kv, p.kv * p.contrast);
    track(drainage_coefficient(0.0, p), 0.0, 1.0);
    track(drainage_coefficient(1.0, p), p.ds, p.ds);
    for (double beta : {1.0, 8.0, 64.0})
        for (double eta : {0.35, 0.5, 0.65}) {
            track(project(0.0, beta, eta), 0.0, 1.0);
            track(project(1.0, beta, eta), 1.0, 1.0);
        }
    Vector binary(4);
    binary << 0, 1, 0, 1;
    track(discreteness(binary), 0.0, 1.0);
    std::ostringstream ss;
    ss << "worst deviation " << worst;
    report(3, "interpolant endpoints", worst <= 1e-12, ss.str());
}

void criterion4_reciprocity() {
    RunConfig cfg;
    cfg.nex = 20;
    cfg.ney = 30;
    cfg.mma_max_iters = 15;
    const auto model = build_model(cfg);
    const auto coupling = assemble_coupling(model.mesh);
    const auto law = MaterialLaw::from_config(cfg);
    const auto fp = FlowParams::from_config(cfg);
    const FilterOperator filter(model.mesh, cfg.filter_radius());

    double worst = 0;
    auto check_design = [&](const Vector& rho, double beta) {
        const auto trip = make_triplet(rho, filter, beta, cfg.delta_eta, model.tags.is_passive);
        for (int m = 0; m < 3; ++m) {
            PressureState ps;
            solve_pressure(model, coupling, trip.field(m), fp, cfg.pressure_in, ps);
            ElasticState es;
            solve_states(model, trip.field(m), law, ps.force, es);
            const double mse = es.v.dot(es.stiffness * es.u);
            const double fdu = es.dummy_load.dot(es.u);
            worst = std::max(worst, std::abs(mse - fdu) / std::abs(fdu));
        }
    };

    std::mt19937 gen(17);
    std::uniform_real_distribution<double> dis(0.1, 0.9);
    for (double beta : {1.0, 4.0, 32.0}) {
        Vector rho(model.mesh.num_elems());
        for (int e = 0; e < rho.size(); ++e)
            rho[e] = model.tags.is_passive[e] ? 0.0 : dis(gen);
        check_design(rho, beta);
    }
    const auto result = run_optimization(model);
    check_design(result.rho, result.history.back().beta);

    std::ostringstream ss;
    ss << "worst |MSE - Fd.u|/|Fd.u| = " << worst << " over 12 solves + final design";
    report(4, "reciprocity", worst <= 1e-10, ss.str());
}

// ---- flagship helpers -------------------------------------------------

std::vector<int> components(const std::vector<char>& solid, int nex, int ney, char phase) {
    // 4-connected component labels for elements with solid[e] == phase
    std::vector<int> label(solid.size(), -1);
    std::vector<int> sizes;
    std::vector<int> stack;
    for (int start = 0; start < static_cast<int>(solid.size()); ++start) {
        if (solid[start] != phase || label[start] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        stack.push_back(start);
        label[start] = id;
        while (!stack.empty()) {
            const int e = stack.back();
            stack.pop_back();
            ++sizes[id];
            const int ex = e % nex, ey = e / nex;
            const int nb[4] = {ex > 0 ? e - 1 : -1, ex < nex - 1 ? e + 1 : -1,
                               ey > 0 ? e - nex : -1, ey < ney - 1 ? e + nex : -1};
            for (int f : nb)
                if (f >= 0 && solid[f] == phase && label[f] < 0) {
                    label[f] = id;
                    stack.push_back(f);
                }
        }
    }
    return label;
}

int count_components(const std::vector<char>& solid, int nex, int ney, char phase) {
    const auto label = components(solid, nex, ney, phase);
    int n = 0;
    for (int l : label) n = std::max(n, l + 1);
    return n;
}

int count_enclosed_voids(const std::vector<char>& solid, int nex, int ney) {
    const auto label = components(solid, nex, ney, 0);
    int n = 0;
    for (int l : label) n = std::max(n, l + 1);
    std::vector<char> touches(n, 0);
    for (int e = 0; e < static_cast<int>(solid.size()); ++e) {
        if (label[e] < 0) continue;
        const int ex = e % nex, ey = e / nex;
        if (ex == 0 || ex == nex - 1 || ey == 0 || ey == ney - 1) touches[label[e]] = 1;
    }
    int enclosed = 0;
    for (char t : touches)
        if (!t) ++enclosed;
    return enclosed;
}

std::vector<char> threshold(const Vector& rho_bar, double level) {
    std::vector<char> s(rho_bar.size());
    for (int e = 0; e < rho_bar.size(); ++e) s[e] = rho_bar[e] > level ? 1 : 0;
    return s;
}

bool no_point_connections(const std::vector<char>& solid, int nex, int ney) {
    // every diagonally adjacent solid pair must share an edge-adjacent
    // solid neighbor, i.e. no checkerboard 2x2 blocks
    for (int ey = 0; ey + 1 < ney; ++ey)
        for (int ex = 0; ex + 1 < nex; ++ex) {
            const int a = ey * nex + ex, b = a + 1, c = a + nex, d = c + 1;
            if (solid[a] && solid[d] && !solid[b] && !solid[c]) return false;
            if (solid[b] && solid[c] && !solid[a] && !solid[d]) return false;
        }
    return true;
}

std::string history_bytes(const std::vector<IterationRecord>& hist, const fs::path& p) {
    write_history_csv(hist, p);
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void flagship_criteria() {
    const auto cfg_path = fs::path(PNEUTOP_REPO_DIR) / "configs/paper_fig3.cfg";
    RunConfig cfg = parse_config(cfg_path);
    const fs::path out_dir = fs::temp_directory_path() / "pneutop_acceptance";
    fs::create_directories(out_dir);
    cfg.output_dir = (out_dir / "run").string();
    const auto model = build_model(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const auto r1 = run_optimization(model);
    const double dt1 = seconds_since(t0);
    const auto r2 = run_optimization(model);

    const int ne = model.mesh.num_elems();
    const double vfe = r1.fields.eroded.sum() / ne;
    const double vfi = r1.fields.intermediate.sum() / ne;
    const double vfd = r1.fields.dilated.sum() / ne;
    const double mnd = discreteness(r1.fields.intermediate);
    const double delta_mm = r1.output_displacement[1] * 1000.0;

    {  // 5: flagship reproduction
        const bool pass = dt1 <= 3600.0 && delta_mm < 0.0 &&
                          std::abs(delta_mm - (-0.224)) <= 0.2 * 0.224 &&
                          std::abs(vfi - 0.200) <= 0.005 && mnd <= 2.0 &&
                          std::abs(vfe - 0.135) <= 0.03 && std::abs(vfd - 0.26) <= 0.03 &&
                          vfe < vfi && vfi < vfd;
        std::ostringstream ss;
        ss << "delta_i " << delta_mm << " mm (ref -0.224 +/-20%), Vf " << vfe << "/" << vfi
           << "/" << vfd << " (ref 0.135/0.200/0.26), Mnd " << mnd << "% (<=2), " << dt1
           << " s, " << r1.iterations << " iters";
        report(5, "flagship run", pass, ss.str());
    }
    {  // 6: identical robust topologies
        const auto se = threshold(r1.fields.eroded, 0.5);
        const auto si = threshold(r1.fields.intermediate, 0.5);
        const auto sd = threshold(r1.fields.dilated, 0.5);
        const int ce = count_components(se, cfg.nex, cfg.ney, 1);
        const int ci = count_components(si, cfg.nex, cfg.ney, 1);
        const int cd = count_components(sd, cfg.nex, cfg.ney, 1);
        const int he = count_enclosed_voids(se, cfg.nex, cfg.ney);
        const int hi = count_enclosed_voids(si, cfg.nex, cfg.ney);
        const int hd = count_enclosed_voids(sd, cfg.nex, cfg.ney);
        std::ostringstream ss;
        ss << "solid components " << ce << "/" << ci << "/" << cd << ", enclosed voids " << he
           << "/" << hi << "/" << hd;
        report(6, "robust topology", ce == ci && ci == cd && he == hi && hi == hd, ss.str());
    }
    {  // 7: no point connections
        const auto si = threshold(r1.fields.intermediate, 0.5);
        const bool pass = no_point_connections(si, cfg.nex, cfg.ney);
        report(7, "no point connections", pass,
               pass ? "no checkerboard 2x2 in the intermediate design"
                    : "diagonal-only contact found");
    }
    {  // 8: determinism
        const std::string h1 = history_bytes(r1.history, out_dir / "history_run1.csv");
        const std::string h2 = history_bytes(r2.history, out_dir / "history_run2.csv");
        std::ostringstream ss;
        ss << h1.size() << " bytes, " << r1.history.size() << " iterations, reruns "
           << (h1 == h2 ? "identical" : "differ");
        report(8, "determinism", !h1.empty() && h1 == h2, ss.str());
    }
    {  // 9: pressure bounds (asserted inside every solve; re-check final field)
        const double lo = r1.pressure_intermediate.minCoeff();
        const double hi = r1.pressure_intermediate.maxCoeff();
        const bool pass = lo >= -1e-9 * cfg.pressure_in &&
                          hi <= cfg.pressure_in * (1.0 + 1e-9);
        std::ostringstream ss;
        ss << "in-solver assertion held for all " << r1.iterations * 3
           << " solves; final field p in [" << lo << ", " << hi << "] Pa";
        report(9, "pressure bounds", pass, ss.str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "fast";
    try {
        if (mode == "fast" || mode == "all") {
            criterion1_gradients();
            criterion2_darcy();
            criterion3_endpoints();
            criterion4_reciprocity();
        }
        if (mode == "flagship" || mode == "all") flagship_criteria();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
        return 1;
    }
    return g_failures == 0 ? 0 : 1;
}

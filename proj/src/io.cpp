#include "pneutop/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pneutop {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.good()) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

const char* kHistoryHeader =
    "iteration,f0_eroded,f0_intermediate,f0_dilated,mse_intermediate,se_intermediate,"
    "vol_eroded,vol_intermediate,vol_dilated,vol_target_dilated,mnd_intermediate,"
    "beta,max_change";

void write_history_csv(const std::vector<IterationRecord>& history,
                       const std::filesystem::path& path) {
    std::ostringstream out;
    out << kHistoryHeader << "\n";
    for (const IterationRecord& r : history) {
        out << r.iteration;
        for (double f : r.f0) out << "," << fmt(f);
        out << "," << fmt(r.mse_intermediate) << "," << fmt(r.se_intermediate);
        for (double v : r.volume) out << "," << fmt(v);
        out << "," << fmt(r.volume_target_dilated) << "," << fmt(r.mnd_intermediate)
            << "," << fmt(r.beta) << "," << fmt(r.max_change) << "\n";
    }
    atomic_write(path, out.str());
}

void write_design_csv(const MeshGrid& mesh, const Vector& rho, const Vector& rho_tilde,
                      const Vector& rho_bar, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# nex=" << mesh.nex << " ney=" << mesh.ney << "\n";
    out << "element,rho,rho_tilde,rho_bar\n";
    for (int e = 0; e < mesh.num_elems(); ++e)
        out << e << "," << fmt(rho[e]) << "," << fmt(rho_tilde[e]) << ","
            << fmt(rho_bar[e]) << "\n";
    atomic_write(path, out.str());
}

DesignField read_design_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open design file: " + path.string());
    DesignField field;
    std::string line;
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::sscanf(line.c_str(), "# nex=%d ney=%d", &field.nex, &field.ney);
            continue;
        }
        if (line.rfind("element", 0) == 0) continue;
        std::array<double, 3> row{};
        long idx = 0;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &idx, &row[0], &row[1], &row[2]) != 4)
            throw IoError("unparsable design row: " + line);
        if (idx != static_cast<long>(rows.size()))
            throw IoError("design rows out of order at element " + std::to_string(idx));
        rows.push_back(row);
    }
    const int ne = static_cast<int>(rows.size());
    if (ne == 0) throw IoError("empty design file: " + path.string());
    if (field.nex <= 0 || field.ney <= 0 || field.nex * field.ney != ne)
        throw IoError("design file missing or inconsistent '# nex= ney=' header");
    field.rho.resize(ne);
    field.rho_tilde.resize(ne);
    field.rho_bar.resize(ne);
    for (int e = 0; e < ne; ++e) {
        field.rho[e] = rows[e][0];
        field.rho_tilde[e] = rows[e][1];
        field.rho_bar[e] = rows[e][2];
    }
    return field;
}

void write_design_pgm(const MeshGrid& mesh, const Vector& rho_bar,
                      const std::filesystem::path& path) {
    std::ostringstream out;
    out << "P2\n" << mesh.nex << " " << mesh.ney << "\n255\n";
    for (int row = mesh.ney - 1; row >= 0; --row) {  // row 0 = top of domain
        for (int col = 0; col < mesh.nex; ++col) {
            const double v = std::clamp(rho_bar[mesh.elem_index(col, row)], 0.0, 1.0);
            // solid = dark, matching the usual density plots
            out << static_cast<int>(std::lround(255.0 * (1.0 - v)));
            out << (col + 1 == mesh.nex ? '\n' : ' ');
        }
    }
    atomic_write(path, out.str());
}

namespace {

void write_vtk_grid_header(std::ostringstream& out, const MeshGrid& mesh) {
    out << "# vtk DataFile Version 2.0\n";
    out << "pneutop field\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << mesh.nnx() << " " << mesh.nny() << " 1\n";
    out << "POINTS " << mesh.num_nodes() << " double\n";
    for (int n = 0; n < mesh.num_nodes(); ++n)
        out << fmt(mesh.node_x(n)) << " " << fmt(mesh.node_y(n)) << " 0\n";
    out << "POINT_DATA " << mesh.num_nodes() << "\n";
}

}  // namespace

void write_vtk_scalar(const MeshGrid& mesh, const Vector& nodal, const std::string& name,
                      const std::filesystem::path& path) {
    std::ostringstream out;
    write_vtk_grid_header(out, mesh);
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int n = 0; n < mesh.num_nodes(); ++n) out << fmt(nodal[n]) << "\n";
    atomic_write(path, out.str());
}

void write_vtk_vector(const MeshGrid& mesh, const Vector& nodal_xy, const std::string& name,
                      const std::filesystem::path& path) {
    std::ostringstream out;
    write_vtk_grid_header(out, mesh);
    out << "VECTORS " << name << " double\n";
    for (int n = 0; n < mesh.num_nodes(); ++n)
        out << fmt(nodal_xy[2 * n]) << " " << fmt(nodal_xy[2 * n + 1]) << " 0\n";
    atomic_write(path, out.str());
}

namespace {

// Marching squares over the element-center grid, padded with a ghost ring
// of void so every contour closes.
struct SegmentStitcher {
    std::map<std::pair<long, long>, size_t> heads;
    std::vector<Polyline> chains;

    static std::pair<long, long> key(const std::array<double, 2>& pt) {
        return {std::lround(pt[0] * 1e9), std::lround(pt[1] * 1e9)};
    }

    void add(const std::array<double, 2>& from, const std::array<double, 2>& to) {
        chains.push_back({from, to});
        heads[key(from)] = chains.size() - 1;
    }

    std::vector<Polyline> stitch() {
        std::vector<Polyline> loops;
        std::vector<char> used(chains.size(), 0);
        for (size_t start = 0; start < chains.size(); ++start) {
            if (used[start]) continue;
            Polyline loop = chains[start];
            used[start] = 1;
            while (true) {
                auto it = heads.find(key(loop.back()));
                if (it == heads.end() || used[it->second]) break;
                used[it->second] = 1;
                loop.push_back(chains[it->second].back());
            }
            if (loop.size() >= 3) loops.push_back(std::move(loop));
        }
        return loops;
    }
};

}  // namespace

std::vector<Polyline> extract_contour(const MeshGrid& mesh, const Vector& rho_bar, double level) {
    const int nx = mesh.nex + 2, ny = mesh.ney + 2;  // with ghost ring
    const double hx = mesh.hx(), hy = mesh.hy();
    auto value = [&](int gi, int gj) {
        const int i = gi - 1, j = gj - 1;
        if (i < 0 || j < 0 || i >= mesh.nex || j >= mesh.ney) return 0.0;
        return rho_bar[mesh.elem_index(i, j)];
    };
    auto px = [&](int gi) { return (gi - 1 + 0.5) * hx; };
    auto py = [&](int gj) { return (gj - 1 + 0.5) * hy; };

    SegmentStitcher stitcher;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double va = value(i, j), vb = value(i + 1, j);
            const double vc = value(i + 1, j + 1), vd = value(i, j + 1);
            const int code = (va >= level ? 1 : 0) | (vb >= level ? 2 : 0) |
                             (vc >= level ? 4 : 0) | (vd >= level ? 8 : 0);
            if (code == 0 || code == 15) continue;

            auto lerp = [&](double v0, double v1) { return (level - v0) / (v1 - v0); };
            const std::array<double, 2> bottom = {px(i) + lerp(va, vb) * hx, py(j)};
            const std::array<double, 2> right = {px(i + 1), py(j) + lerp(vb, vc) * hy};
            const std::array<double, 2> top = {px(i) + lerp(vd, vc) * hx, py(j + 1)};
            const std::array<double, 2> left = {px(i), py(j) + lerp(va, vd) * hy};

            // Directed so solid stays on the left; loops around solid are CCW.
            switch (code) {
                case 1: stitcher.add(bottom, left); break;
                case 2: stitcher.add(right, bottom); break;
                case 4: stitcher.add(top, right); break;
                case 8: stitcher.add(left, top); break;
                case 3: stitcher.add(right, left); break;
                case 6: stitcher.add(top, bottom); break;
                case 9: stitcher.add(bottom, top); break;
                case 12: stitcher.add(left, right); break;
                case 7: stitcher.add(top, left); break;
                case 11: stitcher.add(right, top); break;
                case 13: stitcher.add(bottom, right); break;
                case 14: stitcher.add(left, bottom); break;
                case 5:  // saddle: average-of-corners rule
                    if (0.25 * (va + vb + vc + vd) >= level) {
                        stitcher.add(bottom, right);
                        stitcher.add(top, left);
                    } else {
                        stitcher.add(bottom, left);
                        stitcher.add(top, right);
                    }
                    break;
                case 10:
                    if (0.25 * (va + vb + vc + vd) >= level) {
                        stitcher.add(left, bottom);
                        stitcher.add(right, top);
                    } else {
                        stitcher.add(right, bottom);
                        stitcher.add(left, top);
                    }
                    break;
                default: break;
            }
        }
    }
    return stitcher.stitch();
}

void write_contour_svg(const MeshGrid& mesh, const std::vector<Polyline>& contours,
                       const std::filesystem::path& path) {
    const double w = mesh.lx * 1000.0, h = mesh.ly * 1000.0;  // mm
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "mm\" height=\""
        << fmt(h) << "mm\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
    for (const Polyline& loop : contours) {
        out << "  <polygon fill=\"none\" stroke=\"black\" stroke-width=\"0.2\" points=\"";
        for (size_t k = 0; k < loop.size(); ++k) {
            // SVG y grows downward
            out << fmt(loop[k][0] * 1000.0) << "," << fmt(h - loop[k][1] * 1000.0);
            if (k + 1 < loop.size()) out << " ";
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    atomic_write(path, out.str());
}

void write_contour_csv(const std::vector<Polyline>& contours, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "loop,x_m,y_m\n";
    for (size_t c = 0; c < contours.size(); ++c)
        for (const auto& pt : contours[c])
            out << c << "," << fmt(pt[0]) << "," << fmt(pt[1]) << "\n";
    atomic_write(path, out.str());
}

void write_summary(const OptimizationResult& result, const std::filesystem::path& path) {
    static const char* names[3] = {"eroded", "intermediate", "dilated"};
    std::ostringstream out;
    out << "iterations = " << result.iterations << "\n";
    out << "converged_early = " << (result.converged_early ? "yes" : "no") << "\n";
    out << "scale_factor = " << fmt(result.scale) << "\n";
    const int ne = static_cast<int>(result.rho.size());
    for (int m = 0; m < 3; ++m) {
        const Vector& field = result.fields.field(m);
        out << "delta_mm_" << names[m] << " = " << fmt(result.output_displacement[m] * 1000.0)
            << "\n";
        out << "vf_" << names[m] << " = " << fmt(field.sum() / ne) << "\n";
        out << "mnd_percent_" << names[m] << " = " << fmt(discreteness(field)) << "\n";
        out << "f0_" << names[m] << " = " << fmt(result.final_f0[m]) << "\n";
    }
    atomic_write(path, out.str());
}

}  // namespace pneutop

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pneutop/io.hpp"
#include "pneutop/sensitivity.hpp"

using namespace pneutop;
namespace fs = std::filesystem;

namespace {

MeshGrid unit_mesh(int nex, int ney, double h = 0.001) {
    MeshGrid mesh;
    mesh.nex = nex;
    mesh.ney = ney;
    mesh.lx = nex * h;
    mesh.ly = ney * h;
    mesh.thickness = 1.0;
    return mesh;
}

fs::path tmp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pneutop_io_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double loop_area(const Polyline& loop) {
    double a = 0;
    for (size_t i = 0; i + 1 < loop.size(); ++i)
        a += loop[i][0] * loop[i + 1][1] - loop[i + 1][0] * loop[i][1];
    return 0.5 * a;
}

}  // namespace

TEST_CASE("design csv round trip preserves functionals") {
    const auto mesh = unit_mesh(7, 5);
    const int ne = mesh.num_elems();
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> dis(0.0, 1.0);
    Vector rho(ne), rt(ne), rb(ne);
    for (int e = 0; e < ne; ++e) {
        rho[e] = dis(gen);
        rt[e] = dis(gen);
        rb[e] = dis(gen);
    }
    const auto path = tmp_file("design.csv");
    write_design_csv(mesh, rho, rt, rb, path);
    const auto field = read_design_csv(path);
    CHECK(field.nex == 7);
    CHECK(field.ney == 5);
    CHECK(std::abs(discreteness(field.rho_bar) - discreteness(rb)) < 1e-10);
    CHECK(std::abs(field.rho_bar.sum() / ne - rb.sum() / ne) < 1e-12);
    CHECK((field.rho - rho).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("history csv has the fixed header and no wall-clock column") {
    std::vector<IterationRecord> hist(2);
    hist[0].iteration = 1;
    hist[0].f0 = {-0.9, -1.0, -1.1};
    hist[0].wall_ms = 123.0;  // must not appear in the file
    hist[1].iteration = 2;
    const auto path = tmp_file("history.csv");
    write_history_csv(hist, path);
    const std::string text = slurp(path);
    CHECK(text.find(kHistoryHeader) == 0);
    CHECK(text.find("wall") == std::string::npos);
    CHECK(text.find("123") == std::string::npos);
    // two data rows
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("pgm writes one pixel per element, top row first") {
    const auto mesh = unit_mesh(3, 2);
    Vector rb = Vector::Zero(6);
    rb[0] = 1.0;  // bottom-left element -> dark pixel, last row of image
    const auto path = tmp_file("design.pgm");
    write_design_pgm(mesh, rb, path);
    std::ifstream in(path);
    std::string magic;
    int w, h, maxval;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(maxval == 255);
    std::vector<int> px(6);
    for (auto& v : px) in >> v;
    CHECK(px[3] == 0);    // solid -> black, bottom row written last
    CHECK(px[0] == 255);  // void -> white
}

TEST_CASE("contour of a solid block is one ccw loop") {
    const auto mesh = unit_mesh(8, 8);
    Vector rb = Vector::Zero(64);
    for (int ey = 2; ey < 6; ++ey)
        for (int ex = 2; ex < 6; ++ex) rb[ey * 8 + ex] = 1.0;
    const auto loops = extract_contour(mesh, rb, 0.5);
    REQUIRE(loops.size() == 1);
    const auto& loop = loops[0];
    REQUIRE(loop.size() >= 5);
    CHECK(loop.front()[0] == doctest::Approx(loop.back()[0]));
    CHECK(loop.front()[1] == doctest::Approx(loop.back()[1]));
    // ccw around solid: positive signed area, roughly the block size
    const double area = loop_area(loop);
    CHECK(area > 0.0);
    CHECK(area == doctest::Approx(16e-6).epsilon(0.35));
    // every vertex inside the mesh bounding box
    for (const auto& pt : loop) {
        CHECK(pt[0] >= -mesh.hx());
        CHECK(pt[0] <= mesh.lx + mesh.hx());
        CHECK(pt[1] >= -mesh.hy());
        CHECK(pt[1] <= mesh.ly + mesh.hy());
    }
}

TEST_CASE("contour of a void field is empty, full field is the outer ring") {
    const auto mesh = unit_mesh(5, 4);
    CHECK(extract_contour(mesh, Vector::Zero(20), 0.5).empty());
    const auto loops = extract_contour(mesh, Vector::Ones(20), 0.5);
    CHECK(loops.size() == 1);
    CHECK(loop_area(loops[0]) > 0.0);
}

TEST_CASE("checkerboard saddles still produce closed loops") {
    const auto mesh = unit_mesh(6, 6);
    Vector rb(36);
    for (int e = 0; e < 36; ++e) rb[e] = ((e % 6) + (e / 6)) % 2 ? 1.0 : 0.0;
    const auto loops = extract_contour(mesh, rb, 0.5);
    CHECK(!loops.empty());
    for (const auto& loop : loops) {
        REQUIRE(loop.size() >= 4);
        CHECK(loop.front()[0] == doctest::Approx(loop.back()[0]));
        CHECK(loop.front()[1] == doctest::Approx(loop.back()[1]));
    }
}

TEST_CASE("contour svg and csv are written") {
    const auto mesh = unit_mesh(8, 8);
    Vector rb = Vector::Zero(64);
    for (int ey = 3; ey < 6; ++ey)
        for (int ex = 2; ex < 7; ++ex) rb[ey * 8 + ex] = 1.0;
    const auto loops = extract_contour(mesh, rb, 0.5);
    REQUIRE(!loops.empty());
    const auto svg = tmp_file("contour.svg");
    const auto csv = tmp_file("contour.csv");
    write_contour_svg(mesh, loops, svg);
    write_contour_csv(loops, csv);
    const std::string s = slurp(svg);
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("<polygon") != std::string::npos);
    CHECK(slurp(csv).find("loop") != std::string::npos);
}

TEST_CASE("atomic write replaces content") {
    const auto path = tmp_file("atomic.txt");
    atomic_write(path, "first");
    atomic_write(path, "second");
    CHECK(slurp(path) == "second");
    CHECK(!fs::exists(path.string() + ".tmp"));
}

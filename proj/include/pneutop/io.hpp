#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pneutop/fields.hpp"
#include "pneutop/model.hpp"
#include "pneutop/optimizer.hpp"

namespace pneutop {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// history.csv: one row per IterationRecord, fixed header.
extern const char* kHistoryHeader;
void write_history_csv(const std::vector<IterationRecord>& history,
                       const std::filesystem::path& path);

// design_*.csv: element index, raw, filtered, projected density.
void write_design_csv(const MeshGrid& mesh, const Vector& rho, const Vector& rho_tilde,
                      const Vector& rho_bar, const std::filesystem::path& path);

struct DesignField {
    int nex = 0, ney = 0;
    Vector rho, rho_tilde, rho_bar;
};
DesignField read_design_csv(const std::filesystem::path& path);

// 8-bit grayscale, one pixel per element, row 0 = top of the domain.
void write_design_pgm(const MeshGrid& mesh, const Vector& rho_bar,
                      const std::filesystem::path& path);

// Legacy VTK 2.0 ASCII STRUCTURED_GRID dumps of nodal fields.
void write_vtk_scalar(const MeshGrid& mesh, const Vector& nodal, const std::string& name,
                      const std::filesystem::path& path);
void write_vtk_vector(const MeshGrid& mesh, const Vector& nodal_xy, const std::string& name,
                      const std::filesystem::path& path);

// Marching-squares iso-contour on the element-center grid. Each polyline
// is a closed loop of (x, y) points in meters; loops around solid regions
// are counter-clockwise. Saddles are resolved by the average-of-corners
// rule.
using Polyline = std::vector<std::array<double, 2>>;
std::vector<Polyline> extract_contour(const MeshGrid& mesh, const Vector& rho_bar, double level);

void write_contour_svg(const MeshGrid& mesh, const std::vector<Polyline>& contours,
                       const std::filesystem::path& path);
void write_contour_csv(const std::vector<Polyline>& contours, const std::filesystem::path& path);

void write_summary(const OptimizationResult& result, const std::filesystem::path& path);

// Atomic write: stream to a temp file, then rename into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace pneutop

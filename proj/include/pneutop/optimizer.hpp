#pragma once

#include <array>
#include <functional>
#include <vector>

#include "pneutop/elasticity.hpp"
#include "pneutop/fields.hpp"
#include "pneutop/flow.hpp"
#include "pneutop/mma.hpp"
#include "pneutop/model.hpp"
#include "pneutop/sensitivity.hpp"

namespace pneutop {

struct IterationRecord {
    int iteration = 0;
    std::array<double, 3> f0 = {0, 0, 0};     // eroded, intermediate, dilated
    double mse_intermediate = 0;              // m*N
    double se_intermediate = 0;               // J
    std::array<double, 3> volume = {0, 0, 0};
    double volume_target_dilated = 0;
    double mnd_intermediate = 0;              // percent
    double beta = 0;
    double max_change = 0;
    double wall_ms = 0;
};

struct OptimizationResult {
    Vector rho;                  // raw design variables (full element field)
    RobustTriplet fields;        // final physical fields
    std::vector<IterationRecord> history;
    double scale = 1.0;
    std::array<double, 3> final_f0 = {0, 0, 0};
    // signed output-node displacement per realization, meters
    std::array<double, 3> output_displacement = {0, 0, 0};
    Vector pressure_intermediate;      // nodal p of the final intermediate design
    Vector displacement_intermediate;  // nodal (ux,uy) of the final intermediate design
    int iterations = 0;
    bool converged_early = false;
};

// Projection steepness for a 1-based iteration index: doubles every
// `period` iterations, capped at beta_max.
double beta_schedule(int iteration, double beta_start, double beta_max, int period);

// Full robust min-max loop (bound formulation, 3 objective constraints +
// dilated volume constraint). `observer`, when set, is called after each
// iteration with the current record.
OptimizationResult run_optimization(
    const ProblemModel& model,
    const std::function<void(const IterationRecord&)>& observer = nullptr);

// Evaluates f0 of one realization for a given raw design (full pipeline).
// Used by the finite-difference gradient check.
struct RealizationEval {
    Objective objective;
    Vector gradient;  // d f0 / d rho (raw variables)
    double output_displacement = 0;
};
RealizationEval evaluate_realization(const ProblemModel& model, const Vector& rho, double beta,
                                     int realization, double scale, bool with_gradient);

}  // namespace pneutop

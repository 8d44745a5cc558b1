#pragma once

#include "pneutop/elasticity.hpp"
#include "pneutop/fields.hpp"
#include "pneutop/flow.hpp"
#include "pneutop/model.hpp"

namespace pneutop {

struct Objective {
    double mse = 0;  // mutual strain energy v^T K u
    double se = 0;   // strain energy 0.5 u^T K u
    double f0 = 0;   // -s * mse / se
};

// Quadratic forms of the solved states; throws SolverError when SE <= 0.
Objective objective(const ElasticState& elastic, double scale);

// Adjoint gradient of f0 = -s*MSE/SE with respect to the physical field
// of one realization. Uses one extra flow solve; the elastic adjoints are
// closed-form in u and v.
Vector adjoint_gradient(const ProblemModel& model, const Vector& rho_bar,
                        const PressureState& pressure, const ElasticState& elastic,
                        const SparseMatrix& coupling, const FlowParams& flow,
                        const MaterialLaw& law, double scale);

struct ConstraintReport {
    double volume = 0;      // V(rho_bar^d)
    double target = 0;      // current dilated target
    double value = 0;       // volume - target
    Vector gradient;        // d V / d rho (raw design variables)
};

// Volume of the dilated field and its gradient through the filter chain.
ConstraintReport volume_and_gradient(const Vector& rho_bar_dilated, const RobustTriplet& triplet,
                                     const FilterOperator& filter,
                                     const std::vector<char>& is_passive, double target);

// Discreteness measure M_nd in percent: 0 for binary, 100 for all-0.5.
double discreteness(const Vector& rho_bar);

// Consistent scale factor: chosen at iteration 1 so max_m |f0_m| = 1.
double scale_factor(const std::array<double, 3>& mse_over_se);

}  // namespace pneutop

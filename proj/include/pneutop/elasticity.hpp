#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pneutop/fields.hpp"
#include "pneutop/flow.hpp"
#include "pneutop/model.hpp"

namespace pneutop {

struct MaterialLaw {
    double e1 = 100e6;
    double e0 = 100.0;
    double nu = 0.4;
    double chi = 3.0;

    static MaterialLaw from_config(const RunConfig& cfg) {
        return {cfg.e1, cfg.e0(), cfg.nu, cfg.chi};
    }
};

// Modified SIMP: E = E0 + rho^chi (E1 - E0).
double simp_modulus(double rho_bar, const MaterialLaw& law);
double simp_modulus_derivative(double rho_bar, const MaterialLaw& law);

// Plane-stress bilinear quad stiffness, 2x2 Gauss, unit Young's modulus.
// Scale by E_e for the element matrix.
Eigen::Matrix<double, 8, 8> element_stiffness(double hx, double hy, double nu, double t);

// Global stiffness including the workpiece spring on the output node's
// direction DOF. Unconstrained (Dirichlet handled in solve).
SparseMatrix assemble_stiffness(const ProblemModel& model, const Vector& rho_bar,
                                const MaterialLaw& law);

struct ElasticState {
    SparseMatrix stiffness;  // full, with spring
    Vector u;                // displacements under F = -T p
    Vector v;                // displacements under the unit dummy load
    Vector dummy_load;
    std::vector<int> free_dofs;
    std::vector<int> dof_to_free;  // -1 for constrained DOFs
    Eigen::SimplicialLDLT<SparseMatrix> factorization;  // of K_ff

    ElasticState() = default;
    ElasticState(const ElasticState&) = delete;
    ElasticState& operator=(const ElasticState&) = delete;
};

// One factorization, two back-substitutions (actual and dummy loads).
void solve_states(const ProblemModel& model, const Vector& rho_bar, const MaterialLaw& law,
                  const Vector& force, ElasticState& out);

// Adjoint solve reusing the factorization; rhs on all DOFs, result zero on
// constrained DOFs.
Vector elastic_adjoint(const ElasticState& state, const Vector& rhs);

// Unit dummy load at the output node in the output direction.
Vector make_dummy_load(const ProblemModel& model);

}  // namespace pneutop

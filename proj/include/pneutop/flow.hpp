#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pneutop/fields.hpp"
#include "pneutop/model.hpp"

namespace pneutop {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowParams {
    double kv = 1.0;        // void-phase flow coefficient (normalized)
    double contrast = 1e-7; // eps = Ks/Kv
    double eta_k = 0.2;
    double beta_k = 10.0;
    double ds = 0.0;        // drainage coefficient of solid, 1/m^2
    double eta_d = 0.3;
    double beta_d = 10.0;

    double ks() const { return contrast * kv; }

    // Penetration rule: pressure decays to `remainder` across `depth` of
    // fully solid material (1D reaction-diffusion decay exp(-x*sqrt(D/K))).
    static double ds_from_penetration(double ks, double remainder, double depth) {
        const double s = std::log(remainder) / depth;
        return ks * s * s;
    }

    static FlowParams from_config(const RunConfig& cfg) {
        FlowParams p;
        p.kv = cfg.flow_kv;
        p.contrast = cfg.flow_contrast;
        p.eta_k = cfg.flow_eta;
        p.beta_k = cfg.flow_beta;
        p.eta_d = cfg.drain_eta;
        p.beta_d = cfg.drain_beta;
        p.ds = ds_from_penetration(p.ks(), cfg.drain_remainder,
                                   cfg.drain_depth_elems * cfg.min_edge());
        return p;
    }
};

// Smoothed step H(rho, beta, eta) with H(0)=0 and H(1)=1 exactly.
double smooth_step(double rho, double beta, double eta);
double smooth_step_derivative(double rho, double beta, double eta);

// Eq.-level interpolants and their design derivatives.
double flow_coefficient(double rho_bar, const FlowParams& p);
double drainage_coefficient(double rho_bar, const FlowParams& p);
// Returns (dK/drho_bar, dD/drho_bar).
std::pair<double, double> flow_partials(double rho_bar, const FlowParams& p);

// Geometry-only element matrices for a rectangular bilinear element
// (2x2 Gauss, exact here).
Eigen::Matrix4d element_diffusion(double hx, double hy);
Eigen::Matrix4d element_mass(double hx, double hy);
// Pressure-to-load coupling block: row (2a+d), col b holds
// t * integral N_a dN_b/dx_d.
Eigen::Matrix<double, 8, 4> element_coupling(double hx, double hy, double t);

// A = sum_e [ K(rho_e) * diffusion + D(rho_e) * mass ].
SparseMatrix assemble_flow(const MeshGrid& mesh, const Vector& rho_bar, const FlowParams& p);

// Transformation matrix of the consistent nodal loads F = -T p.
// Geometry-only; independent of the design field.
SparseMatrix assemble_coupling(const MeshGrid& mesh);

struct PressureState {
    SparseMatrix flow_matrix;  // full (unconstrained) A
    Vector pressure;           // nodal p, Dirichlet values imposed
    Vector force;              // F = -T p on displacement DOFs
    std::vector<int> free_nodes;
    std::vector<int> node_to_free;  // -1 for Dirichlet nodes
    Eigen::SimplicialLDLT<SparseMatrix> factorization;  // of A_ff

    PressureState() = default;
    PressureState(const PressureState&) = delete;
    PressureState& operator=(const PressureState&) = delete;
};

// Imposes p = p_in on the chamber set and p = 0 on the outer-edge set,
// eliminates constrained rows/columns and solves the SPD reduced system.
// Asserts the discrete maximum principle 0 <= p <= p_in.
void solve_pressure(const ProblemModel& model, const SparseMatrix& coupling,
                    const Vector& rho_bar, const FlowParams& p, double p_in,
                    PressureState& out);

// Adjoint solve on the same factorization: A lambda = rhs with lambda = 0
// on Dirichlet nodes (rhs given on all nodes).
Vector flow_adjoint(const PressureState& state, const Vector& rhs);

}  // namespace pneutop

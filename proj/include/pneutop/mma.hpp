#pragma once

#include <Eigen/Dense>

#include "pneutop/fields.hpp"

namespace pneutop {

// Method of Moving Asymptotes (Svanberg 1987), solved via the dual
// interior-point method. Handles the general form
//
//   min  f0(x) + z + sum_i c_i y_i + 0.5 y_i^2
//   s.t. g_i(x) - a_i z - y_i <= 0,  i = 1..m
//        alpha <= x <= beta,  y >= 0,  z >= 0
//
// The a_i coefficients make the min-max bound formulation a native case
// (a_i = 1 on the objective-bound constraints, 0 elsewhere).
class MmaSolver {
  public:
    MmaSolver(int n, int m, double xmin = 0.0, double xmax = 1.0);

    void set_constraint_scalars(const Vector& a, const Vector& c);
    void set_asymptote_params(double init, double shrink, double grow);

    // One MMA step. g holds constraint values at x; dgdx is m x n.
    // alpha/beta is the per-variable box (global bounds intersected with
    // the move limit by the caller).
    void update(Vector& x, const Vector& df0dx, const Vector& g,
                const Eigen::MatrixXd& dgdx, const Vector& alpha, const Vector& beta);

    double z() const { return z_; }
    int iteration() const { return iter_; }
    void reset();

  private:
    void generate_subproblem(const Vector& x, const Vector& df0dx, const Vector& g,
                             const Eigen::MatrixXd& dgdx, const Vector& alpha,
                             const Vector& beta);
    void solve_dual(Vector& x, const Vector& alpha, const Vector& beta);

    int n_, m_;
    double xmin_, xmax_;
    double asym_init_ = 0.5, asym_shrink_ = 0.7, asym_grow_ = 1.2;
    int iter_ = 0;

    Vector a_, c_;
    Vector low_, upp_;
    Vector xold1_, xold2_;
    Vector p0_, q0_;
    Eigen::MatrixXd pij_, qij_;  // m x n
    Vector b_;
    Vector lam_, mu_, y_;
    double z_ = 0;
};

}  // namespace pneutop

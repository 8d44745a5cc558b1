#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pneutop/model.hpp"

namespace pneutop {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Linear density filter with cone weights w = max(0, 1 - d/r_fill),
// row-normalized over the in-domain neighborhood. rho_tilde = W * rho.
class FilterOperator {
  public:
    FilterOperator(const MeshGrid& mesh, double radius);

    Vector apply(const Vector& rho) const { return weights_ * rho; }

    // Filter transpose: maps d f/d rho_tilde back to d f/d rho.
    Vector apply_transpose(const Vector& dfdrt) const {
        return weights_.transpose() * dfdrt;
    }

    double radius() const { return radius_; }
    const SparseMatrix& matrix() const { return weights_; }

  private:
    double radius_;
    SparseMatrix weights_;
};

// Smoothed Heaviside projection, threshold eta, steepness beta.
// Maps 0 -> 0 and 1 -> 1 exactly.
double project(double rho_tilde, double beta, double eta);
double project_derivative(double rho_tilde, double beta, double eta);

Vector project(const Vector& rho_tilde, double beta, double eta);
Vector project_derivative(const Vector& rho_tilde, double beta, double eta);

// Eroded / intermediate / dilated physical fields from one raw design.
struct RobustTriplet {
    double beta = 1.0;
    double eta_eroded = 0.5, eta_intermediate = 0.5, eta_dilated = 0.5;
    Vector rho_tilde;
    Vector eroded, intermediate, dilated;

    double eta(int m) const {
        return m == 0 ? eta_eroded : (m == 1 ? eta_intermediate : eta_dilated);
    }
    const Vector& field(int m) const {
        return m == 0 ? eroded : (m == 1 ? intermediate : dilated);
    }
};

// One filter pass, three projections at eta = 0.5 +/- delta_eta.
// Passive elements are clamped to zero in all three fields.
RobustTriplet make_triplet(const Vector& rho, const FilterOperator& filter, double beta,
                           double delta_eta, const std::vector<char>& is_passive);

// Back-propagates d f/d rho_bar through projection and filter; zeroes
// passive entries.
Vector chain_rule(const Vector& dfdrb, const Vector& rho_tilde, double beta, double eta,
                  const FilterOperator& filter, const std::vector<char>& is_passive);

}  // namespace pneutop

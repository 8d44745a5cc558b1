#pragma once

#include <vector>

#include "pneutop/optimizer.hpp"

namespace pneutop {

struct GradientCheckOptions {
    int num_designs = 3;
    double beta = 2.0;
    double fd_step = 1e-6;
    double tolerance = 1e-3;
    unsigned seed = 42;
    // test-only fault injection: flips the sign of the SIMP modulus
    // derivative so a broken elastic term is guaranteed to be caught
    bool negate_stiffness_partial = false;
};

struct GradientCheckReport {
    struct Entry {
        int design = 0;
        int realization = 0;  // 0 eroded, 1 intermediate, 2 dilated
        double max_rel_error = 0;
        int worst_element = -1;
    };
    std::vector<Entry> entries;
    double max_rel_error = 0;
    bool passed = false;
};

// Compares the adjoint gradient of f0 against central finite differences
// of the full filter -> projection -> Darcy -> loads -> elasticity chain,
// for random designs on a small mesh.
GradientCheckReport check_gradients(const ProblemModel& model, const GradientCheckOptions& opts);

}  // namespace pneutop

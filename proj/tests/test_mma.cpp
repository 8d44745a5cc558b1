#include <doctest.h>

#include <cmath>

#include "pneutop/mma.hpp"

using namespace pneutop;

namespace {

// drives an unconstrained separable problem through the constrained form
// with one slack volume-style constraint that never binds
void never_binding(Vector& g, Eigen::MatrixXd& dgdx, int n) {
    g = Vector::Constant(1, -1.0);
    dgdx = Eigen::MatrixXd::Zero(1, n);
}

}  // namespace

TEST_CASE("quadratic bowl converges to its minimum") {
    const int n = 4;
    MmaSolver mma(n, 1);
    Vector x = Vector::Constant(n, 0.2);
    const Vector target = (Vector(n) << 0.5, 0.3, 0.7, 0.55).finished();

    for (int it = 0; it < 150; ++it) {
        const Vector df = 2.0 * (x - target);
        Vector g;
        Eigen::MatrixXd dgdx;
        never_binding(g, dgdx, n);
        Vector alpha = (x.array() - 0.2).max(0.0);
        Vector beta = (x.array() + 0.2).min(1.0);
        mma.update(x, df, g, dgdx, alpha, beta);
    }
    // MMA settles into a small limit cycle around flat interior optima;
    // neighborhood convergence is what the outer loop relies on
    CHECK((x - target).lpNorm<Eigen::Infinity>() < 1e-2);
}

TEST_CASE("move limits are respected") {
    const int n = 3;
    MmaSolver mma(n, 1);
    Vector x = Vector::Constant(n, 0.5);
    const double move = 0.07;
    for (int it = 0; it < 5; ++it) {
        const Vector xprev = x;
        const Vector df = Vector::Constant(n, -10.0);  // push hard toward 1
        Vector g;
        Eigen::MatrixXd dgdx;
        never_binding(g, dgdx, n);
        Vector alpha = (x.array() - move).max(0.0);
        Vector beta = (x.array() + move).min(1.0);
        mma.update(x, df, g, dgdx, alpha, beta);
        CHECK((x - xprev).lpNorm<Eigen::Infinity>() <= move + 1e-9);
        for (int i = 0; i < n; ++i) {
            CHECK(x[i] >= 0.0);
            CHECK(x[i] <= 1.0);
        }
    }
    CHECK(x.minCoeff() > 0.5 + 4 * 0.06);  // moved up every iteration
}

TEST_CASE("linear program pins to the constraint facet") {
    // min -x1 - 2 x2  s.t.  x1 + x2 <= 1, 0 <= x <= 1
    // solution: x = (0, 1)
    const int n = 2;
    MmaSolver mma(n, 1);
    Vector x = Vector::Constant(n, 0.3);
    for (int it = 0; it < 60; ++it) {
        const Vector df = (Vector(n) << -1.0, -2.0).finished();
        Vector g = Vector::Constant(1, x.sum() - 1.0);
        Eigen::MatrixXd dgdx = Eigen::MatrixXd::Ones(1, n);
        Vector alpha = (x.array() - 0.2).max(0.0);
        Vector beta = (x.array() + 0.2).min(1.0);
        mma.update(x, df, g, dgdx, alpha, beta);
    }
    CHECK(x.sum() <= 1.0 + 1e-6);
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(x[0] == doctest::Approx(0.0).epsilon(2e-3));
}

TEST_CASE("min-max bound formulation balances two objectives") {
    // min z  s.t. (x-0.2)^2 - z <= 0, (x-0.8)^2 - z <= 0 on [0,1]
    // optimum x = 0.5 where both constraints meet
    const int n = 1;
    MmaSolver mma(n, 2);
    Vector a(2), c(2);
    a << 1.0, 1.0;
    c << 1000.0, 1000.0;
    mma.set_constraint_scalars(a, c);

    Vector x = Vector::Constant(1, 0.15);
    for (int it = 0; it < 80; ++it) {
        Vector g(2);
        g << (x[0] - 0.2) * (x[0] - 0.2), (x[0] - 0.8) * (x[0] - 0.8);
        Eigen::MatrixXd dgdx(2, 1);
        dgdx << 2 * (x[0] - 0.2), 2 * (x[0] - 0.8);
        const Vector df = Vector::Zero(1);
        Vector alpha = (x.array() - 0.1).max(0.0);
        Vector beta = (x.array() + 0.1).min(1.0);
        mma.update(x, df, g, dgdx, alpha, beta);
    }
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(mma.z() == doctest::Approx(0.09).epsilon(1e-2));
}

TEST_CASE("asymptotes stay finite under oscillation") {
    const int n = 2;
    MmaSolver mma(n, 1);
    Vector x = Vector::Constant(n, 0.5);
    for (int it = 0; it < 30; ++it) {
        // alternating gradient forces oscillation
        const double sgn = (it % 2 == 0) ? 1.0 : -1.0;
        const Vector df = Vector::Constant(n, 5.0 * sgn);
        Vector g;
        Eigen::MatrixXd dgdx;
        never_binding(g, dgdx, n);
        Vector alpha = (x.array() - 0.1).max(0.0);
        Vector beta = (x.array() + 0.1).min(1.0);
        mma.update(x, df, g, dgdx, alpha, beta);
        CHECK(std::isfinite(x[0]));
        CHECK(x[0] >= 0.0);
        CHECK(x[0] <= 1.0);
    }
}

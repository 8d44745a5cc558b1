#include "pneutop/elasticity.hpp"

#include <cmath>
#include <vector>

namespace pneutop {

double simp_modulus(double rho_bar, const MaterialLaw& law) {
    return law.e0 + std::pow(rho_bar, law.chi) * (law.e1 - law.e0);
}

double simp_modulus_derivative(double rho_bar, const MaterialLaw& law) {
    return law.chi * std::pow(rho_bar, law.chi - 1.0) * (law.e1 - law.e0);
}

Eigen::Matrix<double, 8, 8> element_stiffness(double hx, double hy, double nu, double t) {
    // Plane-stress constitutive matrix at unit modulus.
    Eigen::Matrix3d c;
    c << 1.0, nu, 0.0,
         nu, 1.0, 0.0,
         0.0, 0.0, (1.0 - nu) / 2.0;
    c /= (1.0 - nu * nu);

    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    const double detj = 0.25 * hx * hy;
    const double g = 0.5773502691896257;
    for (double eta : {-g, g}) {
        for (double xi : {-g, g}) {
            const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta),
                                   0.25 * (1 + eta), -0.25 * (1 + eta)};
            const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi),
                                    0.25 * (1 + xi), 0.25 * (1 - xi)};
            Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
            for (int a = 0; a < 4; ++a) {
                const double dx = dxi[a] * 2.0 / hx;
                const double dy = deta[a] * 2.0 / hy;
                b(0, 2 * a) = dx;
                b(1, 2 * a + 1) = dy;
                b(2, 2 * a) = dy;
                b(2, 2 * a + 1) = dx;
            }
            ke += t * detj * b.transpose() * c * b;
        }
    }
    return ke;
}

SparseMatrix assemble_stiffness(const ProblemModel& model, const Vector& rho_bar,
                                const MaterialLaw& law) {
    const MeshGrid& mesh = model.mesh;
    const Eigen::Matrix<double, 8, 8> ke0 =
        element_stiffness(mesh.hx(), mesh.hy(), law.nu, mesh.thickness);

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(mesh.num_elems()) * 64 + 1);
    for (int e = 0; e < mesh.num_elems(); ++e) {
        const double ee = simp_modulus(rho_bar[e], law);
        const auto dofs = mesh.displacement_dofs(e);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b)
                entries.emplace_back(dofs[a], dofs[b], ee * ke0(a, b));
    }

    // Workpiece spring on the output DOF (direction of output motion).
    const int out_dof = 2 * model.tags.output_node +
                        (std::abs(model.tags.output_dir[1]) > std::abs(model.tags.output_dir[0]) ? 1 : 0);
    entries.emplace_back(out_dof, out_dof, model.tags.spring_kss);

    SparseMatrix k(2 * mesh.num_nodes(), 2 * mesh.num_nodes());
    k.setFromTriplets(entries.begin(), entries.end());
    k.makeCompressed();
    return k;
}

Vector make_dummy_load(const ProblemModel& model) {
    Vector fd = Vector::Zero(2 * model.mesh.num_nodes());
    fd[2 * model.tags.output_node] = model.tags.output_dir[0];
    fd[2 * model.tags.output_node + 1] = model.tags.output_dir[1];
    return fd;
}

void solve_states(const ProblemModel& model, const Vector& rho_bar, const MaterialLaw& law,
                  const Vector& force, ElasticState& out) {
    const int ndof = 2 * model.mesh.num_nodes();
    out.stiffness = assemble_stiffness(model, rho_bar, law);
    out.dummy_load = make_dummy_load(model);

    std::vector<char> constrained(ndof, 0);
    for (int n : model.tags.fixed_nodes) {
        constrained[2 * n] = 1;
        constrained[2 * n + 1] = 1;
    }
    out.free_dofs.clear();
    out.dof_to_free.assign(ndof, -1);
    for (int d = 0; d < ndof; ++d) {
        if (!constrained[d]) {
            out.dof_to_free[d] = static_cast<int>(out.free_dofs.size());
            out.free_dofs.push_back(d);
        }
    }
    const int nf = static_cast<int>(out.free_dofs.size());

    std::vector<Eigen::Triplet<double>> entries;
    for (int col = 0; col < out.stiffness.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(out.stiffness, col); it; ++it) {
            const int rf = out.dof_to_free[it.row()];
            const int cf = out.dof_to_free[static_cast<int>(it.col())];
            if (rf >= 0 && cf >= 0) entries.emplace_back(rf, cf, it.value());
        }
    }
    SparseMatrix kff(nf, nf);
    kff.setFromTriplets(entries.begin(), entries.end());
    kff.makeCompressed();

    out.factorization.compute(kff);
    if (out.factorization.info() != Eigen::Success)
        throw SolverError("stiffness factorization failed: boundary conditions may leave rigid-body modes");

    // infinity norm of K_ff for the backward-error denominator
    double anorm = 0.0;
    {
        const Vector row_abs = kff.cwiseAbs() * Vector::Ones(nf);
        if (nf > 0) anorm = row_abs.maxCoeff();
    }

    auto reduced_solve = [&](const Vector& rhs_full) {
        Vector rf(nf);
        for (int i = 0; i < nf; ++i) rf[i] = rhs_full[out.free_dofs[i]];
        Vector xf = out.factorization.solve(rf);
        const double rn = rf.norm();
        if (rn > 0) {
            // Residual tolerance as a normwise backward error: with a unit
            // dummy load on a nearly-binary design (modulus contrast 1e-6)
            // the attainable residual floor is eps*|K|*|x|, which can exceed
            // 1e-10*|b|; scaling by |b| + |K|*|x| is the attainable (and
            // standard) criterion and coincides with |b| when the system is
            // well conditioned. Iterative refinement pushes the residual to
            // that floor.
            auto denom = [&] { return rn + anorm * xf.norm(); };
            for (int pass = 0; pass < 5; ++pass) {
                const Vector res = rf - kff * xf;
                if (res.norm() <= 1e-10 * denom()) break;
                xf += out.factorization.solve(res);
            }
            if ((kff * xf - rf).norm() > 1e-10 * denom())
                throw SolverError("elastic solve residual exceeds tolerance");
        }
        Vector x = Vector::Zero(ndof);
        for (int i = 0; i < nf; ++i) x[out.free_dofs[i]] = xf[i];
        return x;
    };

    out.u = reduced_solve(force);
    out.v = reduced_solve(out.dummy_load);
}

Vector elastic_adjoint(const ElasticState& state, const Vector& rhs) {
    const int nf = static_cast<int>(state.free_dofs.size());
    Vector rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = rhs[state.free_dofs[i]];
    const Vector lf = state.factorization.solve(rf);
    Vector lambda = Vector::Zero(rhs.size());
    for (int i = 0; i < nf; ++i) lambda[state.free_dofs[i]] = lf[i];
    return lambda;
}

}  // namespace pneutop

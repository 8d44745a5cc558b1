#include "pneutop/sensitivity.hpp"

#include <cmath>

namespace pneutop {

Objective objective(const ElasticState& elastic, double scale) {
    Objective obj;
    const Vector ku = elastic.stiffness * elastic.u;
    obj.mse = elastic.v.dot(ku);
    obj.se = 0.5 * elastic.u.dot(ku);
    if (!(obj.se > 0))
        throw SolverError("degenerate strain energy (SE <= 0): broken solve or zero load");
    obj.f0 = -scale * obj.mse / obj.se;
    return obj;
}

Vector adjoint_gradient(const ProblemModel& model, const Vector& rho_bar,
                        const PressureState& pressure, const ElasticState& elastic,
                        const SparseMatrix& coupling, const FlowParams& flow,
                        const MaterialLaw& law, double scale) {
    const MeshGrid& mesh = model.mesh;
    const Objective obj = objective(elastic, scale);

    // Elastic adjoints are closed-form in the solved states. lambda2 enters
    // the flow adjoint right-hand side; lambda2_k scales the K-derivative
    // term (the objective's own K-dependence folded in).
    const Vector lambda2 = scale * (elastic.v / obj.se - (obj.mse / (obj.se * obj.se)) * elastic.u);
    const Vector lambda2_k = -(scale * obj.mse / (2.0 * obj.se * obj.se)) * elastic.u;
    const Vector lambda3 = (scale / obj.se) * elastic.u;

    // A lambda1 = -T^T lambda2, lambda1 = 0 on Dirichlet nodes.
    const Vector lambda1 = flow_adjoint(pressure, -(coupling.transpose() * lambda2));

    const Eigen::Matrix4d diff = element_diffusion(mesh.hx(), mesh.hy());
    const Eigen::Matrix4d mass = element_mass(mesh.hx(), mesh.hy());
    const Eigen::Matrix<double, 8, 8> ke0 =
        element_stiffness(mesh.hx(), mesh.hy(), law.nu, mesh.thickness);

    Vector grad = Vector::Zero(mesh.num_elems());
    for (int e = 0; e < mesh.num_elems(); ++e) {
        const auto pdofs = mesh.pressure_dofs(e);
        const auto udofs = mesh.displacement_dofs(e);

        Eigen::Vector4d pe, le1;
        Eigen::Matrix<double, 8, 1> ue, ve, le2, le3;
        for (int a = 0; a < 4; ++a) {
            pe[a] = pressure.pressure[pdofs[a]];
            le1[a] = lambda1[pdofs[a]];
        }
        for (int a = 0; a < 8; ++a) {
            ue[a] = elastic.u[udofs[a]];
            ve[a] = elastic.v[udofs[a]];
            le2[a] = lambda2_k[udofs[a]];
            le3[a] = lambda3[udofs[a]];
        }

        const auto [dk, dd] = flow_partials(rho_bar[e], flow);
        const double de = simp_modulus_derivative(rho_bar[e], law);

        const double flow_term = le1.dot((dk * diff + dd * mass) * pe);
        const Eigen::Matrix<double, 8, 1> keu = ke0 * ue;
        const double elastic_term = de * (le2.dot(keu) + le3.dot(ke0 * ve));
        grad[e] = flow_term + elastic_term;
    }
    return grad;
}

ConstraintReport volume_and_gradient(const Vector& rho_bar_dilated, const RobustTriplet& triplet,
                                     const FilterOperator& filter,
                                     const std::vector<char>& is_passive, double target) {
    ConstraintReport rep;
    const int ne = static_cast<int>(rho_bar_dilated.size());
    rep.volume = rho_bar_dilated.sum() / ne;  // uniform element volumes
    rep.target = target;
    rep.value = rep.volume - target;
    const Vector dvdrb = Vector::Constant(ne, 1.0 / ne);
    rep.gradient = chain_rule(dvdrb, triplet.rho_tilde, triplet.beta, triplet.eta_dilated,
                              filter, is_passive);
    return rep;
}

double discreteness(const Vector& rho_bar) {
    const int ne = static_cast<int>(rho_bar.size());
    double sum = 0;
    for (int e = 0; e < ne; ++e) sum += 4.0 * rho_bar[e] * (1.0 - rho_bar[e]);
    return 100.0 * sum / ne;
}

double scale_factor(const std::array<double, 3>& mse_over_se) {
    double worst = 0;
    for (double r : mse_over_se) worst = std::max(worst, std::abs(r));
    return worst > 0 ? 1.0 / worst : 1.0;
}

}  // namespace pneutop

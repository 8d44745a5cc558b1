#include "pneutop/gradcheck.hpp"

#include <cmath>
#include <random>

namespace pneutop {

GradientCheckReport check_gradients(const ProblemModel& model, const GradientCheckOptions& opts) {
    const RunConfig& cfg = model.config;
    const MeshGrid& mesh = model.mesh;
    const int ne = mesh.num_elems();

    const FilterOperator filter(mesh, cfg.filter_radius());
    const SparseMatrix coupling = assemble_coupling(mesh);
    const FlowParams flow = FlowParams::from_config(cfg);
    const MaterialLaw law = MaterialLaw::from_config(cfg);
    MaterialLaw adjoint_law = law;
    if (opts.negate_stiffness_partial) std::swap(adjoint_law.e0, adjoint_law.e1);

    auto eta_for = [&](int m) {
        return m == 0 ? 0.5 + cfg.delta_eta : (m == 1 ? 0.5 : 0.5 - cfg.delta_eta);
    };
    auto f0_of = [&](const Vector& rho, int m) {
        const RobustTriplet t = make_triplet(rho, filter, opts.beta, cfg.delta_eta,
                                             model.tags.is_passive);
        PressureState ps;
        solve_pressure(model, coupling, t.field(m), flow, cfg.pressure_in, ps);
        ElasticState es;
        solve_states(model, t.field(m), law, ps.force, es);
        return objective(es, 1.0).f0;
    };

    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> dist(0.2, 0.8);

    GradientCheckReport report;
    for (int d = 0; d < opts.num_designs; ++d) {
        Vector rho = Vector::Zero(ne);
        for (int e = 0; e < ne; ++e)
            if (!model.tags.is_passive[e]) rho[e] = dist(rng);

        const RobustTriplet triplet = make_triplet(rho, filter, opts.beta, cfg.delta_eta,
                                                   model.tags.is_passive);
        for (int m = 0; m < 3; ++m) {
            PressureState ps;
            solve_pressure(model, coupling, triplet.field(m), flow, cfg.pressure_in, ps);
            ElasticState es;
            solve_states(model, triplet.field(m), law, ps.force, es);
            const Vector dfdrb = adjoint_gradient(model, triplet.field(m), ps, es, coupling,
                                                  flow, adjoint_law, 1.0);
            const Vector grad = chain_rule(dfdrb, triplet.rho_tilde, opts.beta, eta_for(m),
                                           filter, model.tags.is_passive);

            Vector fd = Vector::Zero(ne);
            for (int k = 0; k < ne; ++k) {
                if (model.tags.is_passive[k]) continue;
                Vector rp = rho, rm = rho;
                rp[k] += opts.fd_step;
                rm[k] -= opts.fd_step;
                fd[k] = (f0_of(rp, m) - f0_of(rm, m)) / (2.0 * opts.fd_step);
            }

            const double scale = fd.lpNorm<Eigen::Infinity>();
            GradientCheckReport::Entry entry;
            entry.design = d;
            entry.realization = m;
            for (int k = 0; k < ne; ++k) {
                const double err = std::abs(grad[k] - fd[k]) / std::max(scale, 1e-300);
                if (err > entry.max_rel_error) {
                    entry.max_rel_error = err;
                    entry.worst_element = k;
                }
            }
            report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
            report.entries.push_back(entry);
        }
    }
    report.passed = report.max_rel_error <= opts.tolerance;
    return report;
}

}  // namespace pneutop

#include "pneutop/optimizer.hpp"

#include <chrono>
#include <cmath>

namespace pneutop {

double beta_schedule(int iteration, double beta_start, double beta_max, int period) {
    const int doublings = iteration / period;
    double beta = beta_start * std::pow(2.0, doublings);
    return std::min(beta, beta_max);
}

namespace {

double eta_for(int m, double delta_eta) {
    return m == 0 ? 0.5 + delta_eta : (m == 1 ? 0.5 : 0.5 - delta_eta);
}

struct Realization {
    PressureState pressure;
    ElasticState elastic;
    Objective objective;
};

void solve_realization(const ProblemModel& model, const SparseMatrix& coupling,
                       const Vector& rho_bar, const FlowParams& flow, const MaterialLaw& law,
                       double scale, Realization& out) {
    solve_pressure(model, coupling, rho_bar, flow, model.config.pressure_in, out.pressure);
    solve_states(model, rho_bar, law, out.pressure.force, out.elastic);
    out.objective = objective(out.elastic, scale);
}

}  // namespace

RealizationEval evaluate_realization(const ProblemModel& model, const Vector& rho, double beta,
                                     int realization, double scale, bool with_gradient) {
    const RunConfig& cfg = model.config;
    const FilterOperator filter(model.mesh, cfg.filter_radius());
    const SparseMatrix coupling = assemble_coupling(model.mesh);
    const FlowParams flow = FlowParams::from_config(cfg);
    const MaterialLaw law = MaterialLaw::from_config(cfg);

    const RobustTriplet triplet = make_triplet(rho, filter, beta, cfg.delta_eta, model.tags.is_passive);
    const Vector& rho_bar = triplet.field(realization);

    Realization real;
    solve_realization(model, coupling, rho_bar, flow, law, scale, real);

    RealizationEval eval;
    eval.objective = real.objective;
    eval.output_displacement = real.elastic.u[2 * model.tags.output_node + 1];
    if (with_gradient) {
        const Vector dfdrb = adjoint_gradient(model, rho_bar, real.pressure, real.elastic,
                                              coupling, flow, law, scale);
        eval.gradient = chain_rule(dfdrb, triplet.rho_tilde, beta,
                                   eta_for(realization, cfg.delta_eta), filter,
                                   model.tags.is_passive);
    }
    return eval;
}

OptimizationResult run_optimization(
    const ProblemModel& model,
    const std::function<void(const IterationRecord&)>& observer) {
    const RunConfig& cfg = model.config;
    const MeshGrid& mesh = model.mesh;
    const int ne = mesh.num_elems();

    const FilterOperator filter(mesh, cfg.filter_radius());
    const SparseMatrix coupling = assemble_coupling(mesh);
    const FlowParams flow = FlowParams::from_config(cfg);
    const MaterialLaw law = MaterialLaw::from_config(cfg);

    // Design vector over optimizable elements only; passive entries stay 0.
    std::vector<int> design_elems;
    design_elems.reserve(model.num_design_vars());
    for (int e = 0; e < ne; ++e)
        if (!model.tags.is_passive[e]) design_elems.push_back(e);
    const int nvar = static_cast<int>(design_elems.size());

    Vector rho = Vector::Zero(ne);
    for (int e : design_elems) rho[e] = cfg.volume_target;

    const int ncon = 4;  // three objective bounds + dilated volume
    MmaSolver mma(nvar, ncon, 0.0, 1.0);
    Vector a = Vector::Zero(ncon);
    a[0] = a[1] = a[2] = 1.0;
    mma.set_constraint_scalars(a, Vector::Constant(ncon, 1000.0));

    OptimizationResult result;
    result.scale = 1.0;
    double scale = 0;  // fixed after iteration 1
    double vtarget_dilated = cfg.volume_target;

    Vector x(nvar), xnew(nvar);
    for (int i = 0; i < nvar; ++i) x[i] = rho[design_elems[i]];

    for (int iter = 1; iter <= cfg.mma_max_iters; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        const double beta = beta_schedule(iter, cfg.beta_start, cfg.beta_max, cfg.beta_period);

        const RobustTriplet triplet = make_triplet(rho, filter, beta, cfg.delta_eta,
                                                   model.tags.is_passive);

        std::array<Realization, 3> reals;
        std::array<Vector, 3> gradients;
        for (int m = 0; m < 3; ++m)
            solve_realization(model, coupling, triplet.field(m), flow, law, 1.0, reals[m]);

        if (scale == 0) {
            scale = scale_factor({reals[0].objective.mse / reals[0].objective.se,
                                  reals[1].objective.mse / reals[1].objective.se,
                                  reals[2].objective.mse / reals[2].objective.se});
            result.scale = scale;
        }
        for (int m = 0; m < 3; ++m) {
            reals[m].objective.f0 = -scale * reals[m].objective.mse / reals[m].objective.se;
            const Vector dfdrb = adjoint_gradient(model, triplet.field(m), reals[m].pressure,
                                                  reals[m].elastic, coupling, flow, law, scale);
            gradients[m] = chain_rule(dfdrb, triplet.rho_tilde, beta,
                                      eta_for(m, cfg.delta_eta), filter, model.tags.is_passive);
        }

        // Dilated volume target tracks the intermediate field toward V*.
        if (iter % cfg.volume_update_period == 0) {
            const double vi = triplet.intermediate.sum() / ne;
            const double vd = triplet.dilated.sum() / ne;
            if (vi <= 0)
                throw SolverError("dilated-target update with an all-void intermediate field");
            vtarget_dilated = cfg.volume_target * vd / vi;
        }
        const ConstraintReport volume = volume_and_gradient(triplet.dilated, triplet, filter,
                                                            model.tags.is_passive, vtarget_dilated);

        // Bound formulation: min z s.t. f0_m + shift - z <= 0. The margin must
        // exceed any single-step improvement of the worst objective, otherwise
        // z collapses onto its z >= 0 bound and the bound-constraint
        // multipliers degenerate to barrier noise (no descent signal).
        double worst_f0 = reals[0].objective.f0;
        for (int m = 1; m < 3; ++m) worst_f0 = std::max(worst_f0, reals[m].objective.f0);
        const double margin = std::max(100.0, std::abs(worst_f0));
        const double shift = margin - worst_f0;

        // Normalize the bound constraints by the margin so the subproblem sees
        // O(1) values and gradients regardless of how far the objective has
        // descended; otherwise the fixed penalty c on the volume constraint is
        // eventually dwarfed and the constraint gets bought off.
        Vector g(ncon);
        Eigen::MatrixXd dgdx(ncon, nvar);
        for (int m = 0; m < 3; ++m) {
            g[m] = (reals[m].objective.f0 + shift) / margin;
            for (int i = 0; i < nvar; ++i)
                dgdx(m, i) = gradients[m][design_elems[i]] / margin;
        }
        g[3] = volume.value / vtarget_dilated;
        for (int i = 0; i < nvar; ++i)
            dgdx(3, i) = volume.gradient[design_elems[i]] / vtarget_dilated;

        const Vector df0 = Vector::Zero(nvar);
        Vector lo(nvar), hi(nvar);
        for (int i = 0; i < nvar; ++i) {
            lo[i] = std::max(0.0, x[i] - cfg.mma_move_limit);
            hi[i] = std::min(1.0, x[i] + cfg.mma_move_limit);
        }
        xnew = x;
        mma.update(xnew, df0, g, dgdx, lo, hi);

        const double max_change = (xnew - x).lpNorm<Eigen::Infinity>();
        x = xnew;
        for (int i = 0; i < nvar; ++i) rho[design_elems[i]] = x[i];

        IterationRecord rec;
        rec.iteration = iter;
        for (int m = 0; m < 3; ++m) {
            rec.f0[m] = reals[m].objective.f0;
            rec.volume[m] = triplet.field(m).sum() / ne;
        }
        rec.mse_intermediate = reals[1].objective.mse;
        rec.se_intermediate = reals[1].objective.se;
        rec.volume_target_dilated = vtarget_dilated;
        rec.mnd_intermediate = discreteness(triplet.intermediate);
        rec.beta = beta;
        rec.max_change = max_change;
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);
        if (observer) observer(rec);
        result.iterations = iter;

        if (cfg.early_exit && beta >= cfg.beta_max && max_change < 1e-3) {
            result.converged_early = true;
            break;
        }
    }

    // Final state recomputed from scratch on the converged fields.
    result.rho = rho;
    const double beta_final = beta_schedule(result.iterations, cfg.beta_start, cfg.beta_max,
                                            cfg.beta_period);
    result.fields = make_triplet(rho, filter, beta_final, cfg.delta_eta, model.tags.is_passive);
    for (int m = 0; m < 3; ++m) {
        Realization real;
        solve_realization(model, coupling, result.fields.field(m), flow, law, scale, real);
        result.final_f0[m] = real.objective.f0;
        result.output_displacement[m] = real.elastic.u[2 * model.tags.output_node + 1];
        if (m == 1) {
            result.pressure_intermediate = real.pressure.pressure;
            result.displacement_intermediate = real.elastic.u;
        }
    }
    return result;
}

}  // namespace pneutop

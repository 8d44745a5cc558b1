#include "pneutop/flow.hpp"

#include <cmath>
#include <vector>

namespace pneutop {

namespace {

constexpr double kGauss = 0.5773502691896257;  // 1/sqrt(3)

struct QuadPoint {
    double xi, eta;
    std::array<double, 4> shape;
    std::array<double, 4> dx;  // physical x-derivatives
    std::array<double, 4> dy;
};

std::array<QuadPoint, 4> quad_points(double hx, double hy) {
    std::array<QuadPoint, 4> pts;
    const double gp[2] = {-kGauss, kGauss};
    int q = 0;
    for (double eta : gp) {
        for (double xi : gp) {
            QuadPoint& p = pts[q++];
            p.xi = xi;
            p.eta = eta;
            // CCW: (-,-), (+,-), (+,+), (-,+)
            p.shape = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                       0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
            const std::array<double, 4> dxi = {-0.25 * (1 - eta), 0.25 * (1 - eta),
                                               0.25 * (1 + eta), -0.25 * (1 + eta)};
            const std::array<double, 4> deta = {-0.25 * (1 - xi), -0.25 * (1 + xi),
                                                0.25 * (1 + xi), 0.25 * (1 - xi)};
            for (int a = 0; a < 4; ++a) {
                p.dx[a] = dxi[a] * 2.0 / hx;
                p.dy[a] = deta[a] * 2.0 / hy;
            }
        }
    }
    return pts;
}

}  // namespace

double smooth_step(double rho, double beta, double eta) {
    return (std::tanh(beta * eta) + std::tanh(beta * (rho - eta))) /
           (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

double smooth_step_derivative(double rho, double beta, double eta) {
    const double th = std::tanh(beta * (rho - eta));
    return beta * (1.0 - th * th) /
           (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

double flow_coefficient(double rho_bar, const FlowParams& p) {
    // written so both endpoints are exact: H(1)=1 makes the first term
    // vanish identically instead of cancelling against 1
    const double h = smooth_step(rho_bar, p.beta_k, p.eta_k);
    return p.kv * ((1.0 - p.contrast) * (1.0 - h) + p.contrast);
}

double drainage_coefficient(double rho_bar, const FlowParams& p) {
    return p.ds * smooth_step(rho_bar, p.beta_d, p.eta_d);
}

std::pair<double, double> flow_partials(double rho_bar, const FlowParams& p) {
    const double dk = -p.kv * (1.0 - p.contrast) * smooth_step_derivative(rho_bar, p.beta_k, p.eta_k);
    const double dd = p.ds * smooth_step_derivative(rho_bar, p.beta_d, p.eta_d);
    return {dk, dd};
}

Eigen::Matrix4d element_diffusion(double hx, double hy) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    const double detj = 0.25 * hx * hy;
    for (const QuadPoint& q : quad_points(hx, hy))
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                m(a, b) += detj * (q.dx[a] * q.dx[b] + q.dy[a] * q.dy[b]);
    return m;
}

Eigen::Matrix4d element_mass(double hx, double hy) {
    // Row-summed (lumped) mass: keeps the assembled diffusion-reaction
    // operator an M-matrix for arbitrarily strong drainage, so the
    // discrete maximum principle holds unconditionally. Row sums match
    // the consistent matrix exactly (element area / 4 per node).
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    const double detj = 0.25 * hx * hy;
    for (const QuadPoint& q : quad_points(hx, hy))
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                m(a, a) += detj * q.shape[a] * q.shape[b];
    return m;
}

Eigen::Matrix<double, 8, 4> element_coupling(double hx, double hy, double t) {
    Eigen::Matrix<double, 8, 4> m = Eigen::Matrix<double, 8, 4>::Zero();
    const double detj = 0.25 * hx * hy;
    for (const QuadPoint& q : quad_points(hx, hy)) {
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                m(2 * a, b) += t * detj * q.shape[a] * q.dx[b];
                m(2 * a + 1, b) += t * detj * q.shape[a] * q.dy[b];
            }
        }
    }
    return m;
}

SparseMatrix assemble_flow(const MeshGrid& mesh, const Vector& rho_bar, const FlowParams& p) {
    const Eigen::Matrix4d diff = element_diffusion(mesh.hx(), mesh.hy());
    const Eigen::Matrix4d mass = element_mass(mesh.hx(), mesh.hy());

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(mesh.num_elems()) * 16);
    for (int e = 0; e < mesh.num_elems(); ++e) {
        const double k = flow_coefficient(rho_bar[e], p);
        const double d = drainage_coefficient(rho_bar[e], p);
        const auto dofs = mesh.pressure_dofs(e);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                entries.emplace_back(dofs[a], dofs[b], k * diff(a, b) + d * mass(a, b));
    }
    SparseMatrix A(mesh.num_nodes(), mesh.num_nodes());
    A.setFromTriplets(entries.begin(), entries.end());
    A.makeCompressed();
    return A;
}

SparseMatrix assemble_coupling(const MeshGrid& mesh) {
    const Eigen::Matrix<double, 8, 4> te = element_coupling(mesh.hx(), mesh.hy(), mesh.thickness);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(mesh.num_elems()) * 32);
    for (int e = 0; e < mesh.num_elems(); ++e) {
        const auto pdofs = mesh.pressure_dofs(e);
        const auto udofs = mesh.displacement_dofs(e);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 4; ++b)
                entries.emplace_back(udofs[a], pdofs[b], te(a, b));
    }
    SparseMatrix T(2 * mesh.num_nodes(), mesh.num_nodes());
    T.setFromTriplets(entries.begin(), entries.end());
    T.makeCompressed();
    return T;
}

void solve_pressure(const ProblemModel& model, const SparseMatrix& coupling,
                    const Vector& rho_bar, const FlowParams& p, double p_in,
                    PressureState& out) {
    const MeshGrid& mesh = model.mesh;
    const int nn = mesh.num_nodes();

    if (model.tags.pressure_input_nodes.empty() && model.tags.zero_pressure_nodes.empty())
        throw SolverError("pressure system is singular: no Dirichlet nodes");

    out.flow_matrix = assemble_flow(mesh, rho_bar, p);

    Vector dirichlet = Vector::Constant(nn, std::nan(""));
    for (int n : model.tags.pressure_input_nodes) dirichlet[n] = p_in;
    for (int n : model.tags.zero_pressure_nodes) dirichlet[n] = 0.0;

    out.free_nodes.clear();
    out.node_to_free.assign(nn, -1);
    for (int n = 0; n < nn; ++n) {
        if (std::isnan(dirichlet[n])) {
            out.node_to_free[n] = static_cast<int>(out.free_nodes.size());
            out.free_nodes.push_back(n);
        }
    }
    const int nf = static_cast<int>(out.free_nodes.size());

    out.pressure = Vector::Zero(nn);
    for (int n = 0; n < nn; ++n)
        if (!std::isnan(dirichlet[n])) out.pressure[n] = dirichlet[n];

    if (nf > 0) {
        // Reduced system A_ff p_f = -A_fc p_c.
        std::vector<Eigen::Triplet<double>> entries;
        Vector rhs = Vector::Zero(nf);
        for (int col = 0; col < out.flow_matrix.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(out.flow_matrix, col); it; ++it) {
                const int rf = out.node_to_free[it.row()];
                const int cf = out.node_to_free[static_cast<int>(it.col())];
                if (rf < 0) continue;
                if (cf >= 0)
                    entries.emplace_back(rf, cf, it.value());
                else
                    rhs[rf] -= it.value() * out.pressure[it.col()];
            }
        }
        SparseMatrix aff(nf, nf);
        aff.setFromTriplets(entries.begin(), entries.end());
        aff.makeCompressed();

        out.factorization.compute(aff);
        if (out.factorization.info() != Eigen::Success)
            throw SolverError("flow matrix factorization failed");
        Vector pf = out.factorization.solve(rhs);

        const double rhs_norm = rhs.norm();
        if (rhs_norm > 0) {
            // normwise backward error |r|/(|b| + |A|*|x|): attainable even
            // when the high-contrast system makes |A|*|x| >> |b|; equals the
            // plain relative residual for well-conditioned systems
            double anorm = 0.0;
            if (nf > 0) anorm = Vector(aff.cwiseAbs() * Vector::Ones(nf)).maxCoeff();
            auto denom = [&] { return rhs_norm + anorm * pf.norm(); };
            for (int pass = 0; pass < 5; ++pass) {
                const Vector res = rhs - aff * pf;
                if (res.norm() <= 1e-10 * denom()) break;
                pf += out.factorization.solve(res);
            }
            if ((aff * pf - rhs).norm() > 1e-10 * denom())
                throw SolverError("pressure solve residual exceeds tolerance");
        }

        for (int i = 0; i < nf; ++i) out.pressure[out.free_nodes[i]] = pf[i];
    }

    // Discrete maximum principle for the diffusion-reaction operator.
    const double tol = 1e-9 * std::max(1.0, p_in);
    if (out.pressure.minCoeff() < -tol || out.pressure.maxCoeff() > p_in + tol)
        throw SolverError("pressure field violates the discrete maximum principle");

    out.force = -(coupling * out.pressure);
}

Vector flow_adjoint(const PressureState& state, const Vector& rhs) {
    const int nf = static_cast<int>(state.free_nodes.size());
    Vector rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = rhs[state.free_nodes[i]];
    const Vector lf = state.factorization.solve(rf);
    Vector lambda = Vector::Zero(rhs.size());
    for (int i = 0; i < nf; ++i) lambda[state.free_nodes[i]] = lf[i];
    return lambda;
}

}  // namespace pneutop

#include "pneutop/fields.hpp"

#include <cmath>
#include <vector>

namespace pneutop {

FilterOperator::FilterOperator(const MeshGrid& mesh, double radius) : radius_(radius) {
    const int ne = mesh.num_elems();
    const double hx = mesh.hx(), hy = mesh.hy();
    const int span_x = static_cast<int>(std::ceil(radius / hx));
    const int span_y = static_cast<int>(std::ceil(radius / hy));

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<size_t>(ne) * (2 * span_x + 1) * (2 * span_y + 1) / 2);

    // Uniform element volumes cancel in the normalization.
    for (int ey = 0; ey < mesh.ney; ++ey) {
        for (int ex = 0; ex < mesh.nex; ++ex) {
            const int j = mesh.elem_index(ex, ey);
            double wsum = 0;
            const size_t row_begin = entries.size();
            for (int ky = std::max(0, ey - span_y); ky <= std::min(mesh.ney - 1, ey + span_y); ++ky) {
                for (int kx = std::max(0, ex - span_x); kx <= std::min(mesh.nex - 1, ex + span_x); ++kx) {
                    const double d = std::hypot((kx - ex) * hx, (ky - ey) * hy);
                    const double w = 1.0 - d / radius;
                    if (w <= 0) continue;
                    entries.emplace_back(j, mesh.elem_index(kx, ky), w);
                    wsum += w;
                }
            }
            for (size_t t = row_begin; t < entries.size(); ++t)
                entries[t] = {entries[t].row(), entries[t].col(), entries[t].value() / wsum};
        }
    }

    weights_.resize(ne, ne);
    weights_.setFromTriplets(entries.begin(), entries.end());
    weights_.makeCompressed();
}

double project(double rho_tilde, double beta, double eta) {
    const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
    return (std::tanh(beta * eta) + std::tanh(beta * (rho_tilde - eta))) / denom;
}

double project_derivative(double rho_tilde, double beta, double eta) {
    const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
    const double th = std::tanh(beta * (rho_tilde - eta));
    return beta * (1.0 - th * th) / denom;
}

Vector project(const Vector& rho_tilde, double beta, double eta) {
    return rho_tilde.unaryExpr([=](double v) { return project(v, beta, eta); });
}

Vector project_derivative(const Vector& rho_tilde, double beta, double eta) {
    return rho_tilde.unaryExpr([=](double v) { return project_derivative(v, beta, eta); });
}

RobustTriplet make_triplet(const Vector& rho, const FilterOperator& filter, double beta,
                           double delta_eta, const std::vector<char>& is_passive) {
    RobustTriplet t;
    t.beta = beta;
    t.eta_eroded = 0.5 + delta_eta;
    t.eta_intermediate = 0.5;
    t.eta_dilated = 0.5 - delta_eta;
    t.rho_tilde = filter.apply(rho);
    t.eroded = project(t.rho_tilde, beta, t.eta_eroded);
    t.intermediate = project(t.rho_tilde, beta, t.eta_intermediate);
    t.dilated = project(t.rho_tilde, beta, t.eta_dilated);
    for (size_t e = 0; e < is_passive.size(); ++e) {
        if (!is_passive[e]) continue;
        t.eroded[e] = t.intermediate[e] = t.dilated[e] = 0.0;
    }
    return t;
}

Vector chain_rule(const Vector& dfdrb, const Vector& rho_tilde, double beta, double eta,
                  const FilterOperator& filter, const std::vector<char>& is_passive) {
    Vector scaled = dfdrb.cwiseProduct(project_derivative(rho_tilde, beta, eta));
    for (size_t e = 0; e < is_passive.size(); ++e)
        if (is_passive[e]) scaled[e] = 0.0;
    Vector dfdr = filter.apply_transpose(scaled);
    for (size_t e = 0; e < is_passive.size(); ++e)
        if (is_passive[e]) dfdr[e] = 0.0;
    return dfdr;
}

}  // namespace pneutop

#include "pneutop/mma.hpp"

#include <cmath>
#include <cstdio>

#include "pneutop/flow.hpp"

namespace pneutop {

MmaSolver::MmaSolver(int n, int m, double xmin, double xmax)
    : n_(n), m_(m), xmin_(xmin), xmax_(xmax) {
    a_ = Vector::Zero(m_);
    c_ = Vector::Constant(m_, 1000.0);
    reset();
}

void MmaSolver::reset() {
    iter_ = 0;
    low_ = Vector::Constant(n_, xmin_);
    upp_ = Vector::Constant(n_, xmax_);
    xold1_ = Vector::Zero(n_);
    xold2_ = Vector::Zero(n_);
}

void MmaSolver::set_constraint_scalars(const Vector& a, const Vector& c) {
    a_ = a;
    c_ = c;
}

void MmaSolver::set_asymptote_params(double init, double shrink, double grow) {
    asym_init_ = init;
    asym_shrink_ = shrink;
    asym_grow_ = grow;
}

void MmaSolver::update(Vector& x, const Vector& df0dx, const Vector& g,
                       const Eigen::MatrixXd& dgdx, const Vector& alpha, const Vector& beta) {
    ++iter_;
    generate_subproblem(x, df0dx, g, dgdx, alpha, beta);
    // The box must lie strictly inside the asymptotes for the rational
    // approximation to stay bounded.
    Vector alpha_c(n_), beta_c(n_);
    for (int i = 0; i < n_; ++i) {
        alpha_c[i] = std::max(alpha[i], low_[i] + 0.1 * (x[i] - low_[i]));
        beta_c[i] = std::min(beta[i], upp_[i] - 0.1 * (upp_[i] - x[i]));
    }
    xold2_ = xold1_;
    xold1_ = x;
    solve_dual(x, alpha_c, beta_c);
}

void MmaSolver::generate_subproblem(const Vector& x, const Vector& df0dx, const Vector& g,
                                    const Eigen::MatrixXd& dgdx, const Vector& alpha,
                                    const Vector& beta) {
    (void)alpha;
    (void)beta;
    const double range = xmax_ - xmin_;
    if (iter_ <= 2) {
        low_ = x.array() - asym_init_ * range;
        upp_ = x.array() + asym_init_ * range;
    } else {
        for (int i = 0; i < n_; ++i) {
            const double osc = (x[i] - xold1_[i]) * (xold1_[i] - xold2_[i]);
            const double gamma = osc < 0 ? asym_shrink_ : (osc > 0 ? asym_grow_ : 1.0);
            low_[i] = x[i] - gamma * (xold1_[i] - low_[i]);
            upp_[i] = x[i] + gamma * (upp_[i] - xold1_[i]);
            low_[i] = std::clamp(low_[i], x[i] - 10.0 * range, x[i] - 0.01 * range);
            upp_[i] = std::clamp(upp_[i], x[i] + 0.01 * range, x[i] + 10.0 * range);
        }
    }

    p0_.resize(n_);
    q0_.resize(n_);
    pij_.resize(m_, n_);
    qij_.resize(m_, n_);
    // Svanberg's convexification: one-sided linearization plus a small
    // symmetric term 0.001|df| + raa0/xmami on both branches, applied to the
    // objective and every constraint alike.
    const double raa0 = 1e-5;
    const double xmami = std::max(range, 1e-5);
    for (int i = 0; i < n_; ++i) {
        const double du = upp_[i] - x[i];
        const double dl = x[i] - low_[i];
        const double reg0 = 0.001 * std::abs(df0dx[i]) + raa0 / xmami;
        p0_[i] = du * du * (std::max(0.0, df0dx[i]) + reg0);
        q0_[i] = dl * dl * (std::max(0.0, -df0dx[i]) + reg0);
        for (int j = 0; j < m_; ++j) {
            const double reg = 0.001 * std::abs(dgdx(j, i)) + raa0 / xmami;
            pij_(j, i) = du * du * (std::max(0.0, dgdx(j, i)) + reg);
            qij_(j, i) = dl * dl * (std::max(0.0, -dgdx(j, i)) + reg);
        }
    }

    b_.resize(m_);
    for (int j = 0; j < m_; ++j) {
        double s = -g[j];
        for (int i = 0; i < n_; ++i)
            s += pij_(j, i) / (upp_[i] - x[i]) + qij_(j, i) / (x[i] - low_[i]);
        b_[j] = s;
    }
}

// Primal-dual interior-point solve of the convex separable subproblem
// (Svanberg's standard scheme, condensed to an (m+1)x(m+1) Newton system).
void MmaSolver::solve_dual(Vector& x, const Vector& alpha, const Vector& beta) {
    const double a0 = 1.0;
    const Vector d = Vector::Ones(m_);

    x = 0.5 * (alpha + beta);
    Vector y = Vector::Ones(m_);
    double zz = 1.0;
    lam_ = Vector::Ones(m_);
    Vector xsi = (1.0 / (x - alpha).array()).max(1.0);
    Vector eta = (1.0 / (beta - x).array()).max(1.0);
    mu_ = (0.5 * c_.array()).max(1.0);
    double zet = 1.0;
    Vector s = Vector::Ones(m_);

    const double epsimin = 1e-9 * std::sqrt(m_ + n_);
    double epsi = 1.0;

    auto residual = [&](const Vector& xv, const Vector& yv, double zv, const Vector& lamv,
                        const Vector& xsiv, const Vector& etav, const Vector& muv, double zetv,
                        const Vector& sv, double eps, double& norm2, double& maxabs) {
        const Eigen::ArrayXd ux1 = (upp_ - xv).array();
        const Eigen::ArrayXd xl1 = (xv - low_).array();
        const Eigen::ArrayXd plam = p0_.array() + (pij_.transpose() * lamv).array();
        const Eigen::ArrayXd qlam = q0_.array() + (qij_.transpose() * lamv).array();
        const Vector gvec = pij_ * (1.0 / ux1).matrix() + qij_ * (1.0 / xl1).matrix();

        const Eigen::ArrayXd rex =
            plam / (ux1 * ux1) - qlam / (xl1 * xl1) - xsiv.array() + etav.array();
        const Eigen::ArrayXd rey = c_.array() + d.array() * yv.array() - muv.array() - lamv.array();
        const double rez = a0 - zetv - a_.dot(lamv);
        const Eigen::ArrayXd relam = gvec.array() - a_.array() * zv - yv.array() + sv.array() - b_.array();
        const Eigen::ArrayXd rexsi = xsiv.array() * (xv - alpha).array() - eps;
        const Eigen::ArrayXd reeta = etav.array() * (beta - xv).array() - eps;
        const Eigen::ArrayXd remu = muv.array() * yv.array() - eps;
        const double rezet = zetv * zv - eps;
        const Eigen::ArrayXd res = lamv.array() * sv.array() - eps;

        norm2 = rex.matrix().squaredNorm() + rey.matrix().squaredNorm() + rez * rez +
                relam.matrix().squaredNorm() + rexsi.matrix().squaredNorm() +
                reeta.matrix().squaredNorm() + remu.matrix().squaredNorm() + rezet * rezet +
                res.matrix().squaredNorm();
        norm2 = std::sqrt(norm2);
        maxabs = std::max({rex.abs().maxCoeff(), rey.abs().maxCoeff(), std::abs(rez),
                           relam.abs().maxCoeff(), rexsi.abs().maxCoeff(),
                           reeta.abs().maxCoeff(), remu.abs().maxCoeff(), std::abs(rezet),
                           res.abs().maxCoeff()});
    };

    while (epsi > epsimin) {
        double residunorm = 0, residumax = 0;
        residual(x, y, zz, lam_, xsi, eta, mu_, zet, s, epsi, residunorm, residumax);

        int ittt = 0;
        while (residumax > 0.9 * epsi && ittt < 200) {
            ++ittt;
            const Eigen::ArrayXd ux1 = (upp_ - x).array();
            const Eigen::ArrayXd xl1 = (x - low_).array();
            const Eigen::ArrayXd ux2 = ux1 * ux1;
            const Eigen::ArrayXd xl2 = xl1 * xl1;
            const Eigen::ArrayXd ux3 = ux1 * ux2;
            const Eigen::ArrayXd xl3 = xl1 * xl2;
            const Eigen::ArrayXd xa = (x - alpha).array();
            const Eigen::ArrayXd bx = (beta - x).array();

            const Eigen::ArrayXd plam = p0_.array() + (pij_.transpose() * lam_).array();
            const Eigen::ArrayXd qlam = q0_.array() + (qij_.transpose() * lam_).array();
            const Vector gvec = pij_ * (1.0 / ux1).matrix() + qij_ * (1.0 / xl1).matrix();

            Eigen::MatrixXd gg(m_, n_);
            for (int j = 0; j < m_; ++j)
                gg.row(j) = (pij_.row(j).transpose().array() / ux2 -
                             qij_.row(j).transpose().array() / xl2).matrix().transpose();

            const Eigen::ArrayXd dpsidx = plam / ux2 - qlam / xl2;
            const Eigen::ArrayXd delx = dpsidx - epsi / xa + epsi / bx;
            const Eigen::ArrayXd dely =
                c_.array() + d.array() * y.array() - lam_.array() - epsi / y.array();
            const double delz = a0 - a_.dot(lam_) - epsi / zz;
            const Eigen::ArrayXd dellam =
                gvec.array() - a_.array() * zz - y.array() - b_.array() + epsi / lam_.array();

            const Eigen::ArrayXd diagx =
                2.0 * (plam / ux3 + qlam / xl3) + xsi.array() / xa + eta.array() / bx;
            const Eigen::ArrayXd diagy = d.array() + mu_.array() / y.array();
            const Eigen::ArrayXd diaglam = s.array() / lam_.array();
            const Eigen::ArrayXd diaglamyi = diaglam + 1.0 / diagy;

            // condensed (m+1) system in (dlam, dz)
            const Vector blam = (dellam + dely / diagy).matrix() - gg * (delx / diagx).matrix();
            Eigen::MatrixXd alam =
                gg * (1.0 / diagx).matrix().asDiagonal() * gg.transpose();
            alam.diagonal() += diaglamyi.matrix();

            Eigen::MatrixXd aa(m_ + 1, m_ + 1);
            aa.topLeftCorner(m_, m_) = alam;
            aa.topRightCorner(m_, 1) = a_;
            aa.bottomLeftCorner(1, m_) = a_.transpose();
            aa(m_, m_) = -zet / zz;
            Vector bb(m_ + 1);
            bb.head(m_) = blam;
            bb[m_] = delz;

            const Vector solut = aa.fullPivLu().solve(bb);
            const Vector dlam = solut.head(m_);
            const double dz = solut[m_];
            const Eigen::ArrayXd dx =
                -delx / diagx - (gg.transpose() * dlam).array() / diagx;
            const Eigen::ArrayXd dy = -dely / diagy + dlam.array() / diagy;
            const Eigen::ArrayXd dxsi = -xsi.array() + epsi / xa - xsi.array() * dx / xa;
            const Eigen::ArrayXd deta = -eta.array() + epsi / bx + eta.array() * dx / bx;
            const Eigen::ArrayXd dmu =
                -mu_.array() + epsi / y.array() - mu_.array() * dy / y.array();
            const double dzet = -zet + epsi / zz - zet * dz / zz;
            const Eigen::ArrayXd ds =
                -s.array() + epsi / lam_.array() - s.array() * dlam.array() / lam_.array();

            // step length: keep all positive variables positive
            double stmax = 1.0;
            auto bound = [&](double val, double dval) {
                if (dval < 0) stmax = std::max(stmax, -1.01 * dval / val);
            };
            for (int j = 0; j < m_; ++j) {
                bound(y[j], dy[j]);
                bound(lam_[j], dlam[j]);
                bound(mu_[j], dmu[j]);
                bound(s[j], ds[j]);
            }
            bound(zz, dz);
            bound(zet, dzet);
            for (int i = 0; i < n_; ++i) {
                bound(xsi[i], dxsi[i]);
                bound(eta[i], deta[i]);
                bound(xa[i], dx[i]);
                bound(bx[i], -dx[i]);
            }
            double steg = 1.0 / stmax;

            const Vector xold = x, yold = y, lamold = lam_, xsiold = xsi, etaold = eta,
                         muold = mu_, sold = s;
            const double zold = zz, zetold = zet;

            double newnorm = 2.0 * residunorm;
            int itto = 0;
            while (newnorm > residunorm && itto < 50) {
                ++itto;
                x = xold + steg * dx.matrix();
                y = yold + steg * dy.matrix();
                zz = zold + steg * dz;
                lam_ = lamold + steg * dlam;
                xsi = xsiold + steg * dxsi.matrix();
                eta = etaold + steg * deta.matrix();
                mu_ = muold + steg * dmu.matrix();
                zet = zetold + steg * dzet;
                s = sold + steg * ds.matrix();
                double maxabs = 0;
                residual(x, y, zz, lam_, xsi, eta, mu_, zet, s, epsi, newnorm, maxabs);
                residumax = maxabs;
                steg *= 0.5;
            }
            residunorm = newnorm;
        }
        if (ittt >= 200) {
#ifdef PNEUTOP_MMA_DIAG
            std::fprintf(stderr, "[mma-diag] stall epsi=%.1e residumax=%.3e\n", epsi, residumax);
#endif
            // Newton stalled at the numerical floor for this barrier; tighter
            // barriers cannot improve the point, so accept it unless the
            // residual indicates a genuine failure.
            if (residumax > 1e-2)
                throw SolverError("MMA subproblem did not converge: residual " +
                                  std::to_string(residumax));
            break;
        }
        epsi *= 0.1;
    }
    y_ = y;
    z_ = zz;
#ifdef PNEUTOP_MMA_DIAG
    std::fprintf(stderr, "[mma-diag] z=%.6g", zz);
    for (int j = 0; j < m_; ++j)
        std::fprintf(stderr, " lam%d=%.4g y%d=%.4g", j, lam_[j], j, y[j]);
    std::fprintf(stderr, "\n");
#endif
}

}  // namespace pneutop

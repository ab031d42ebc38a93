#include "pitik/solver.hpp"

#include <cmath>

namespace pitik {

namespace {

double smooth_value(const ForwardOperator& F, const Fidelity& fid, const GridFunction& u, GridFunction& g) {
    g = apply(F, u);
    return fidelity_value(fid, g);
}

GridFunction smooth_gradient(const ForwardOperator& F, const Fidelity& fid, const GridFunction& g) {
    return apply_adjoint(F, fidelity_gradient(fid, g));
}

double lipschitz_estimate(const ForwardOperator& F, const Fidelity& fid, const GridFunction& g0) {
    const double n2 = F.norm() * F.norm();
    if (std::holds_alternative<SquaredL2Fidelity>(fid)) return 2.0 * n2;
    const auto& p = std::get<PoissonFidelity>(fid);
    const Eigen::ArrayXd rho = p.counts.density().values().array() + p.sigma;
    const double global = n2 * rho.maxCoeff() / (p.sigma * p.sigma);
    const double local = n2 * (rho / (g0.values().array().max(0.0) + p.sigma).square()).maxCoeff();
    return std::max(1e-12, std::min(global, local));
}

// r - ln(1 + r) without cancellation for small r.
double r_minus_log1p(double r) {
    if (std::abs(r) < 1e-3) return r * r * (0.5 - r * (1.0 / 3.0 - r * (0.25 - r / 5.0)));
    return r - std::log1p(r);
}

// f(gy + dg) - f(gy) - <grad f(gy), dg>, evaluated cellwise.
double smooth_bregman(const Fidelity& fid, const GridFunction& dg, const GridFunction& gy) {
    const double h = dg.domain().cell_volume();
    if (std::holds_alternative<SquaredL2Fidelity>(fid)) return h * dg.values().squaredNorm();
    const auto& p = std::get<PoissonFidelity>(fid);
    const Eigen::VectorXd rho = p.counts.density().values();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < dg.size(); ++k)
        acc += (rho[k] + p.sigma) * r_minus_log1p(dg[k] / (gy[k] + p.sigma));
    return h * acc;
}

// Objective difference J(z) - J(x), evaluated cellwise so that it stays
// accurate when both values agree to many digits.
// The image difference K(z - x) is formed directly, not as gz - gx.
double objective_difference(const ForwardOperator& F, const Fidelity& fid, double alpha, const Penalty& pen,
                            const GridFunction& z, const GridFunction& x, const GridFunction& gx) {
    const double h = z.domain().cell_volume();
    const GridFunction dg = apply_multiplier(F.multiplier(), z - x);
    const double df = inner(fidelity_gradient(fid, gx), dg) + smooth_bregman(fid, dg, gx);
    double dr = 0.0;
    if (pen.kind() == Penalty::Kind::Quadratic) {
        dr = inner(z - x, z + x + (-2.0) * pen.u0());
    } else {
        for (Eigen::Index k = 0; k < z.size(); ++k) {
            const double a = z[k], b = x[k];
            if (a > 0.0 && b > 0.0) dr += (a - b) * std::log(a) + b * std::log1p((a - b) / b);
            else dr += (a > 0.0 ? a * std::log(a) : 0.0) - (b > 0.0 ? b * std::log(b) : 0.0);
        }
        dr *= h;
    }
    return df + alpha * dr;
}

}  // namespace

Fidelity poisson_fidelity(const PointData& data, double sigma) {
    if (!(sigma > 0.0)) throw Error("Poisson fidelity in the solver needs sigma > 0");
    return PoissonFidelity{bin_counts(data), sigma};
}

double fidelity_value(const Fidelity& fid, const GridFunction& g) {
    if (const auto* sq = std::get_if<SquaredL2Fidelity>(&fid)) return squared_l2_fidelity(g, sq->gobs);
    const auto& p = std::get<PoissonFidelity>(fid);
    if (!g.nonnegative()) return kInf;
    return shifted_neg_loglik(g, p.counts, p.sigma);
}

GridFunction fidelity_gradient(const Fidelity& fid, const GridFunction& g) {
    if (const auto* sq = std::get_if<SquaredL2Fidelity>(&fid)) return 2.0 * (g - sq->gobs);
    const auto& p = std::get<PoissonFidelity>(fid);
    const Eigen::ArrayXd rho = p.counts.density().values().array();
    GridFunction out = g;
    out.values() = (1.0 - (rho + p.sigma) / (g.values().array() + p.sigma)).matrix();
    return out;
}

double objective(const ForwardOperator& F, const PointData& data, double sigma, double alpha, const Penalty& pen,
                 const GridFunction& u) {
    if (!(alpha > 0.0)) throw Error("alpha must be positive");
    const double r = penalty_value(pen, u);
    if (!std::isfinite(r)) return kInf;
    const GridFunction g = apply(F, u);
    if (!g.nonnegative()) return kInf;
    return shifted_neg_loglik(g, data, sigma) + alpha * r;
}

double objective(const ForwardOperator& F, const Fidelity& fid, double alpha, const Penalty& pen,
                 const GridFunction& u) {
    if (!(alpha > 0.0)) throw Error("alpha must be positive");
    const double r = penalty_value(pen, u);
    if (!std::isfinite(r)) return kInf;
    return fidelity_value(fid, apply(F, u)) + alpha * r;
}

Reconstruction minimize_tikhonov(const ForwardOperator& F, const Fidelity& fid, double alpha, const Penalty& pen,
                                 const SolverOptions& opts, const std::optional<GridFunction>& start) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be positive and finite");
    if (!(opts.rel_tolerance > 0.0) || opts.max_iterations < 1) throw Error("invalid solver options");
    if (!(opts.backtracking > 0.0 && opts.backtracking < 1.0)) throw Error("backtracking factor must lie in (0,1)");

    GridFunction x = pen.project(start ? *start : pen.initial_point());
    GridFunction gx;
    double fx = smooth_value(F, fid, x, gx);
    if (!std::isfinite(fx)) throw Error("solver start point has infinite objective");
    double Fx = fx + alpha * penalty_value(pen, x);

    double L = lipschitz_estimate(F, fid, gx);
    // Stationarity is measured at a fixed step; the working L may grow
    // through backtracking and would shrink the residual by rounding.
    const double L_kkt = L;
    GridFunction y = x, gy = gx;
    double fy = fx;
    double theta = 1.0;

    Reconstruction rec{x, alpha, Fx, 0, false, kInf};
    auto kkt_at = [&](const GridFunction& u, const GridFunction& gu) {
        const GridFunction grad = smooth_gradient(F, fid, gu);
        const GridFunction p = prox(pen, u - (1.0 / L_kkt) * grad, alpha / L_kkt);
        return L_kkt * l2_norm(u - p);
    };

    for (int it = 1; it <= opts.max_iterations; ++it) {
        rec.iterations = it;
        const GridFunction grad = smooth_gradient(F, fid, gy);
        GridFunction z, gz;
        double fz = kInf;
        for (int bt = 0; bt < 200; ++bt) {
            z = prox(pen, y - (1.0 / L) * grad, alpha / L);
            fz = smooth_value(F, fid, z, gz);
            if (std::isfinite(fz)) {
                const GridFunction d = z - y;
                const double nd = l2_norm(d);
                if (smooth_bregman(fid, apply_multiplier(F.multiplier(), d), gy) <= 0.5 * L * nd * nd * (1.0 + 1e-12))
                    break;
            }
            L /= opts.backtracking;
        }
        if (!std::isfinite(fz)) break;
        const double Fz = fz + alpha * penalty_value(pen, z);
        const double delta = objective_difference(F, fid, alpha, pen, z, x, gx);

        if (delta > 0.0) {
            // Momentum overshoot: restart from the last accepted iterate.
            if (theta > 1.0) {
                theta = 1.0;
                y = x;
                gy = gx;
                fy = fx;
                continue;
            }
            // A plain step that passed the descent test cannot increase the
            // objective except by rounding: no further progress is possible.
            rec.kkt_residual = kkt_at(x, gx);
            rec.converged = rec.kkt_residual <= 10.0 * opts.rel_tolerance * (1.0 + std::abs(Fx));
            break;
        }

        const double decrease = -delta / (1.0 + std::abs(Fz));
        const GridFunction x_prev = x;
        x = z;
        gx = gz;
        fx = fz;
        Fx = Fz;
        if (opts.acceleration) {
            const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            y = pen.project(x + ((theta - 1.0) / theta_next) * (x - x_prev));
            theta = theta_next;
            fy = smooth_value(F, fid, y, gy);
            if (!std::isfinite(fy)) {
                y = x;
                gy = gx;
                fy = fx;
                theta = 1.0;
            }
        } else {
            y = x;
            gy = gx;
            fy = fx;
        }

        if (decrease < opts.rel_tolerance) {
            rec.kkt_residual = kkt_at(x, gx);
            if (rec.kkt_residual <= 10.0 * opts.rel_tolerance * (1.0 + std::abs(Fx))) {
                rec.converged = true;
                break;
            }
        }
        L *= 0.9;
    }
    rec.u_alpha = x;
    rec.objective = Fx;
    if (!rec.converged) rec.kkt_residual = kkt_at(x, gx);
    return rec;
}

Reconstruction minimize_tikhonov(const ForwardOperator& F, const PointData& data, double sigma, double alpha,
                                 const Penalty& pen, const SolverOptions& opts) {
    return minimize_tikhonov(F, poisson_fidelity(data, sigma), alpha, pen, opts);
}

}  // namespace pitik

#include "pitik/fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace pitik {

namespace {

void require_nonnegative(const GridFunction& g, const char* what) {
    if (!g.nonnegative()) throw Error(std::string(what) + " must be nonnegative");
}

void require_sigma(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error("offset sigma must be finite and >= 0");
}

// ln(g+sigma) with -inf admitted where g+sigma = 0.
Eigen::VectorXd log_shift(const GridFunction& g, double sigma) {
    return (g.values().array() + sigma).log().matrix();
}

double sigma_term(const GridFunction& g, double sigma) {
    if (sigma == 0.0) return 0.0;
    return sigma * g.domain().cell_volume() * log_shift(g, sigma).sum();
}

}  // namespace

double shifted_neg_loglik(const GridFunction& g, const PointData& data, double sigma) {
    require_nonnegative(g, "intensity g");
    require_sigma(sigma);
    if (g.domain() != data.domain) throw Error("intensity and data live on different domains");
    const Eigen::VectorXd lg = log_shift(g, sigma);
    double acc = 0.0;
    for (const auto& x : data.points) {
        const double v = lg[data.domain.cell_of(x)];
        if (!std::isfinite(v)) return kInf;
        acc += v;
    }
    return integrate(g) - acc / data.t - sigma_term(g, sigma);
}

double shifted_neg_loglik(const GridFunction& g, const BinnedCounts& counts, double sigma) {
    require_nonnegative(g, "intensity g");
    require_sigma(sigma);
    if (g.domain() != counts.domain) throw Error("intensity and counts live on different domains");
    const Eigen::VectorXd lg = log_shift(g, sigma);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < lg.size(); ++k) {
        if (counts.counts[k] == 0.0) continue;
        if (!std::isfinite(lg[k])) return kInf;
        acc += counts.counts[k] * lg[k];
    }
    return integrate(g) - acc / counts.t - sigma_term(g, sigma);
}

double shifted_kl(const GridFunction& g, const GridFunction& gdag, double sigma) {
    require_same_domain(g, gdag);
    require_nonnegative(g, "g");
    require_nonnegative(gdag, "gdag");
    require_sigma(sigma);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double a = g[k] + sigma;
        const double b = gdag[k] + sigma;
        if (b <= 0.0) continue;
        if (a <= 0.0) return kInf;
        acc += a - b - b * std::log(a / b);
    }
    return std::max(0.0, g.domain().cell_volume() * acc);
}

double kl(const GridFunction& g, const GridFunction& gdag) { return shifted_kl(g, gdag, 0.0); }

double signed_noise(const GridFunction& g, const PointData& data, const GridFunction& gdag, double sigma) {
    require_nonnegative(g, "g");
    require_sigma(sigma);
    require_same_domain(g, gdag);
    const Eigen::VectorXd raw = log_shift(g, sigma);
    if (!raw.allFinite()) throw Error("noise functional undefined where g + sigma = 0");
    const GridFunction lg(g.domain(), raw);
    return integrate_against(lg, data) - inner(lg, gdag);
}

double noise_functional_Z(const GridFunction& g, const PointData& data, const GridFunction& gdag, double sigma) {
    return std::abs(signed_noise(g, data, gdag, sigma));
}

double required_err_bound(const std::vector<GridFunction>& candidates, const PointData& data,
                          const GridFunction& gdag, double sigma) {
    const double w0 = signed_noise(gdag, data, gdag, sigma);
    double worst = 0.0;
    for (const auto& g : candidates) worst = std::max(worst, signed_noise(g, data, gdag, sigma) - w0);
    return worst;
}

double squared_l2_fidelity(const GridFunction& g, const GridFunction& gobs) {
    const double r = l2_norm(g - gobs);
    return r * r;
}

double kl_lower_bound_constant(const GridFunction& g, const GridFunction& ghat, double sigma) {
    return 4.0 / 3.0 * (g.max() + sigma) + 2.0 / 3.0 * (ghat.max() + sigma);
}

}  // namespace pitik

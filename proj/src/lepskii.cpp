#include "pitik/lepskii.hpp"

#include <cmath>

namespace pitik {

AlphaSequence alpha_sequence(double t, double tau, double r) {
    if (!(t >= std::exp(1.0))) throw Error("Lepskii sequence needs t >= e");
    if (!(r > 1.0)) throw Error("Lepskii grid ratio r must exceed 1");
    if (!(tau > 0.0)) throw Error("Lepskii threshold tau must be positive");
    AlphaSequence seq;
    const double a1 = tau * std::log(t) / std::sqrt(t);
    for (int j = 1;; ++j) {
        const double a = a1 * std::pow(r, 2.0 * j - 2.0);
        seq.alphas.push_back(a);
        if (a >= 1.0) break;
    }
    seq.m = static_cast<int>(seq.alphas.size());
    return seq;
}

double lepskii_psi(int j, double q, double C_bd, double r) {
    return 2.0 * std::pow(4.0 * C_bd, 1.0 / q) * std::pow(r, (2.0 - 2.0 * j) / q);
}

BalanceResult balance(const std::vector<GridFunction>& recs, double q, double C_bd, double r) {
    if (recs.empty()) throw Error("balance needs at least one reconstruction");
    if (!(q >= 1.0) || !(C_bd > 0.0) || !(r > 1.0)) throw Error("invalid balancing constants");
    const int m = static_cast<int>(recs.size());
    BalanceResult res;
    res.distances = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) res.distances(i, j) = res.distances(j, i) = l2_norm(recs[i] - recs[j]);
    for (int j = 1; j <= m; ++j) {
        res.psi.push_back(lepskii_psi(j, q, C_bd, r));
        res.thresholds.push_back(2.0 * res.psi.back());
    }
    res.j_bal = 1;
    for (int j = m; j >= 1; --j) {
        bool ok = true;
        for (int i = 1; i < j && ok; ++i) ok = res.distances(i - 1, j - 1) <= res.thresholds[i - 1];
        if (ok) {
            res.j_bal = j;
            break;
        }
    }
    return res;
}

ErrorFunctions error_functions(const IndexFunction& phi, double q, double C_bd, double err, double alpha) {
    if (!(alpha > 0.0)) throw Error("alpha must be positive");
    const double app = 2.0 * std::pow(2.0 * C_bd * conjugate_neg(phi, -1.0 / alpha), 1.0 / q);
    const double noi = 2.0 * std::pow(2.0 * C_bd * err / alpha, 1.0 / q);
    return {app, noi};
}

int oracle_best(const std::vector<GridFunction>& recs, const GridFunction& udag, const Penalty& pen,
                const GridFunction& ustar) {
    if (recs.empty()) throw Error("oracle_best needs at least one reconstruction");
    int best = 1;
    double bv = bregman(pen, recs[0], udag, ustar);
    for (std::size_t j = 1; j < recs.size(); ++j) {
        const double v = bregman(pen, recs[j], udag, ustar);
        if (v < bv) {
            bv = v;
            best = static_cast<int>(j) + 1;
        }
    }
    return best;
}

}  // namespace pitik

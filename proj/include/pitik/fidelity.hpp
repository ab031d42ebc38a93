#pragma once

#include "pitik/poisson.hpp"

#include <limits>
#include <vector>

namespace pitik {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// S(g) = int g - int ln(g+sigma) dG_t - sigma int ln(g+sigma); +inf when a
// data point sits where g+sigma = 0.
double shifted_neg_loglik(const GridFunction& g, const PointData& data, double sigma);
double shifted_neg_loglik(const GridFunction& g, const BinnedCounts& counts, double sigma);

// T(g, gdag) = KL(g+sigma, gdag+sigma) = int (g+s) - (gdag+s) - (gdag+s) ln((g+s)/(gdag+s)).
double shifted_kl(const GridFunction& g, const GridFunction& gdag, double sigma);
double kl(const GridFunction& g, const GridFunction& gdag);

// W(g) = int ln(g+sigma) (dG_t - gdag dx), and Z = |W|.
double signed_noise(const GridFunction& g, const PointData& data, const GridFunction& gdag, double sigma);
double noise_functional_Z(const GridFunction& g, const PointData& data, const GridFunction& gdag, double sigma);

// Smallest err >= 0 with W(g) - W(gdag) <= err over all candidate images g.
double required_err_bound(const std::vector<GridFunction>& candidates, const PointData& data,
                          const GridFunction& gdag, double sigma);

double squared_l2_fidelity(const GridFunction& g, const GridFunction& gobs);

// Coefficient c with ||g - ghat||^2 <= c * T(g, ghat).
double kl_lower_bound_constant(const GridFunction& g, const GridFunction& ghat, double sigma);

}  // namespace pitik

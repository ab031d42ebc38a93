#pragma once

#include "pitik/poisson.hpp"

#include <cstdint>
#include <vector>

namespace pitik {

// R sqrt(sum_{|j|_inf <= J} (1+|j|^2)^(-s) |<e_j, dG_t - gdag dx>|^2).
double sup_proxy(const PointData& data, const GridFunction& gdag, double s, double R, int J);
double sup_proxy(const BinnedCounts& counts, const GridFunction& gdag, double s, double R, int J);

// sum_{|j|_inf <= J} (1+|j|^2)^(-s)
double weight_sum_c1(const Domain& dom, double s, int J);
double truncation_remainder(const Domain& dom, double R, double s, int J);

struct ExpectationRow {
    double t;
    double mean;
    double std;
    double stderr_;
    double bound;  // sqrt(c1) R sqrt(||gdag||_1) / sqrt(t)
};

struct ExpectationStudy {
    std::vector<ExpectationRow> rows;
    std::vector<std::vector<double>> samples;  // per t, per replicate
    double c1 = 0.0;
    double remainder = 0.0;
};

ExpectationStudy expectation_study(const GridFunction& gdag, double s, double R, int J, const std::vector<double>& t_grid,
                                   int replicates, std::uint64_t seed);

struct TailTable {
    std::vector<double> t;
    std::vector<double> rho;
    Eigen::MatrixXd coverage;  // rows t, columns rho: P(proxy <= rho/sqrt(t))
    std::vector<int> replicates;
};

TailTable build_tail_table(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& samples,
                           const std::vector<double>& rho_grid);

double wilson_lower(double p_hat, int n, double z = 1.959963984540054);

// Smallest C >= 1 with Wilson-lower coverage >= 1 - exp(-rho/(R C)) on every
// cell with rho >= R C. C is searched up to min(1e6, rho_max / R) so that at
// least one cell is active.
double estimate_Cconc(const TailTable& tail, double R);

struct ExceedanceFit {
    std::vector<double> rho;
    std::vector<double> frequency;  // P(sqrt(t) proxy > rho), pooled over t
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool decreasing = false;
};

ExceedanceFit exceedance_fit(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& samples,
                             const std::vector<double>& rho_grid);

struct RbRow {
    double rho;
    double threshold;
    double empirical_tail;
    double exact_tail;  // NaN unless the family is {constant}
    double bound;       // exp(-rho)
};

struct RbReport {
    double mean_Z = 0.0;
    double exact_mean_Z = 0.0;  // NaN unless the family is {constant}
    double v0 = 0.0;
    double b = 0.0;
    double kappa = 0.0;
    std::vector<RbRow> rows;
};

double rb_kappa(double epsilon);
RbReport rb_bound_check(const std::vector<GridFunction>& family, const GridFunction& gdag, double t, int replicates,
                        double epsilon, std::uint64_t seed, const std::vector<double>& rho_grid);

// Exact quantities for N ~ Poisson(lambda).
double poisson_mean_abs_dev(double lambda);
double poisson_abs_dev_tail(double lambda, double x);  // P(|N - lambda| >= x)

double log_shift_radius(double R, double sigma, double s, double calibration = 1.0);

}  // namespace pitik

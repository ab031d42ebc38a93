#pragma once

#include "pitik/grid.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace pitik {

using Rng = std::mt19937_64;

// Seed for replicate i of a study rooted at master.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t replicate) { return master ^ replicate; }

// Points of one realisation of a Poisson process with intensity t*g.
// The empirical measure is G_t = (1/t) sum_i delta_{x_i}.
struct PointData {
    Domain domain;
    double t = 1.0;
    std::vector<Point> points;

    std::size_t count() const { return points.size(); }
};

struct BinnedCounts {
    Domain domain;
    double t = 1.0;
    Eigen::VectorXd counts;

    double total() const { return counts.sum(); }
    // counts / (t h^d): piecewise-constant density of G_t.
    GridFunction density() const;
};

PointData sample_poisson(const GridFunction& gdag, double t, Rng& rng);

// (1/t) sum_i psi(x_i), psi read off the cell containing x_i.
double integrate_against(const GridFunction& psi, const PointData& data);
double integrate_against(const GridFunction& psi, const BinnedCounts& counts);

BinnedCounts bin_counts(const PointData& data, const Domain& dom);
BinnedCounts bin_counts(const PointData& data);

void write_points_csv(const std::string& path, const PointData& data);
PointData read_points_csv(const std::string& path, const Domain& dom);
void write_counts_csv(const std::string& path, const BinnedCounts& counts);

}  // namespace pitik

#pragma once

#include "pitik/fidelity.hpp"
#include "pitik/operators.hpp"
#include "pitik/penalty.hpp"

#include <optional>
#include <variant>

namespace pitik {

struct PoissonFidelity {
    BinnedCounts counts;
    double sigma = 0.1;
};

struct SquaredL2Fidelity {
    GridFunction gobs;
};

using Fidelity = std::variant<PoissonFidelity, SquaredL2Fidelity>;

Fidelity poisson_fidelity(const PointData& data, double sigma);

double fidelity_value(const Fidelity& fid, const GridFunction& g);
// L2 gradient with respect to g.
GridFunction fidelity_gradient(const Fidelity& fid, const GridFunction& g);

struct SolverOptions {
    int max_iterations = 20000;
    double rel_tolerance = 1e-10;
    double backtracking = 0.5;
    bool acceleration = true;
};

struct Reconstruction {
    GridFunction u_alpha;
    double alpha = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

double objective(const ForwardOperator& F, const PointData& data, double sigma, double alpha, const Penalty& pen,
                 const GridFunction& u);
double objective(const ForwardOperator& F, const Fidelity& fid, double alpha, const Penalty& pen,
                 const GridFunction& u);

Reconstruction minimize_tikhonov(const ForwardOperator& F, const Fidelity& fid, double alpha, const Penalty& pen,
                                 const SolverOptions& opts = {}, const std::optional<GridFunction>& start = {});
Reconstruction minimize_tikhonov(const ForwardOperator& F, const PointData& data, double sigma, double alpha,
                                 const Penalty& pen, const SolverOptions& opts = {});

}  // namespace pitik

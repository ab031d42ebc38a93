#pragma once

#include "pitik/grid.hpp"
#include "pitik/operators.hpp"

#include <optional>

namespace pitik {

// R(u) = ||u - u0||^2 (no 1/2) or R(u) = int u ln u, restricted to a box
// [lo, hi] with 0 <= lo < hi < inf.
class Penalty {
public:
    enum class Kind { Quadratic, Entropy };

    static Penalty quadratic(GridFunction u0, Box box);
    static Penalty entropy(const Domain& dom, Box box);

    Kind kind() const { return kind_; }
    const Box& box() const { return box_; }
    const Domain& domain() const { return dom_; }
    const GridFunction& u0() const { return u0_; }
    bool in_box(const GridFunction& u) const;
    GridFunction project(const GridFunction& v) const;
    // Box projection of u0 (quadratic) or of the constant 1 (entropy).
    GridFunction initial_point() const;

private:
    Kind kind_ = Kind::Quadratic;
    Domain dom_;
    Box box_;
    GridFunction u0_;
};

struct MetricConstants {
    double q;
    double C_bd;
};

double penalty_value(const Penalty& pen, const GridFunction& u);
// Canonical element of the subdifferential at udag.
GridFunction subgradient(const Penalty& pen, const GridFunction& udag);
double bregman(const Penalty& pen, const GridFunction& u, const GridFunction& udag, const GridFunction& ustar);
double bregman(const Penalty& pen, const GridFunction& u, const GridFunction& udag);
// argmin_x  (1/2)||x - v||^2 + step R(x) over the box.
GridFunction prox(const Penalty& pen, const GridFunction& v, double step);
MetricConstants metric_constants(const Penalty& pen);

}  // namespace pitik

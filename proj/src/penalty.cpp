#include "pitik/penalty.hpp"

#include "pitik/fidelity.hpp"

#include <algorithm>
#include <cmath>

namespace pitik {

namespace {

void check_box(const Box& b) {
    if (!(b.lo >= 0.0 && b.lo < b.hi && std::isfinite(b.hi))) throw Error("penalty box needs 0 <= lo < hi < inf");
}

// Root of x - v + step (ln x + 1) = 0, solved in w = ln x where the map is
// convex and increasing; Newton from the right converges monotonically.
double entropy_prox_scalar(double v, double step) {
    double w = std::log(std::max(v, 0.0) + step + 1.0);
    for (int it = 0; it < 200; ++it) {
        const double ew = std::exp(w);
        const double f = ew - v + step * (w + 1.0);
        const double dw = f / (ew + step);
        w -= dw;
        if (std::abs(dw) <= 1e-12 * (1.0 + std::abs(w))) break;
    }
    return std::exp(w);
}

}  // namespace

Penalty Penalty::quadratic(GridFunction u0, Box box) {
    check_box(box);
    Penalty p;
    p.kind_ = Kind::Quadratic;
    p.dom_ = u0.domain();
    p.box_ = box;
    p.u0_ = std::move(u0);
    return p;
}

Penalty Penalty::entropy(const Domain& dom, Box box) {
    check_box(box);
    Penalty p;
    p.kind_ = Kind::Entropy;
    p.dom_ = dom;
    p.box_ = box;
    p.u0_ = GridFunction::constant(dom, 0.0);
    return p;
}

bool Penalty::in_box(const GridFunction& u) const { return u.min() >= box_.lo && u.max() <= box_.hi; }

GridFunction Penalty::project(const GridFunction& v) const {
    GridFunction out = v;
    out.values() = v.values().cwiseMax(box_.lo).cwiseMin(box_.hi);
    return out;
}

GridFunction Penalty::initial_point() const {
    if (kind_ == Kind::Quadratic) return project(u0_);
    return project(GridFunction::constant(dom_, 1.0));
}

double penalty_value(const Penalty& pen, const GridFunction& u) {
    if (u.domain() != pen.domain()) throw Error("penalty and argument live on different domains");
    if (!pen.in_box(u)) return kInf;
    if (pen.kind() == Penalty::Kind::Quadratic) {
        const double r = l2_norm(u - pen.u0());
        return r * r;
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k)
        if (u[k] > 0.0) acc += u[k] * std::log(u[k]);
    return u.domain().cell_volume() * acc;
}

GridFunction subgradient(const Penalty& pen, const GridFunction& udag) {
    if (pen.kind() == Penalty::Kind::Quadratic) return 2.0 * (udag - pen.u0());
    if (!(udag.min() > 0.0)) throw Error("entropy subdifferential is empty where udag = 0");
    GridFunction g = udag;
    g.values() = (udag.values().array().log() + 1.0).matrix();
    return g;
}

double bregman(const Penalty& pen, const GridFunction& u, const GridFunction& udag, const GridFunction& ustar) {
    if (pen.kind() == Penalty::Kind::Entropy && !(udag.min() > 0.0))
        throw Error("entropy subdifferential is empty where udag = 0");
    const double ru = penalty_value(pen, u);
    const double rd = penalty_value(pen, udag);
    if (!std::isfinite(ru) || !std::isfinite(rd)) return kInf;
    return ru - rd - inner(ustar, u - udag);
}

double bregman(const Penalty& pen, const GridFunction& u, const GridFunction& udag) {
    // Closed forms for the canonical subgradient avoid cancellation.
    if (!pen.in_box(u) || !pen.in_box(udag)) return kInf;
    if (pen.kind() == Penalty::Kind::Quadratic) {
        const double r = l2_norm(u - udag);
        return r * r;
    }
    if (!(udag.min() > 0.0)) throw Error("entropy subdifferential is empty where udag = 0");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double a = u[k], b = udag[k];
        acc += (a > 0.0 ? a * std::log(a / b) : 0.0) - a + b;
    }
    return std::max(0.0, u.domain().cell_volume() * acc);
}

GridFunction prox(const Penalty& pen, const GridFunction& v, double step) {
    if (!(step >= 0.0)) throw Error("prox step must be >= 0");
    GridFunction out = v;
    if (pen.kind() == Penalty::Kind::Quadratic) {
        out.values() = (v.values() + 2.0 * step * pen.u0().values()) / (1.0 + 2.0 * step);
    } else if (step > 0.0) {
        for (Eigen::Index k = 0; k < v.size(); ++k) out[k] = entropy_prox_scalar(v[k], step);
    }
    return pen.project(out);
}

MetricConstants metric_constants(const Penalty& pen) {
    if (pen.kind() == Penalty::Kind::Quadratic) return {2.0, 1.0};
    return {2.0, 4.0 / 3.0 * pen.box().hi + 2.0 / 3.0 * pen.box().hi};
}

}  // namespace pitik

#include "doctest.h"

#include "pitik/fidelity.hpp"
#include "pitik/operators.hpp"
#include "pitik/penalty.hpp"

#include <cmath>

using namespace pitik;

namespace {

GridFunction random_box(const Domain& dom, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(dom.size());
    for (auto& x : v) x = u(rng);
    return GridFunction(dom, v);
}

GridFunction gaussian_kernel(const Domain& dom, double width) {
    // Periodised Gaussian centred at offset 0, normalised to unit mass.
    auto k = GridFunction::sample(dom, [&](const Point& x) {
        double acc = 1.0;
        for (int a = 0; a < dom.dim(); ++a) {
            const double off = x[a] - 0.5 * dom.h();
            const double dd = std::min(off, 1.0 - off);
            acc *= std::exp(-0.5 * dd * dd / (width * width));
        }
        return acc;
    });
    return (1.0 / integrate(k)) * k;
}

}  // namespace

TEST_CASE("spectral operator acts on Fourier modes") {
    const Domain dom(1, 64);
    const double a = 1.5;
    const auto op = ForwardOperator::spectral_diagonal(dom, a);
    for (int j : {0, 1, 4, 17}) {
        auto e = GridFunction::sample(dom, [&](const Point& x) { return std::cos(2 * M_PI * j * x[0]); });
        const GridFunction Ke = apply(op, e);
        const double sv = std::pow(1.0 + j * j, -a / 2);
        CHECK((Ke.values() - sv * e.values()).cwiseAbs().maxCoeff() < 1e-13);
    }
    const auto opb = ForwardOperator::spectral_diagonal(dom, a, 0.5);
    const GridFunction c = apply(opb, GridFunction::constant(dom, 2.0));
    CHECK((c.values().array() - 2.5).abs().maxCoeff() < 1e-13);
    CHECK(op.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(ForwardOperator::spectral_diagonal(dom, 0.5), Error);
    CHECK_THROWS_AS(ForwardOperator::spectral_diagonal(Domain(2, 8), 1.0), Error);
}

TEST_CASE("adjoint identity, linearity and positivity") {
    Rng rng(1);
    for (int d : {1, 2}) {
        const Domain dom(d, d == 1 ? 64 : 16);
        const ForwardOperator ops[] = {ForwardOperator::spectral_diagonal(dom, 1.5),
                                       ForwardOperator::periodic_convolution(gaussian_kernel(dom, 0.05))};
        for (const auto& op : ops) {
            for (int i = 0; i < 20; ++i) {
                const auto u = random_box(dom, rng, -1.0, 1.0), v = random_box(dom, rng, -1.0, 1.0);
                CHECK(std::abs(inner(apply(op, u), v) - inner(u, apply_adjoint(op, v))) < 1e-13);
                const GridFunction lin = apply(op, 2.0 * u + (-3.0) * v) - (2.0 * apply(op, u) + (-3.0) * apply(op, v));
                CHECK(lin.values().cwiseAbs().maxCoeff() < 1e-12);
                const auto w = random_box(dom, rng, 0.0, 1.0);
                CHECK(apply(op, w).min() >= -1e-13);
            }
        }
        // The spectral multiplier is real, so K is self-adjoint.
        const auto u = random_box(dom, rng, -1.0, 1.0);
        CHECK((apply(ops[0], u).values() - apply_adjoint(ops[0], u).values()).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("periodic convolution") {
    const Domain dom(1, 32);
    // A delta at offset 0 gives the identity.
    Eigen::VectorXd dk = Eigen::VectorXd::Zero(dom.size());
    dk[0] = 1.0 / dom.cell_volume();
    const auto id = ForwardOperator::periodic_convolution(GridFunction(dom, dk));
    Rng rng(2);
    const auto u = random_box(dom, rng, 0.0, 3.0);
    CHECK((apply(id, u).values() - u.values()).cwiseAbs().maxCoeff() < 1e-13);

    // Direct periodic sum and mass conservation for a unit-mass kernel.
    const GridFunction k = gaussian_kernel(dom, 0.08);
    const auto op = ForwardOperator::periodic_convolution(k, 0.25);
    const GridFunction Ku = apply(op, u);
    for (Eigen::Index i = 0; i < dom.size(); ++i) {
        double acc = 0.0;
        for (Eigen::Index m = 0; m < dom.size(); ++m) acc += k[m] * u[(i - m + dom.size()) % dom.size()];
        CHECK(Ku[i] == doctest::Approx(dom.cell_volume() * acc + 0.25).epsilon(1e-12));
    }
    CHECK(integrate(Ku) == doctest::Approx(integrate(u) + 0.25).epsilon(1e-12));
    CHECK(op.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("H^s image radius dominates images of the box") {
    Rng rng(3);
    for (int d : {1, 2}) {
        const Domain dom(d, d == 1 ? 64 : 16);
        const Box box{0.0, 4.0};
        const ForwardOperator ops[] = {ForwardOperator::spectral_diagonal(dom, d == 1 ? 1.5 : 2.5, 0.3),
                                       ForwardOperator::periodic_convolution(gaussian_kernel(dom, 0.05), 0.3)};
        for (const auto& op : ops) {
            const double s = 0.75;
            const double R = hs_image_radius(op, box, s);
            int violations = 0;
            for (int i = 0; i < 1000; ++i) {
                const auto u = random_box(dom, rng, box.lo, box.hi);
                if (sobolev_norm(apply(op, u), s, dom.n() / 2) > R) ++violations;
            }
            CHECK(violations == 0);
            // Extremal element: the constant at the upper bound.
            CHECK(sobolev_norm(apply(op, GridFunction::constant(dom, box.hi)), s, dom.n() / 2) <= R * (1.0 + 1e-12));
        }
    }
    const Domain dom(1, 32);
    const auto op = ForwardOperator::spectral_diagonal(dom, 1.5);
    CHECK(hs_image_radius(op, {0.0, 0.0}, 0.5) == 0.0);
    CHECK_THROWS_AS(hs_image_radius(op, {0.0, 1.0}, 1.0), Error);
}

TEST_CASE("source instance") {
    const Domain dom(1, 128);
    const auto op = ForwardOperator::spectral_diagonal(dom, 1.5, 0.5);
    for (double nu : {0.25, 0.5}) {
        const auto inst = make_source_instance(op, SourceFamily::holder(nu), 7, 10.0);
        CHECK(l2_norm(inst.omega) == doctest::Approx(10.0));
        Eigen::VectorXcd psi(dom.size());
        for (Eigen::Index k = 0; k < dom.size(); ++k) psi[k] = std::pow(std::norm(op.multiplier()[k]), nu);
        const GridFunction du = apply_multiplier(psi, inst.omega);
        CHECK((inst.udag - inst.u0 - du).values().cwiseAbs().maxCoeff() < 1e-8);
        CHECK(inst.udag.min() == doctest::Approx(0.5));
        CHECK((apply(op, inst.udag) - inst.gdag).values().cwiseAbs().maxCoeff() < 1e-14);
        CHECK(inst.predicted_phi.kappa() == doctest::Approx(2 * nu / (2 * nu + 1)));
    }
    const auto z = make_source_instance(op, SourceFamily::holder(0.5), 7, 0.0);
    CHECK((z.udag.values().array() - 0.5).abs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(make_source_instance(op, SourceFamily::holder(0.75), 7, 1.0), Error);

    // Log family: finite at j = 0 and deterministic in the seed.
    const auto l1 = make_source_instance(op, SourceFamily::logarithmic(1.0), 3, 5.0);
    const auto l2 = make_source_instance(op, SourceFamily::logarithmic(1.0), 3, 5.0);
    CHECK(l1.udag.values() == l2.udag.values());
    CHECK(SourceFamily::logarithmic(1.0).psi(1.0) == doctest::Approx(1.0));
    CHECK(SourceFamily::logarithmic(2.0).psi(std::exp(-1.0)) == doctest::Approx(0.25));
}

TEST_CASE("certified source condition holds on random box elements") {
    for (int d : {1, 2}) {
        const Domain dom(d, d == 1 ? 64 : 16);
        const auto op = ForwardOperator::spectral_diagonal(dom, d == 1 ? 1.5 : 2.0, 0.5);
        const auto inst = make_source_instance(op, SourceFamily::holder(0.5), 11, 5.0);
        const Box box{0.0, 2.0 * inst.udag.max() + 2.0};
        const double sigma = 0.1;
        const IndexFunction phi = certified_vsc_phi(inst, box, sigma);
        const Penalty pen = Penalty::quadratic(inst.u0, box);
        Rng rng(5);
        int violations = 0;
        for (int i = 0; i < 1000; ++i) {
            // Mix of far and near perturbations of udag.
            GridFunction u = random_box(dom, rng, box.lo, box.hi);
            if (i % 2) u = pen.project(inst.udag + 0.01 * (u + (-0.5 * box.hi)));
            const double lhs = bregman(pen, u, inst.udag);
            const double rhs = penalty_value(pen, u) - penalty_value(pen, inst.udag) +
                               phi(shifted_kl(apply(op, u), inst.gdag, sigma));
            if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) ++violations;
        }
        CHECK(violations == 0);
    }
    const Domain dom(1, 32);
    const auto inst = make_source_instance(ForwardOperator::spectral_diagonal(dom, 1.5), SourceFamily::holder(0.25), 1, 1.0);
    CHECK_THROWS_AS(certified_vsc_phi(inst, {0.0, 5.0}, 0.1), Error);
}

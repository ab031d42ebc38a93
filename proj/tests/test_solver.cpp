#include "doctest.h"

#include "pitik/solver.hpp"

#include <Eigen/Dense>
#include <cmath>

using namespace pitik;

namespace {

// Dense matrix of the linear part of F on grid values.
Eigen::MatrixXd dense(const ForwardOperator& F) {
    const Domain& dom = F.domain();
    Eigen::MatrixXd K(dom.size(), dom.size());
    for (Eigen::Index k = 0; k < dom.size(); ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dom.size());
        e[k] = 1.0;
        K.col(k) = apply(F, GridFunction(dom, e)).values().array() - F.background();
    }
    return K;
}

GridFunction smooth_signal(const Domain& dom) {
    return GridFunction::sample(dom, [](const Point& x) { return 1.5 + 0.8 * std::sin(2 * M_PI * x[0]) + 0.3 * std::cos(6 * M_PI * x[0]); });
}

// Damped Newton on the binned Poisson objective with an inactive box.
Eigen::VectorXd newton_reference(const ForwardOperator& F, const BinnedCounts& c, double sigma, double alpha,
                                 const Eigen::VectorXd& u0, Eigen::VectorXd u) {
    const Domain& dom = F.domain();
    const double h = dom.cell_volume();
    const Eigen::MatrixXd K = dense(F);
    const Eigen::ArrayXd rho = c.counts.array() / (c.t * h);
    auto value = [&](const Eigen::VectorXd& v) {
        const Eigen::ArrayXd g = (K * v).array() + F.background();
        if ((g + sigma <= 0).any()) return kInf;
        return h * (g - (rho + sigma) * (g + sigma).log()).sum() + alpha * h * (v - u0).squaredNorm();
    };
    for (int it = 0; it < 100; ++it) {
        const Eigen::ArrayXd g = (K * u).array() + F.background();
        const Eigen::VectorXd grad =
            K.transpose() * (h * (1.0 - (rho + sigma) / (g + sigma))).matrix() + 2.0 * alpha * h * (u - u0);
        const Eigen::MatrixXd H = K.transpose() * (h * (rho + sigma) / (g + sigma).square()).matrix().asDiagonal() * K +
                                  2.0 * alpha * h * Eigen::MatrixXd::Identity(u.size(), u.size());
        const Eigen::VectorXd step = H.ldlt().solve(grad);
        double lam = 1.0;
        const double f0 = value(u);
        while (value(u - lam * step) > f0 && lam > 1e-12) lam *= 0.5;
        u -= lam * step;
        if (grad.norm() < 1e-13) break;
    }
    return u;
}

}  // namespace

TEST_CASE("quadratic fidelity matches the dense normal equations") {
    const Domain dom(1, 64);
    const auto F = ForwardOperator::spectral_diagonal(dom, 1.5);
    const GridFunction udag = smooth_signal(dom);
    const GridFunction gobs = apply(F, udag);
    const GridFunction u0 = GridFunction::constant(dom, 1.0);
    const Penalty pen = Penalty::quadratic(u0, {0.0, 100.0});
    const Eigen::MatrixXd K = dense(F);
    SolverOptions opts;
    opts.rel_tolerance = 1e-14;
    for (double alpha : {1e-3, 1e-2, 1.0}) {
        const Eigen::MatrixXd A = K.transpose() * K + alpha * Eigen::MatrixXd::Identity(dom.size(), dom.size());
        const Eigen::VectorXd ref = A.ldlt().solve(K.transpose() * gobs.values() + alpha * u0.values());
        const Reconstruction rec = minimize_tikhonov(F, SquaredL2Fidelity{gobs}, alpha, pen, opts);
        CHECK((rec.u_alpha.values() - ref).cwiseAbs().maxCoeff() < 1e-6);
        // Diagonal closed form in the Fourier basis.
        Eigen::VectorXcd m1(dom.size()), m2(dom.size());
        for (Eigen::Index k = 0; k < dom.size(); ++k) {
            const double s = F.multiplier()[k].real();
            m1[k] = s / (s * s + alpha);
            m2[k] = alpha / (s * s + alpha);
        }
        const GridFunction diag = apply_multiplier(m1, gobs) + apply_multiplier(m2, u0);
        CHECK((diag.values() - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("large alpha returns the projected centre") {
    const Domain dom(1, 32);
    const auto F = ForwardOperator::spectral_diagonal(dom, 1.5, 0.5);
    Rng rng(1);
    const PointData data = sample_poisson(apply(F, smooth_signal(dom)), 1e3, rng);
    auto u0 = GridFunction::sample(dom, [](const Point& x) { return 4.0 * x[0]; });
    const Penalty pen = Penalty::quadratic(u0, {0.5, 3.0});
    const Reconstruction rec = minimize_tikhonov(F, data, 0.1, 1e8, pen);
    CHECK((rec.u_alpha - pen.project(u0)).values().cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("objective: hand example and infeasible points") {
    const Domain dom(1, 8);
    Eigen::VectorXd dk = Eigen::VectorXd::Zero(dom.size());
    dk[0] = 1.0 / dom.cell_volume();
    const auto id = ForwardOperator::periodic_convolution(GridFunction(dom, dk));
    const PointData empty{dom, 1.0, {}};
    const Penalty pen = Penalty::quadratic(GridFunction::constant(dom, 0.0), {0.0, 5.0});
    const auto u = GridFunction::constant(dom, 2.0);
    // S = 2 - sigma ln(2 + sigma), R = 4.
    const double sigma = 0.5;
    CHECK(objective(id, empty, sigma, 0.25, pen, u) == doctest::Approx(2.0 - sigma * std::log(2.5) + 1.0));
    CHECK(objective(id, empty, sigma, 0.25, pen, GridFunction::constant(dom, 6.0)) == kInf);
    CHECK_THROWS_AS(objective(id, empty, sigma, 0.0, pen, u), Error);
    CHECK_THROWS_AS(poisson_fidelity(empty, 0.0), Error);
}

TEST_CASE("Poisson solve agrees with a dense Newton reference") {
    const Domain dom(1, 16);
    const auto F = ForwardOperator::spectral_diagonal(dom, 1.5, 0.5);
    const GridFunction udag = smooth_signal(dom);
    Rng rng(2);
    const PointData data = sample_poisson(apply(F, udag), 1e4, rng);
    const GridFunction u0 = GridFunction::constant(dom, 1.5);
    const Penalty pen = Penalty::quadratic(u0, {0.0, 50.0});
    const double sigma = 0.1, alpha = 1e-3;
    SolverOptions opts;
    opts.rel_tolerance = 1e-14;
    opts.max_iterations = 200000;
    const Reconstruction rec = minimize_tikhonov(F, data, sigma, alpha, pen, opts);
    const Eigen::VectorXd ref = newton_reference(F, bin_counts(data), sigma, alpha, u0.values(), u0.values());
    REQUIRE(ref.minCoeff() > 0.0);
    CHECK((rec.u_alpha.values() - ref).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(rec.converged);
}

TEST_CASE("minimizer property, KKT residual and start independence") {
    Rng rng(3);
    for (int d : {1, 2}) {
        const Domain dom(d, d == 1 ? 64 : 16);
        const auto F = ForwardOperator::spectral_diagonal(dom, d == 1 ? 1.5 : 2.0, 0.5);
        const auto inst = make_source_instance(F, SourceFamily::holder(0.5), 5, 5.0);
        const Box box{0.0, 2.0 * inst.udag.max() + 2.0};
        const Penalty pens[] = {Penalty::quadratic(inst.u0, box), Penalty::entropy(dom, box)};
        const PointData data = sample_poisson(inst.gdag, 1e3, rng);
        const double sigma = 0.1;
        for (const auto& pen : pens) {
            const double alpha = 1e-2;
            const Reconstruction rec = minimize_tikhonov(F, data, sigma, alpha, pen);
            CHECK(rec.converged);
            CHECK(rec.kkt_residual <= 10.0 * 1e-10 * (1.0 + std::abs(rec.objective)));
            CHECK(pen.in_box(rec.u_alpha));
            CHECK(objective(F, data, sigma, alpha, pen, rec.u_alpha) ==
                  doctest::Approx(rec.objective).epsilon(1e-12));
            std::uniform_real_distribution<double> un(-1.0, 1.0);
            int worse = 0;
            for (int i = 0; i < 200; ++i) {
                Eigen::VectorXd dv(dom.size());
                for (auto& x : dv) x = un(rng);
                const double eps = i < 100 ? 1e-3 : 1e-1;
                const GridFunction v = pen.project(rec.u_alpha + eps * GridFunction(dom, dv));
                if (objective(F, data, sigma, alpha, pen, v) < rec.objective - 1e-12 * (1.0 + std::abs(rec.objective)))
                    ++worse;
            }
            CHECK(worse == 0);
            std::uniform_real_distribution<double> ub(box.lo + 0.1, box.hi - 0.1);
            Eigen::VectorXd s1(dom.size()), s2(dom.size());
            for (auto& x : s1) x = ub(rng);
            for (auto& x : s2) x = ub(rng);
            const Fidelity fid = poisson_fidelity(data, sigma);
            SolverOptions tight;
            tight.rel_tolerance = 1e-13;
            const Reconstruction a = minimize_tikhonov(F, fid, alpha, pen, tight, GridFunction(dom, s1));
            const Reconstruction b = minimize_tikhonov(F, fid, alpha, pen, tight, GridFunction(dom, s2));
            CHECK(l2_norm(a.u_alpha - b.u_alpha) < 1e-6);
        }
    }
}

TEST_CASE("accepted objective values never increase") {
    const Domain dom(1, 32);
    const auto F = ForwardOperator::spectral_diagonal(dom, 1.5, 0.5);
    Rng rng(4);
    const PointData data = sample_poisson(apply(F, smooth_signal(dom)), 1e3, rng);
    const Penalty pen = Penalty::entropy(dom, {0.0, 10.0});
    for (bool acc : {true, false}) {
        SolverOptions opts;
        opts.acceleration = acc;
        double prev = kInf;
        for (int k = 1; k <= 60; ++k) {
            opts.max_iterations = k;
            const double v = minimize_tikhonov(F, data, 0.1, 1e-2, pen, opts).objective;
            CHECK(v <= prev);
            prev = v;
        }
        opts.max_iterations = 20000;
        const Reconstruction full = minimize_tikhonov(F, data, 0.1, 1e-2, pen, opts);
        CHECK(full.converged);
        CHECK(full.objective <= prev);
    }
}

TEST_CASE("invalid solver input") {
    const Domain dom(1, 8);
    const auto F = ForwardOperator::spectral_diagonal(dom, 1.5, 0.5);
    const PointData data{dom, 10.0, {{0.3, 0.0}}};
    const Penalty pen = Penalty::quadratic(GridFunction::constant(dom, 1.0), {0.0, 5.0});
    CHECK_THROWS_AS(minimize_tikhonov(F, data, 0.1, 0.0, pen), Error);
    SolverOptions bad;
    bad.backtracking = 1.5;
    CHECK_THROWS_AS(minimize_tikhonov(F, data, 0.1, 1.0, pen, bad), Error);
}

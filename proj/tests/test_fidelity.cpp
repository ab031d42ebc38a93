#include "doctest.h"

#include "pitik/fidelity.hpp"

#include <cmath>
#include <numeric>

using namespace pitik;

namespace {

GridFunction random_nonneg(const Domain& dom, Rng& rng, double scale = 3.0) {
    std::uniform_real_distribution<double> u(0.0, scale);
    std::bernoulli_distribution zero(0.1);
    Eigen::VectorXd v(dom.size());
    for (auto& x : v) x = zero(rng) ? 0.0 : u(rng);
    return GridFunction(dom, v);
}

}  // namespace

TEST_CASE("shifted negative log-likelihood: hand values") {
    const Domain dom(1, 8);
    const PointData one{dom, 1.0, {{0.5, 0.0}}};
    CHECK(shifted_neg_loglik(GridFunction::constant(dom, 1.0), one, 1.0) == doctest::Approx(1.0 - 2.0 * std::log(2.0)));
    CHECK(shifted_neg_loglik(GridFunction::constant(dom, 0.0), one, 0.0) == kInf);
    const PointData empty{dom, 3.0, {}};
    CHECK(shifted_neg_loglik(GridFunction::constant(dom, 1.0), empty, 0.0) == doctest::Approx(1.0));
    auto neg = GridFunction::constant(dom, 1.0);
    neg[0] = -1e-3;
    CHECK_THROWS_AS(shifted_neg_loglik(neg, one, 1.0), Error);
}

TEST_CASE("binned and point evaluations agree") {
    const Domain dom(2, 8);
    Rng rng(1);
    const auto gdag = random_nonneg(dom, rng) + 0.2;
    const PointData pd = sample_poisson(gdag, 200.0, rng);
    const auto g = random_nonneg(dom, rng);
    CHECK(shifted_neg_loglik(g, pd, 0.1) == doctest::Approx(shifted_neg_loglik(g, bin_counts(pd), 0.1)).epsilon(1e-13));
}

TEST_CASE("shifted KL: hand values and errors") {
    const Domain dom(1, 16);
    Rng rng(2);
    const auto g = random_nonneg(dom, rng);
    CHECK(shifted_kl(g, g, 0.3) == 0.0);
    CHECK(kl(GridFunction::constant(dom, 2.0), GridFunction::constant(dom, 1.0)) == doctest::Approx(1.0 - std::log(2.0)));
    CHECK(shifted_kl(GridFunction::constant(dom, 0.0), GridFunction::constant(dom, 1.0), 1.0) ==
          doctest::Approx(2.0 * std::log(2.0) - 1.0));
    CHECK(kl(GridFunction::constant(dom, 0.0), GridFunction::constant(dom, 1.0)) == kInf);
    CHECK_THROWS_AS(shifted_kl(GridFunction::constant(dom, -1.0), g, 0.1), Error);
}

TEST_CASE("KL is nonnegative and bounds the squared L2 distance") {
    for (double sigma : {0.01, 0.1, 1.0}) {
        Rng rng(static_cast<std::uint64_t>(sigma * 1000));
        int violations = 0;
        for (int i = 0; i < 1000; ++i) {
            const Domain dom(1, 16);
            const auto g = random_nonneg(dom, rng), gh = random_nonneg(dom, rng);
            const double T = shifted_kl(g, gh, sigma);
            const double d = l2_norm(g - gh);
            if (T < 0.0 || d * d > kl_lower_bound_constant(g, gh, sigma) * T * (1.0 + 1e-12)) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("noise functional: hand values") {
    const Domain dom(1, 8);
    const PointData empty{dom, 5.0, {}};
    const auto one = GridFunction::constant(dom, 1.0);
    CHECK(noise_functional_Z(one, empty, one, 1.0) == doctest::Approx(std::log(2.0)));
    // Constant log integrand c: Z = |c (N/t - int gdag)|.
    Rng rng(3);
    const auto gdag = random_nonneg(dom, rng) + 0.5;
    const PointData pd = sample_poisson(gdag, 40.0, rng);
    const double c = std::log(2.5 + 0.5);
    CHECK(noise_functional_Z(GridFunction::constant(dom, 2.5), pd, gdag, 0.5) ==
          doctest::Approx(std::abs(c * (pd.count() / 40.0 - integrate(gdag)))));
}

TEST_CASE("decomposition S(g) - S(gdag) = T(g, gdag) - W(g) + W(gdag)") {
    Rng rng(4);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Domain dom(1, 16);
        const double sigma = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
        const auto gdag = random_nonneg(dom, rng);
        const auto g = random_nonneg(dom, rng);
        const PointData pd = sample_poisson(gdag, 50.0, rng);
        const double lhs = shifted_neg_loglik(g, pd, sigma) - shifted_neg_loglik(gdag, pd, sigma);
        const double rhs = shifted_kl(g, gdag, sigma) - signed_noise(g, pd, gdag, sigma) + signed_noise(gdag, pd, gdag, sigma);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("required error bound") {
    const Domain dom(1, 8);
    Rng rng(5);
    const auto gdag = random_nonneg(dom, rng) + 0.1;
    const PointData pd = sample_poisson(gdag, 30.0, rng);
    const double sigma = 0.2;
    CHECK(required_err_bound({gdag}, pd, gdag, sigma) <= 2.0 * noise_functional_Z(gdag, pd, gdag, sigma));
    // Empty data and constants: W(c) = -ln(c+sigma) int gdag.
    const PointData empty{dom, 1.0, {}};
    const auto one = GridFunction::constant(dom, 1.0);
    const double m = integrate(gdag);
    GridFunction lgd = gdag;
    lgd.values() = (gdag.values().array() + sigma).log().matrix();
    const double w_dag = -inner(lgd, gdag);
    const double expect = std::max(0.0, std::max(-std::log(0.5 + sigma), -std::log(3.0 + sigma)) * m - w_dag);
    CHECK(required_err_bound({0.5 * one, 3.0 * one}, empty, gdag, sigma) == doctest::Approx(expect));
    CHECK(required_err_bound({}, empty, gdag, sigma) == 0.0);
}

TEST_CASE("squared L2 fidelity") {
    const Domain dom(2, 8);
    Rng rng(6);
    const auto g = random_nonneg(dom, rng);
    CHECK(squared_l2_fidelity(g, g) == 0.0);
    CHECK(squared_l2_fidelity(GridFunction::constant(dom, 1.0), GridFunction::constant(dom, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("expected fidelity matches the deterministic functional") {
    const Domain dom(1, 32);
    const auto gdag = GridFunction::sample(dom, [](const Point& x) { return 1.0 + 0.5 * std::sin(2 * M_PI * x[0]); });
    const auto g = GridFunction::sample(dom, [](const Point& x) { return 0.8 + x[0]; });
    const double sigma = 0.1, t = 100.0;
    std::vector<double> v;
    for (int r = 0; r < 2000; ++r) {
        Rng rng(split_seed(8, r));
        v.push_back(shifted_neg_loglik(g, sample_poisson(gdag, t, rng), sigma));
    }
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double se = std::sqrt(ss / (v.size() - 1) / v.size());
    GridFunction lg = g;
    lg.values() = (g.values().array() + sigma).log().matrix();
    const double expect = integrate(g) - inner(lg, gdag) - sigma * integrate(lg);
    CHECK(std::abs(m - expect) < 3.0 * se);
}

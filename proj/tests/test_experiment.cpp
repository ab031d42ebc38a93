#include "doctest.h"

#include "pitik/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace pitik;

namespace {

Config parse(const std::string& text) {
    std::istringstream is(text);
    return Config::parse(is);
}

ExperimentConfig small_study() {
    const Config cfg = parse(
        "domain.n = 32\n"
        "experiment.t_grid = 100, 1000, 10000\n"
        "experiment.replicates = 10\n"
        "experiment.seed = 5\n");
    return experiment_from_config(cfg);
}

std::string first_line(const std::string& path) {
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    return line;
}

}  // namespace

TEST_CASE("log-log slope fit") {
    const LogLogFit id = fit_loglog_slope({1, 2, 4, 8}, {1, 2, 4, 8});
    CHECK(id.slope == doctest::Approx(1.0));
    CHECK(id.intercept == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(id.r2 == doctest::Approx(1.0));
    std::vector<double> x, y;
    for (double t = 1e2; t <= 1e6; t *= 10) {
        x.push_back(t);
        y.push_back(3.0 * std::pow(t, -0.25));
    }
    const LogLogFit f = fit_loglog_slope(x, y);
    CHECK(f.slope == doctest::Approx(-0.25));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> eps(0.0, 0.05);
    std::vector<double> xn, yn;
    for (int i = 0; i < 20; ++i) {
        const double t = std::pow(10.0, 2.0 + 4.0 * i / 19.0);
        xn.push_back(t);
        yn.push_back(3.0 * std::pow(t, -0.25) * (1.0 + eps(rng)));
    }
    CHECK(std::abs(fit_loglog_slope(xn, yn).slope + 0.25) < 0.02);

    CHECK_THROWS_AS(fit_loglog_slope({1, 2}, {1, 2}), Error);
    CHECK_THROWS_AS(fit_loglog_slope({1, 2, 3}, {1, 0, 2}), Error);
    CHECK_THROWS_AS(fit_loglog_slope({1, 1, 1}, {1, 2, 3}), Error);
}

TEST_CASE("trimmed mean") {
    CHECK(trimmed_mean({1, 2, 3, 4}, 0.0) == doctest::Approx(2.5));
    std::vector<double> v{100, 1, 2, 3, 4, 5, 6, 7, 8, -50};
    CHECK(trimmed_mean(v, 0.1) == doctest::Approx(4.5));
    CHECK(trimmed_mean(v, 0.05) == doctest::Approx(8.6));  // floor(0.5) = 0 trims nothing
    CHECK_THROWS_AS(trimmed_mean({}, 0.1), Error);
    CHECK_THROWS_AS(trimmed_mean({1.0}, 0.5), Error);
}

TEST_CASE("config parsing and scenario construction") {
    const Config cfg = parse("# comment\ndomain.n = 64\nfidelity.sigma = 0.2  # trailing\n");
    CHECK(cfg.get_int("domain.n", 0) == 64);
    CHECK(cfg.get_double("fidelity.sigma", 0.0) == doctest::Approx(0.2));
    CHECK(cfg.get_double("fidelity.missing", 3.0) == 3.0);
    CHECK_THROWS_AS(parse("no.such.key = 1\n"), Error);

    const ExperimentConfig ec = experiment_from_config(cfg);
    CHECK(ec.scenario.domain.n() == 64);
    CHECK(ec.scenario.sigma == doctest::Approx(0.2));
    CHECK(ec.scenario.penalty.in_box(ec.scenario.instance.udag));
    CHECK(!ec.lepskii_tau);
    CHECK(experiment_from_config(parse("lepskii.tau = 0.5\n")).lepskii_tau.value() == 0.5);
    CHECK_THROWS_AS(experiment_from_config(parse("operator.kind = wavelet\n")), Error);
    CHECK_THROWS_AS(experiment_from_config(parse("experiment.t_grid = 1000, 100, 10000\n")), Error);
    CHECK_THROWS_AS(experiment_from_config(parse("experiment.replicates = 3\n")), Error);
}

TEST_CASE("predicted exponents") {
    const ExperimentConfig ec = small_study();
    CHECK(ec.scenario.phi.kappa() == doctest::Approx(0.5));
    const ExperimentConfig quarter = experiment_from_config(parse("domain.n = 32\nsource.nu = 0.25\n"));
    CHECK(quarter.scenario.phi.kappa() == doctest::Approx(1.0 / 3.0));
    // A-priori Bregman exponent -kappa/2: -1/4 and -1/6.
    CHECK(-0.5 * quarter.scenario.phi.kappa() == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("a-priori study is deterministic and self-consistent") {
    const ExperimentConfig ec = small_study();
    const AprioriReport a = run_apriori_study(ec);
    const AprioriReport b = run_apriori_study(ec);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.predicted_exponent == doctest::Approx(-0.25));
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean == b.rows[i].mean);
        CHECK(a.rows[i].used + a.rows[i].excluded == 10);
        CHECK(a.rows[i].mean > 0.0);
    }
    CHECK(a.fit.slope == b.fit.slope);
    CHECK(a.minimizer_violations == 0);
    CHECK(a.bound_violations == 0);
    CHECK(a.solves == 30);
}

TEST_CASE("Lepskii study with a fixed threshold") {
    ExperimentConfig ec = small_study();
    ec.lepskii_tau = 0.05;
    const LepskiiReport a = run_lepskii_study(ec);
    const LepskiiReport b = run_lepskii_study(ec);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.tau == 0.05);
    CHECK(a.predicted_exponent == doctest::Approx(0.5));
    CHECK(a.efficiency_limit == doctest::Approx(27.0));
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean == b.rows[i].mean);
        CHECK(a.rows[i].mean_j_bal >= 1.0);
        CHECK(a.rows[i].mean_j_bal <= a.rows[i].m);
        CHECK(a.rows[i].m == alpha_sequence(ec.t_grid[i], 0.05, ec.lepskii_r).m);
    }
    for (double e : a.efficiency) CHECK(e >= 1.0);
    CHECK(a.oracle_violations == 0);
    CHECK(lepskii_tau_formula(ec.scenario, 0.75, 2.0) == doctest::Approx(2.0 * lepskii_tau_formula(ec.scenario, 0.75, 1.0)));
}

TEST_CASE("writers") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pitik_writer_test";
    fs::create_directories(dir);
    ExperimentConfig ec = small_study();
    const AprioriReport a = run_apriori_study(ec);
    write_rates_csv((dir / "rates.csv").string(), a);
    write_summary_json((dir / "summary.json").string(), a);
    CHECK(first_line((dir / "rates.csv").string()) == "t,mean_bregman,stderr,excluded");
    std::ifstream js((dir / "summary.json").string());
    const std::string text((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"predicted_exponent\"") != std::string::npos);
    CHECK(text.find("\"pass\"") != std::string::npos);

    ec.lepskii_tau = 0.05;
    const LepskiiReport l = run_lepskii_study(ec);
    REQUIRE(!l.details.empty());
    write_lepskii_detail_csv((dir / "lep.csv").string(), l.details[0]);
    CHECK(first_line((dir / "lep.csv").string()) == "j,alpha,bregman_error,l2_error,psi,selected");

    TailTable tab = build_tail_table({10.0}, {{0.5, 1.5, 2.5}}, {1.0, 2.0});
    write_tail_csv((dir / "tail.csv").string(), tab);
    CHECK(first_line((dir / "tail.csv").string()) == "t,rho,coverage,replicates");
    CHECK_THROWS_AS(write_tail_csv((dir / "missing" / "x.csv").string(), tab), Error);
    fs::remove_all(dir);
}

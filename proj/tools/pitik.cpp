// Command-line driver for simulations, single solves and the Monte Carlo studies.
#include "pitik/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace pitik;
namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void simulate(const Config& cfg, const ExperimentConfig& ec, std::uint64_t seed, const std::string& out) {
    const double t = cfg.get_double("simulate.t", 1e3);
    Rng rng(seed);
    const PointData data = sample_poisson(ec.scenario.instance.gdag, t, rng);
    write_points_csv(join(out, "points.csv"), data);
    write_counts_csv(join(out, "counts.csv"), bin_counts(data));
    write_csv(join(out, "gdag.csv"), ec.scenario.instance.gdag);
    write_csv(join(out, "udag.csv"), ec.scenario.instance.udag);
    std::cout << "sampled " << data.count() << " points at t=" << t << "\n";
}

void solve(const Config& cfg, const ExperimentConfig& ec, std::uint64_t seed, const std::string& out) {
    const Scenario& sc = ec.scenario;
    PointData data;
    if (auto pf = cfg.raw("solve.points_file")) {
        data = read_points_csv(*pf, sc.domain);
    } else {
        Rng rng(seed);
        data = sample_poisson(sc.instance.gdag, cfg.get_double("simulate.t", 1e3), rng);
    }
    const double alpha = cfg.has("solve.alpha") ? cfg.get_double("solve.alpha", 1.0) : apriori_alpha(sc.phi, data.t, 1.0);
    const Reconstruction rec = minimize_tikhonov(sc.instance.op, data, sc.sigma, alpha, sc.penalty, ec.solver);
    write_csv(join(out, "reconstruction.csv"), rec.u_alpha);
    write_reconstruction_json(join(out, "reconstruction.json"), rec);
    std::cout << std::setprecision(6) << "alpha=" << alpha << " objective=" << rec.objective
              << " iterations=" << rec.iterations << " converged=" << rec.converged
              << " bregman=" << bregman(sc.penalty, rec.u_alpha, sc.instance.udag) << "\n";
}

void apriori(const ExperimentConfig& ec, const std::string& out) {
    const AprioriReport rep = run_apriori_study(ec);
    write_rates_csv(join(out, "rates.csv"), rep);
    write_summary_json(join(out, "summary.json"), rep);
    std::cout << std::setprecision(4) << "slope " << rep.fit.slope << " (predicted " << rep.predicted_exponent
              << "), exclusion " << rep.exclusion_rate << ", minimizer violations " << rep.minimizer_violations << "\n";
}

void lepskii(const ExperimentConfig& ec, const std::string& out) {
    const LepskiiReport rep = run_lepskii_study(ec);
    write_rates_csv(join(out, "rates.csv"), rep);
    write_summary_json(join(out, "summary.json"), rep);
    for (std::size_t i = 0; i < rep.details.size(); ++i)
        write_lepskii_detail_csv(join(out, "lepskii_t" + std::to_string(i) + ".csv"), rep.details[i]);
    std::cout << std::setprecision(4) << "tau " << rep.tau << ", slope " << rep.fit.slope << " (predicted "
              << rep.predicted_exponent << "), efficiency fraction "
              << rep.efficiency_fraction << "\n";
}

void concentration(const Config& cfg, const ExperimentConfig& ec, std::uint64_t seed, const std::string& out) {
    const GridFunction& g = ec.scenario.instance.gdag;
    const double s = cfg.get_double("concentration.s", 1.0);
    const double R = cfg.get_double("concentration.R", 1.0);
    const int J = static_cast<int>(cfg.get_int("concentration.J", ec.scenario.domain.n() / 2));
    const auto ts = cfg.get_list("concentration.t_grid", {10, 1e2, 1e3, 1e4});
    const int reps = static_cast<int>(cfg.get_int("concentration.replicates", 500));
    const auto rho = cfg.get_list("concentration.rho_grid", {1, 1.5, 2, 2.5, 3, 4, 5, 6});

    const ExpectationStudy st = expectation_study(g, s, R, J, ts, reps, seed);
    const TailTable tab = build_tail_table(ts, st.samples, rho);
    const double C = estimate_Cconc(tab, R);
    const GridFunction gn = (1.0 / integrate(g)) * g;
    const ExpectationStudy stn = expectation_study(gn, s, R, J, ts, reps, seed);
    const double Cn = estimate_Cconc(build_tail_table(ts, stn.samples, rho), R);

    write_tail_csv(join(out, "tail.csv"), tab);
    nlohmann::json j{{"C_conc", C},
                     {"C_conc_normalized", Cn},
                     {"c1", st.c1},
                     {"truncation_remainder", st.remainder},
                     {"log_shift_radius", log_shift_radius(std::max(1.0, R), ec.scenario.sigma, s,
                                                           cfg.get_double("concentration.calibration", 1.0))}};
    for (const auto& r : st.rows)
        j["expectation"].push_back(
            {{"t", r.t}, {"mean", r.mean}, {"std", r.std}, {"stderr", r.stderr_}, {"bound", r.bound}});
    std::ofstream os(join(out, "concentration.json"));
    os << j.dump(2) << '\n';
    std::cout << std::setprecision(4) << "C_conc " << C << " (normalized " << Cn << ")\n";
}

void conjugate(const Config& cfg, const ExperimentConfig& ec, const std::string& out) {
    const auto grid = cfg.get_list("conjugate.s_grid", {-100, -10, -1, -0.1, -0.01});
    std::ofstream os(join(out, "conjugate.csv"));
    os << std::setprecision(17) << "s,value,argmax\n";
    for (double s : grid) {
        const ConjugateValue c = conjugate_neg_full(ec.scenario.phi, s);
        os << s << ',' << c.value << ',' << c.argmax << '\n';
    }
    std::cout << ec.scenario.phi.describe() << ": " << grid.size() << " conjugate values written\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson inverse problems: simulation, Tikhonov solves and rate studies"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    for (const char* name : {"simulate", "solve", "apriori", "lepskii", "concentration", "conjugate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "flat key = value config file")->required();
        sub->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--out", out_dir, "output directory");
    }
    CLI11_PARSE(app, argc, argv);
    try {
        Config cfg = Config::load(config_path);
        if (seed_given) cfg.set("experiment.seed", std::to_string(seed));
        ExperimentConfig ec = experiment_from_config(cfg);
        const std::string out = out_dir.empty() ? ec.output_dir : out_dir;
        fs::create_directories(out);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "simulate") simulate(cfg, ec, ec.seed, out);
        else if (cmd == "solve") solve(cfg, ec, ec.seed, out);
        else if (cmd == "apriori") apriori(ec, out);
        else if (cmd == "lepskii") lepskii(ec, out);
        else if (cmd == "concentration") concentration(cfg, ec, ec.seed, out);
        else conjugate(cfg, ec, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include "pitik/concentration.hpp"
#include "pitik/config.hpp"
#include "pitik/lepskii.hpp"
#include "pitik/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pitik {

struct LogLogFit {
    double slope;
    double intercept;
    double r2;
};

LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double trimmed_mean(std::vector<double> v, double trim);

struct Scenario {
    Domain domain;
    SourceInstance instance;
    Penalty penalty;
    double sigma = 0.1;
    IndexFunction phi = IndexFunction::holder(1.0, 0.5);  // drives the a-priori rule
};

struct ExperimentConfig {
    Scenario scenario;
    std::vector<double> t_grid{1e2, 1e3, 1e4, 1e5, 1e6};
    int replicates = 50;
    std::uint64_t seed = 1;
    double trim = 0.02;
    SolverOptions solver;
    double lepskii_r = std::sqrt(2.0);
    std::optional<double> lepskii_tau;  // empty: calibrate from the concentration lab
    double lepskii_s = 0.75;
    std::string output_dir = ".";
};

// Builds an experiment from a flat config; missing keys take the defaults of
// the standard spectral scenario.
ExperimentConfig experiment_from_config(const Config& cfg);

struct AprioriRow {
    double t;
    double alpha;
    double mean;
    double trimmed;
    double stderr_;
    int used;
    int excluded;
};

struct AprioriReport {
    std::vector<AprioriRow> rows;
    LogLogFit fit{0, 0, 0};      // on trimmed means
    LogLogFit raw_fit{0, 0, 0};  // on raw means
    double predicted_exponent = 0.0;
    double exclusion_rate = 0.0;
    int solves = 0;
    int minimizer_checks = 0;
    int minimizer_violations = 0;
    int bound_checks = 0;
    int bound_violations = 0;
    bool exclusion_ok = true;
};

AprioriReport run_apriori_study(const ExperimentConfig& cfg);

struct LepskiiDetail {
    double t;
    std::vector<double> alphas;
    std::vector<double> bregman_error;
    std::vector<double> l2_error;
    std::vector<double> psi;
    int j_bal;
    int oracle;
};

struct LepskiiRow {
    double t;
    int m;
    double mean;  // ||u_jbal - udag||^q
    double trimmed;
    double stderr_;
    double oracle_mean;
    double mean_j_bal;
    int used;
    int excluded;
};

struct LepskiiReport {
    double tau = 0.0;
    double C_conc = 0.0;
    std::vector<LepskiiRow> rows;
    std::vector<double> efficiency;
    std::vector<LepskiiDetail> details;  // replicate 0 of each t
    LogLogFit fit{0, 0, 0};              // trimmed mean vs ln(t)/sqrt(t)
    double predicted_exponent = 0.0;     // kappa for phi = C tau^kappa
    double efficiency_limit = 0.0;
    double efficiency_fraction = 0.0;
    double exclusion_rate = 0.0;
    int oracle_checks = 0;
    int oracle_violations = 0;
};

// tau = R max{sigma^-(floor(s)+1), |ln R|} C_conc / 4 with R the H^s image radius.
double lepskii_tau_formula(const Scenario& sc, double s, double C_conc);
double calibrate_Cconc(const Scenario& sc, double s, std::uint64_t seed);
LepskiiReport run_lepskii_study(const ExperimentConfig& cfg);

struct ConcentrationReport {
    ExpectationStudy study;
    TailTable tail;
    double C_conc = 0.0;
    double C_conc_normalized = 0.0;
    ExceedanceFit exceedance;
};

// Reports and IO; all floats are written with 17 significant digits.
void write_rates_csv(const std::string& path, const AprioriReport& rep);
void write_rates_csv(const std::string& path, const LepskiiReport& rep);
void write_summary_json(const std::string& path, const AprioriReport& rep);
void write_summary_json(const std::string& path, const LepskiiReport& rep);
void write_lepskii_detail_csv(const std::string& path, const LepskiiDetail& d);
void write_reconstruction_json(const std::string& path, const Reconstruction& rec);
void write_tail_csv(const std::string& path, const TailTable& tab);

}  // namespace pitik

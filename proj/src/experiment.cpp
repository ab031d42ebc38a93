#include "pitik/experiment.hpp"

#include "pitik/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace pitik {

namespace {

struct MeanStats {
    double mean = 0.0, trimmed = 0.0, stderr_ = 0.0;
};

MeanStats stats(const std::vector<double>& v, double trim) {
    MeanStats s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
    s.trimmed = trimmed_mean(v, trim);
    return s;
}

bool has_certified_vsc(const Scenario& sc) {
    return sc.instance.family.kind == SourceFamily::Kind::Holder && sc.instance.family.index == 0.5 &&
           sc.penalty.kind() == Penalty::Kind::Quadratic && l2_norm(sc.instance.omega) > 0.0;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << std::setprecision(17);
    return os;
}

nlohmann::json fit_json(const LogLogFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

}  // namespace

LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw Error("slope fit needs >= 3 paired points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("slope fit needs positive coordinates");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = lx.size();
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw Error("slope fit needs distinct x values");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx, syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0};
}

double trimmed_mean(std::vector<double> v, double trim) {
    if (v.empty()) throw Error("trimmed mean of an empty sample");
    if (!(trim >= 0.0 && trim < 0.5)) throw Error("trim fraction must lie in [0, 0.5)");
    std::sort(v.begin(), v.end());
    const std::size_t k = static_cast<std::size_t>(std::floor(trim * v.size()));
    return std::accumulate(v.begin() + k, v.end() - k, 0.0) / (v.size() - 2 * k);
}

ExperimentConfig experiment_from_config(const Config& cfg) {
    ExperimentConfig ec;
    const Domain dom(static_cast<int>(cfg.get_int("domain.d", 1)), static_cast<int>(cfg.get_int("domain.n", 256)));

    const std::string kind = cfg.get_string("operator.kind", "spectral-diagonal");
    const double b = cfg.get_double("operator.background", 0.5);
    ForwardOperator op = ForwardOperator::spectral_diagonal(dom, cfg.get_double("operator.decay_a", 1.5), b);
    if (kind == "periodic-convolution") {
        auto path = cfg.raw("operator.kernel_file");
        if (!path) throw Error("periodic-convolution needs operator.kernel_file");
        op = ForwardOperator::periodic_convolution(read_grid_csv(*path, dom), b);
    } else if (kind != "spectral-diagonal") {
        throw Error("unknown operator.kind '" + kind + "'");
    }

    const std::string fam = cfg.get_string("source.family", "holder");
    SourceFamily family;
    if (fam == "holder")
        family = SourceFamily::holder(cfg.get_double("source.nu", 0.5));
    else if (fam == "log")
        family = SourceFamily::logarithmic(cfg.get_double("source.p", 1.0));
    else
        throw Error("unknown source.family '" + fam + "'");
    SourceOptions so;
    so.omega_decay = cfg.get_double("source.omega_decay", 0.25);
    so.margin = cfg.get_double("source.margin", 0.5);
    so.phi_constant = cfg.get_double("phi.C", 100.0);
    SourceInstance inst = make_source_instance(op, family, static_cast<std::uint64_t>(cfg.get_int("source.seed", 7)),
                                               cfg.get_double("source.scale", 30.0), so);

    Box box{cfg.get_double("penalty.box_lo", 0.0), 0.0};
    const std::string hi = cfg.get_string("penalty.box_hi", "auto");
    box.hi = hi == "auto" ? 2.0 * inst.udag.max() + 2.0 : cfg.get_double("penalty.box_hi", 0.0);

    const std::string pk = cfg.get_string("penalty.kind", "quadratic");
    Penalty pen = Penalty::quadratic(inst.u0, box);
    if (pk == "quadratic") {
        if (auto u0 = cfg.raw("penalty.u0_file")) pen = Penalty::quadratic(read_grid_csv(*u0, dom), box);
    } else if (pk == "entropy") {
        pen = Penalty::entropy(dom, box);
    } else {
        throw Error("unknown penalty.kind '" + pk + "'");
    }

    IndexFunction phi = inst.predicted_phi;
    if (auto pf = cfg.raw("phi.family")) {
        if (*pf == "holder")
            phi = IndexFunction::holder(cfg.get_double("phi.C", 1.0), cfg.get_double("phi.kappa", 0.5));
        else if (*pf == "logarithmic")
            phi = IndexFunction::logarithmic(cfg.get_double("phi.C", 1.0), cfg.get_double("phi.p", 1.0),
                                             cfg.get_double("phi.tau_max", std::exp(-1.0)));
        else
            throw Error("unknown phi.family '" + *pf + "'");
    }

    ec.scenario = Scenario{dom, inst, pen, cfg.get_double("fidelity.sigma", 0.1), phi};

    ec.t_grid = cfg.get_list("experiment.t_grid", ec.t_grid);
    if (!std::is_sorted(ec.t_grid.begin(), ec.t_grid.end())) throw Error("experiment.t_grid must be increasing");
    ec.replicates = static_cast<int>(cfg.get_int("experiment.replicates", ec.replicates));
    if (ec.replicates < 10) throw Error("experiment.replicates must be >= 10");
    ec.seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 1));
    ec.trim = cfg.get_double("experiment.trim", ec.trim);
    ec.solver.max_iterations = static_cast<int>(cfg.get_int("solver.max_iterations", ec.solver.max_iterations));
    ec.solver.rel_tolerance = cfg.get_double("solver.rel_tolerance", ec.solver.rel_tolerance);
    ec.solver.backtracking = cfg.get_double("solver.backtracking", ec.solver.backtracking);
    ec.solver.acceleration = cfg.get_bool("solver.acceleration", ec.solver.acceleration);
    ec.lepskii_r = cfg.get_double("lepskii.r", ec.lepskii_r);
    const std::string tau = cfg.get_string("lepskii.tau", "auto");
    if (tau != "auto") ec.lepskii_tau = cfg.get_double("lepskii.tau", 1.0);
    ec.lepskii_s = cfg.get_double("lepskii.s", ec.lepskii_s);
    ec.output_dir = cfg.get_string("output.dir", ".");
    return ec;
}

AprioriReport run_apriori_study(const ExperimentConfig& cfg) {
    const Scenario& sc = cfg.scenario;
    const SourceInstance& inst = sc.instance;
    const std::size_t R = static_cast<std::size_t>(cfg.replicates);
    const std::size_t total = cfg.t_grid.size() * R;
    const bool certified = has_certified_vsc(sc);
    const IndexFunction cert = certified ? certified_vsc_phi(inst, sc.penalty.box(), sc.sigma) : sc.phi;

    struct Outcome {
        bool converged = false;
        double breg = 0.0;
        bool minimizer_ok = true;
        bool bound_checked = false;
        bool bound_ok = true;
    };
    std::vector<Outcome> out(total);
    std::vector<double> alphas;
    for (double t : cfg.t_grid) alphas.push_back(apriori_alpha(sc.phi, t, 1.0));

    parallel_for(total, [&](std::size_t idx) {
        const std::size_t ti = idx / R;
        const double t = cfg.t_grid[ti], alpha = alphas[ti];
        Rng rng(split_seed(cfg.seed, idx));
        const PointData data = sample_poisson(inst.gdag, t, rng);
        const Reconstruction rec = minimize_tikhonov(inst.op, poisson_fidelity(data, sc.sigma), alpha, sc.penalty, cfg.solver);
        Outcome& o = out[idx];
        o.converged = rec.converged;
        if (!rec.converged) return;
        o.breg = bregman(sc.penalty, rec.u_alpha, inst.udag);
        const double J_rec = objective(inst.op, data, sc.sigma, alpha, sc.penalty, rec.u_alpha);
        const double J_true = objective(inst.op, data, sc.sigma, alpha, sc.penalty, inst.udag);
        o.minimizer_ok = J_rec <= J_true + 1e-12 * (1.0 + std::abs(J_true));
        if (certified) {
            const GridFunction g = apply(inst.op, rec.u_alpha);
            const double err = 2.0 * std::max(noise_functional_Z(g, data, inst.gdag, sc.sigma),
                                              noise_functional_Z(inst.gdag, data, inst.gdag, sc.sigma));
            const double bound = deterministic_bound(cert, ErrorBudget{1.0, err, 1.0}, alpha);
            o.bound_checked = true;
            o.bound_ok = o.breg <= bound * (1.0 + 1e-9) + 1e-12;
        }
    });

    AprioriReport rep;
    rep.predicted_exponent = sc.phi.family() == IndexFunction::Family::Holder ? -0.5 * sc.phi.kappa() : std::nan("");
    int excluded_total = 0;
    std::vector<double> ts, trimmed, raw;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        std::vector<double> v;
        int excl = 0;
        for (std::size_t r = 0; r < R; ++r) {
            const Outcome& o = out[ti * R + r];
            ++rep.solves;
            if (!o.converged) {
                ++excl;
                continue;
            }
            v.push_back(o.breg);
            ++rep.minimizer_checks;
            if (!o.minimizer_ok) ++rep.minimizer_violations;
            if (o.bound_checked) {
                ++rep.bound_checks;
                if (!o.bound_ok) ++rep.bound_violations;
            }
        }
        excluded_total += excl;
        const MeanStats s = stats(v, cfg.trim);
        rep.rows.push_back({cfg.t_grid[ti], alphas[ti], s.mean, s.trimmed, s.stderr_, static_cast<int>(v.size()), excl});
        if (!v.empty()) {
            ts.push_back(cfg.t_grid[ti]);
            trimmed.push_back(s.trimmed);
            raw.push_back(s.mean);
        }
    }
    rep.exclusion_rate = double(excluded_total) / total;
    rep.exclusion_ok = rep.exclusion_rate <= 0.05;
    if (ts.size() >= 3) {
        rep.fit = fit_loglog_slope(ts, trimmed);
        rep.raw_fit = fit_loglog_slope(ts, raw);
    }
    return rep;
}

double lepskii_tau_formula(const Scenario& sc, double s, double C_conc) {
    const double R = hs_image_radius(sc.instance.op, sc.penalty.box(), s);
    return 0.25 * R * std::max(std::pow(sc.sigma, -(std::floor(s) + 1.0)), std::abs(std::log(R))) * C_conc;
}

double calibrate_Cconc(const Scenario& sc, double s, std::uint64_t seed) {
    const std::vector<double> ts{1e2, 1e3, 1e4};
    const ExpectationStudy st = expectation_study(sc.instance.gdag, s, 1.0, sc.domain.n() / 2, ts, 200, seed);
    // sqrt(t) times the proxy scales like sqrt(c1 ||gdag||_1), so the rho grid
    // has to reach well beyond that scale.
    std::vector<double> rho;
    for (double r = 1.0; r <= 64.0 * (1.0 + 1e-12); r *= std::sqrt(2.0)) rho.push_back(r);
    const TailTable tab = build_tail_table(ts, st.samples, rho);
    return estimate_Cconc(tab, 1.0);
}

LepskiiReport run_lepskii_study(const ExperimentConfig& cfg) {
    const Scenario& sc = cfg.scenario;
    const SourceInstance& inst = sc.instance;
    const MetricConstants mc = metric_constants(sc.penalty);
    const double q = mc.q, C_bd = mc.C_bd;
    const double r = cfg.lepskii_r;
    LepskiiReport rep;
    if (cfg.lepskii_tau) {
        rep.tau = *cfg.lepskii_tau;
    } else {
        rep.C_conc = calibrate_Cconc(sc, cfg.lepskii_s, cfg.seed ^ 0x5eedULL);
        rep.tau = lepskii_tau_formula(sc, cfg.lepskii_s, rep.C_conc);
    }
    rep.efficiency_limit = 1.5 * std::pow(3.0, q) * r * r;
    rep.predicted_exponent = sc.phi.family() == IndexFunction::Family::Holder ? sc.phi.kappa() : std::nan("");
    const bool certified = has_certified_vsc(sc);
    const IndexFunction cert = certified ? certified_vsc_phi(inst, sc.penalty.box(), sc.sigma) : sc.phi;
    const GridFunction ustar = subgradient(sc.penalty, inst.udag);

    const std::size_t R = static_cast<std::size_t>(cfg.replicates);
    const std::size_t total = cfg.t_grid.size() * R;
    struct Outcome {
        bool converged = true;
        double err = 0.0, oracle_err = 0.0;
        int j_bal = 0, oracle = 0;
        bool oracle_checked = false, oracle_ok = true;
        LepskiiDetail detail;
    };
    std::vector<Outcome> out(total);
    std::vector<AlphaSequence> seqs;
    for (double t : cfg.t_grid) seqs.push_back(alpha_sequence(t, rep.tau, r));

    parallel_for(total, [&](std::size_t idx) {
        const std::size_t ti = idx / R;
        const double t = cfg.t_grid[ti];
        const AlphaSequence& seq = seqs[ti];
        Rng rng(split_seed(cfg.seed, idx));
        const PointData data = sample_poisson(inst.gdag, t, rng);
        const Fidelity fid = poisson_fidelity(data, sc.sigma);
        Outcome& o = out[idx];
        std::vector<GridFunction> recs;
        std::optional<GridFunction> warm;
        for (double a : seq.alphas) {
            Reconstruction rec = minimize_tikhonov(inst.op, fid, a, sc.penalty, cfg.solver, warm);
            if (!rec.converged) o.converged = false;
            warm = rec.u_alpha;
            recs.push_back(std::move(rec.u_alpha));
        }
        if (!o.converged) return;
        const BalanceResult bal = balance(recs, q, C_bd, r);
        o.j_bal = bal.j_bal;
        o.oracle = oracle_best(recs, inst.udag, sc.penalty, ustar);
        std::vector<double> errs, bregs;
        for (const auto& u : recs) {
            errs.push_back(std::pow(l2_norm(u - inst.udag), q));
            bregs.push_back(bregman(sc.penalty, u, inst.udag, ustar));
        }
        o.err = errs[o.j_bal - 1];
        o.oracle_err = errs[o.oracle - 1];
        if (certified) {
            std::vector<GridFunction> images;
            for (const auto& u : recs) images.push_back(apply(inst.op, u));
            const double need = required_err_bound(images, data, inst.gdag, sc.sigma);
            if (need <= 2.0 * seq.alphas[0]) {
                double best = kInf;
                for (int j = 1; j <= seq.m; ++j) {
                    const ErrorFunctions ef = error_functions(cert, q, C_bd, need, seq.alphas[j - 1]);
                    best = std::min(best, ef.f_app + bal.psi[j - 1]);
                }
                o.oracle_checked = true;
                o.oracle_ok = std::pow(o.err, 1.0 / q) <= 3.0 * std::pow(r, 2.0 / q) * best;
            }
        }
        if (idx % R == 0) {
            std::vector<double> l2;
            for (double e : errs) l2.push_back(std::pow(e, 1.0 / q));
            o.detail = {t, seq.alphas, bregs, l2, bal.psi, bal.j_bal, o.oracle};
        }
    });

    int excluded_total = 0;
    std::vector<double> xs, ys;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        std::vector<double> v, vo, jb;
        int excl = 0;
        for (std::size_t rr = 0; rr < R; ++rr) {
            const Outcome& o = out[ti * R + rr];
            if (rr == 0 && o.converged) rep.details.push_back(o.detail);
            if (!o.converged) {
                ++excl;
                continue;
            }
            v.push_back(o.err);
            vo.push_back(o.oracle_err);
            jb.push_back(o.j_bal);
            rep.efficiency.push_back(o.oracle_err > 0.0 ? o.err / o.oracle_err : 1.0);
            if (o.oracle_checked) {
                ++rep.oracle_checks;
                if (!o.oracle_ok) ++rep.oracle_violations;
            }
        }
        excluded_total += excl;
        const MeanStats s = stats(v, cfg.trim);
        const MeanStats so = stats(vo, cfg.trim);
        const double mj = jb.empty() ? 0.0 : std::accumulate(jb.begin(), jb.end(), 0.0) / jb.size();
        rep.rows.push_back({cfg.t_grid[ti], seqs[ti].m, s.mean, s.trimmed, s.stderr_, so.mean, mj,
                            static_cast<int>(v.size()), excl});
        if (!v.empty()) {
            const double t = cfg.t_grid[ti];
            xs.push_back(std::log(t) / std::sqrt(t));
            ys.push_back(s.trimmed);
        }
    }
    rep.exclusion_rate = double(excluded_total) / total;
    if (!rep.efficiency.empty())
        rep.efficiency_fraction =
            double(std::count_if(rep.efficiency.begin(), rep.efficiency.end(),
                                 [&](double e) { return e <= rep.efficiency_limit; })) /
            rep.efficiency.size();
    if (xs.size() >= 3) rep.fit = fit_loglog_slope(xs, ys);
    return rep;
}

void write_rates_csv(const std::string& path, const AprioriReport& rep) {
    auto os = open_out(path);
    os << "t,mean_bregman,stderr,excluded\n";
    for (const auto& r : rep.rows) os << r.t << ',' << r.mean << ',' << r.stderr_ << ',' << r.excluded << '\n';
}

void write_rates_csv(const std::string& path, const LepskiiReport& rep) {
    auto os = open_out(path);
    os << "t,mean_bregman,stderr,excluded\n";
    for (const auto& r : rep.rows) os << r.t << ',' << r.mean << ',' << r.stderr_ << ',' << r.excluded << '\n';
}

void write_summary_json(const std::string& path, const AprioriReport& rep) {
    nlohmann::json j;
    j["study"] = "apriori";
    j["fit_trimmed"] = fit_json(rep.fit);
    j["fit_raw"] = fit_json(rep.raw_fit);
    j["slope"] = rep.fit.slope;
    j["predicted_exponent"] = rep.predicted_exponent;
    j["exclusion_rate"] = rep.exclusion_rate;
    j["minimizer_checks"] = rep.minimizer_checks;
    j["minimizer_violations"] = rep.minimizer_violations;
    j["bound_checks"] = rep.bound_checks;
    j["bound_violations"] = rep.bound_violations;
    const bool slope_ok = std::abs(rep.fit.slope - rep.predicted_exponent) <= 0.15;
    j["pass"] = {{"slope", slope_ok},
                 {"minimizer_property", rep.minimizer_violations == 0},
                 {"exclusion", rep.exclusion_ok}};
    for (const auto& r : rep.rows)
        j["rows"].push_back({{"t", r.t}, {"alpha", r.alpha}, {"mean_bregman", r.mean}, {"trimmed_mean", r.trimmed},
                             {"stderr", r.stderr_}, {"used", r.used}, {"excluded", r.excluded}});
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

void write_summary_json(const std::string& path, const LepskiiReport& rep) {
    nlohmann::json j;
    j["study"] = "lepskii";
    j["tau"] = rep.tau;
    j["C_conc"] = rep.C_conc;
    j["fit_trimmed"] = fit_json(rep.fit);
    j["slope"] = rep.fit.slope;
    j["predicted_exponent"] = rep.predicted_exponent;
    j["efficiency_limit"] = rep.efficiency_limit;
    j["efficiency_fraction"] = rep.efficiency_fraction;
    j["exclusion_rate"] = rep.exclusion_rate;
    j["oracle_inequality_checks"] = rep.oracle_checks;
    j["oracle_inequality_violations"] = rep.oracle_violations;
    j["pass"] = {{"slope", std::abs(rep.fit.slope - rep.predicted_exponent) <= 0.15},
                 {"efficiency", rep.efficiency_fraction >= 0.95},
                 {"exclusion", rep.exclusion_rate <= 0.05}};
    for (const auto& r : rep.rows)
        j["rows"].push_back({{"t", r.t}, {"m", r.m}, {"mean_error", r.mean}, {"trimmed_mean", r.trimmed},
                             {"stderr", r.stderr_}, {"oracle_mean", r.oracle_mean}, {"mean_j_bal", r.mean_j_bal},
                             {"used", r.used}, {"excluded", r.excluded}});
    for (const auto& d : rep.details)
        j["first_replicate"].push_back(
            {{"t", d.t}, {"j_bal", d.j_bal}, {"oracle_index", d.oracle},
             {"efficiency", d.l2_error[d.oracle - 1] > 0.0
                                ? std::pow(d.l2_error[d.j_bal - 1] / d.l2_error[d.oracle - 1], 2.0)
                                : 1.0}});
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

void write_lepskii_detail_csv(const std::string& path, const LepskiiDetail& d) {
    auto os = open_out(path);
    os << "j,alpha,bregman_error,l2_error,psi,selected\n";
    for (std::size_t j = 0; j < d.alphas.size(); ++j)
        os << j + 1 << ',' << d.alphas[j] << ',' << d.bregman_error[j] << ',' << d.l2_error[j] << ',' << d.psi[j] << ','
           << (int(j) + 1 == d.j_bal ? 1 : 0) << '\n';
}

void write_reconstruction_json(const std::string& path, const Reconstruction& rec) {
    nlohmann::json j{{"alpha", rec.alpha},
                     {"objective", rec.objective},
                     {"iterations", rec.iterations},
                     {"converged", rec.converged},
                     {"kkt_residual", rec.kkt_residual}};
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

void write_tail_csv(const std::string& path, const TailTable& tab) {
    auto os = open_out(path);
    os << "t,rho,coverage,replicates\n";
    for (std::size_t ti = 0; ti < tab.t.size(); ++ti)
        for (std::size_t ri = 0; ri < tab.rho.size(); ++ri)
            os << tab.t[ti] << ',' << tab.rho[ri] << ',' << tab.coverage(ti, ri) << ',' << tab.replicates[ti] << '\n';
}

}  // namespace pitik

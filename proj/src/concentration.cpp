#include "pitik/concentration.hpp"

#include "pitik/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pitik {

namespace {

double freq_sq(const Freq& j) { return double(j[0]) * j[0] + double(j[1]) * j[1]; }

void check_proxy_args(const Domain& dom, double s, int J) {
    if (!(s > 0.5 * dom.dim())) throw Error("supremum proxy needs s > d/2");
    if (J < 0 || J > dom.n() / 2) throw Error("frequency cutoff must lie in [0, n/2]");
}

double weighted_residual(const GridFunction& residual, double s, int J) {
    const FourierCoeffs fc = fourier_coeffs(residual, J);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < fc.c.size(); ++k)
        if (fc.in_set(k)) acc += std::pow(1.0 + freq_sq(fc.domain.freq(k)), -s) * std::norm(fc.c[k]);
    return std::sqrt(acc);
}

}  // namespace

double sup_proxy(const BinnedCounts& counts, const GridFunction& gdag, double s, double R, int J) {
    if (counts.domain != gdag.domain()) throw Error("counts and intensity live on different domains");
    check_proxy_args(gdag.domain(), s, J);
    return R * weighted_residual(counts.density() - gdag, s, J);
}

double sup_proxy(const PointData& data, const GridFunction& gdag, double s, double R, int J) {
    return sup_proxy(bin_counts(data, gdag.domain()), gdag, s, R, J);
}

double weight_sum_c1(const Domain& dom, double s, int J) {
    double acc = 0.0;
    const int dj = dom.dim() == 2 ? J : 0;
    for (int a = -J; a <= J; ++a)
        for (int b = -dj; b <= dj; ++b) {
            if (a <= -dom.n() / 2 || b <= -dom.n() / 2) continue;  // Nyquist counted once
            acc += std::pow(1.0 + double(a) * a + double(b) * b, -s);
        }
    return acc;
}

double truncation_remainder(const Domain& dom, double R, double s, int J) {
    return R * std::pow(1.0 + double(J) * J, 0.5 * (0.5 * dom.dim() - s));
}

ExpectationStudy expectation_study(const GridFunction& gdag, double s, double R, int J, const std::vector<double>& t_grid,
                                   int replicates, std::uint64_t seed) {
    if (replicates < 100) throw Error("expectation study needs >= 100 replicates");
    check_proxy_args(gdag.domain(), s, J);
    ExpectationStudy st;
    st.c1 = weight_sum_c1(gdag.domain(), s, J);
    st.remainder = truncation_remainder(gdag.domain(), R, s, J);
    const double l1 = integrate(gdag);
    const std::size_t R_ = static_cast<std::size_t>(replicates);
    st.samples.assign(t_grid.size(), std::vector<double>(R_));
    parallel_for(t_grid.size() * R_, [&](std::size_t idx) {
        const std::size_t ti = idx / R_, r = idx % R_;
        Rng rng(split_seed(seed, idx));
        const PointData data = sample_poisson(gdag, t_grid[ti], rng);
        st.samples[ti][r] = sup_proxy(data, gdag, s, R, J);
    });
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const auto& v = st.samples[ti];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (v.size() - 1));
        st.rows.push_back({t_grid[ti], mean, sd, sd / std::sqrt(double(v.size())),
                           std::sqrt(st.c1) * R * std::sqrt(l1) / std::sqrt(t_grid[ti])});
    }
    return st;
}

TailTable build_tail_table(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& samples,
                           const std::vector<double>& rho_grid) {
    if (samples.size() != t_grid.size()) throw Error("tail table: one sample set per t required");
    if (!std::is_sorted(rho_grid.begin(), rho_grid.end())) throw Error("tail table: rho grid must be increasing");
    TailTable tab{t_grid, rho_grid, Eigen::MatrixXd::Zero(t_grid.size(), rho_grid.size()), {}};
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const double st = std::sqrt(t_grid[ti]);
        for (std::size_t ri = 0; ri < rho_grid.size(); ++ri) {
            const auto hit = std::count_if(samples[ti].begin(), samples[ti].end(),
                                           [&](double z) { return st * z <= rho_grid[ri]; });
            tab.coverage(ti, ri) = double(hit) / samples[ti].size();
        }
        tab.replicates.push_back(static_cast<int>(samples[ti].size()));
    }
    return tab;
}

double wilson_lower(double p, int n, double z) {
    if (n <= 0) throw Error("Wilson bound needs n > 0");
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * double(n) * n));
    return std::max(0.0, (centre - half) / (1.0 + z2 / n));
}

double estimate_Cconc(const TailTable& tab, double R) {
    if (tab.t.size() < 3) throw Error("C_conc estimation needs >= 3 t values");
    if (std::count_if(tab.rho.begin(), tab.rho.end(), [R](double r) { return r >= R; }) < 5)
        throw Error("C_conc estimation needs >= 5 rho values with rho >= R");
    struct Worst {
        double gap = 0.0;
        std::size_t ti = 0, ri = 0;
    };
    auto check = [&](double C, Worst* worst) {
        bool ok = true;
        for (std::size_t ti = 0; ti < tab.t.size(); ++ti)
            for (std::size_t ri = 0; ri < tab.rho.size(); ++ri) {
                if (tab.rho[ri] < R * C) continue;
                const double need = 1.0 - std::exp(-tab.rho[ri] / (R * C));
                const double have = wilson_lower(tab.coverage(ti, ri), tab.replicates[ti]);
                if (have < need) {
                    ok = false;
                    if (worst && need - have > worst->gap) *worst = {need - have, ti, ri};
                }
            }
        return ok;
    };
    if (check(1.0, nullptr)) return 1.0;
    // Beyond rho_max / R no cell constrains C and feasibility would be vacuous.
    const double cmax = std::min(1e6, *std::max_element(tab.rho.begin(), tab.rho.end()) / R);
    Worst worst;
    if (!check(cmax, &worst)) {
        std::ostringstream os;
        os << "C_conc infeasible up to " << cmax << "; worst cell t=" << tab.t[worst.ti] << " rho=" << tab.rho[worst.ri];
        throw Error(os.str());
    }
    double lo = 1.0, hi = cmax;
    while (hi / lo > 1.0 + 1e-6) {
        const double mid = std::sqrt(lo * hi);
        (check(mid, nullptr) ? hi : lo) = mid;
    }
    return hi;
}

ExceedanceFit exceedance_fit(const std::vector<double>& t_grid, const std::vector<std::vector<double>>& samples,
                             const std::vector<double>& rho_grid) {
    ExceedanceFit out;
    std::vector<double> pooled;
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
        for (double z : samples[ti]) pooled.push_back(std::sqrt(t_grid[ti]) * z);
    std::vector<double> xs, ys;
    double prev = 2.0;
    out.decreasing = true;
    for (double rho : rho_grid) {
        const auto over = std::count_if(pooled.begin(), pooled.end(), [rho](double z) { return z > rho; });
        const double f = double(over) / pooled.size();
        out.rho.push_back(rho);
        out.frequency.push_back(f);
        if (f > prev) out.decreasing = false;
        prev = f;
        if (f > 0.0) {
            xs.push_back(rho);
            ys.push_back(std::log(f));
        }
    }
    if (xs.size() < 3) throw Error("exceedance fit needs >= 3 nonzero frequencies");
    const double n = xs.size();
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return out;
}

double rb_kappa(double epsilon) {
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    return 1.25 + 32.0 / epsilon;
}

double poisson_mean_abs_dev(double lambda) {
    if (!(lambda >= 0.0)) throw Error("Poisson mean must be >= 0");
    if (lambda == 0.0) return 0.0;
    // E|N - lambda| = 2 lambda^(k+1) e^(-lambda) / k!, k = floor(lambda).
    const double k = std::floor(lambda);
    return 2.0 * std::exp((k + 1.0) * std::log(lambda) - lambda - std::lgamma(k + 1.0));
}

double poisson_abs_dev_tail(double lambda, double x) {
    if (!(lambda >= 0.0)) throw Error("Poisson mean must be >= 0");
    if (x <= 0.0) return 1.0;
    if (lambda == 0.0) return 0.0;
    const long long top = static_cast<long long>(lambda + 40.0 * std::sqrt(lambda) + x + 100.0);
    double inside = 0.0;  // P(|N - lambda| < x)
    for (long long k = 0; k <= top; ++k) {
        if (std::abs(double(k) - lambda) >= x) continue;
        inside += std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
    }
    return std::max(0.0, 1.0 - inside);
}

RbReport rb_bound_check(const std::vector<GridFunction>& family, const GridFunction& gdag, double t, int replicates,
                        double epsilon, std::uint64_t seed, const std::vector<double>& rho_grid) {
    if (family.empty()) throw Error("family must be non-empty");
    if (replicates < 1) throw Error("replicates must be positive");
    RbReport rep;
    rep.kappa = rb_kappa(epsilon);
    std::vector<double> means;  // t int f_a gdag
    bool constant_family = family.size() == 1;
    for (const auto& f : family) {
        require_same_domain(f, gdag);
        rep.b = std::max(rep.b, sup_norm(f));
        GridFunction f2 = f;
        f2.values() = f.values().cwiseProduct(f.values());
        rep.v0 = std::max(rep.v0, t * inner(f2, gdag));
        means.push_back(t * inner(f, gdag));
        if (f.max() != f.min()) constant_family = false;
    }
    std::vector<double> Z(static_cast<std::size_t>(replicates));
    parallel_for(Z.size(), [&](std::size_t r) {
        Rng rng(split_seed(seed, r));
        const BinnedCounts c = bin_counts(sample_poisson(gdag, t, rng));
        double z = 0.0;
        for (std::size_t a = 0; a < family.size(); ++a)
            z = std::max(z, std::abs(family[a].values().dot(c.counts) - means[a]));
        Z[r] = z;
    });
    rep.mean_Z = std::accumulate(Z.begin(), Z.end(), 0.0) / Z.size();
    rep.exact_mean_Z = std::nan("");
    const double c = family[0][0];
    const double lambda = t * integrate(gdag);
    if (constant_family) rep.exact_mean_Z = std::abs(c) * poisson_mean_abs_dev(lambda);
    for (double rho : rho_grid) {
        RbRow row;
        row.rho = rho;
        row.bound = std::exp(-rho);
        row.threshold = (1.0 + epsilon) * rep.mean_Z + std::sqrt(12.0 * rep.v0 * rho) + rep.kappa * rep.b * rho;
        // A zero threshold only arises for the zero family; count strict exceedances there.
        const double thr = row.threshold;
        row.empirical_tail =
            double(std::count_if(Z.begin(), Z.end(), [thr](double z) { return thr > 0.0 ? z >= thr : z > 0.0; })) /
            Z.size();
        row.exact_tail = std::nan("");
        if (constant_family) {
            if (c == 0.0) {
                row.exact_tail = 0.0;
            } else {
                const double thr = (1.0 + epsilon) * rep.exact_mean_Z + std::sqrt(12.0 * rep.v0 * rho) + rep.kappa * rep.b * rho;
                row.exact_tail = poisson_abs_dev_tail(lambda, thr / std::abs(c));
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

double log_shift_radius(double R, double sigma, double s, double calibration) {
    if (!(R >= 1.0)) throw Error("log shift radius needs R >= 1");
    if (!(sigma > 0.0)) throw Error("log shift radius needs sigma > 0");
    return calibration * R * std::max(std::pow(sigma, -(std::floor(s) + 1.0)), std::abs(std::log(R)));
}

}  // namespace pitik

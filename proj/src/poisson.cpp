#include "pitik/poisson.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace pitik {

GridFunction BinnedCounts::density() const {
    return GridFunction(domain, counts / (t * domain.cell_volume()));
}

PointData sample_poisson(const GridFunction& gdag, double t, Rng& rng) {
    if (!(t > 0.0)) throw Error("exposure t must be positive");
    if (!gdag.nonnegative()) throw Error("Poisson intensity must be nonnegative");
    const Domain& dom = gdag.domain();
    PointData out{dom, t, {}};
    const double mass = integrate(gdag);
    if (mass <= 0.0) return out;

    std::poisson_distribution<long long> pois(t * mass);
    long long remaining = pois(rng);
    out.points.reserve(static_cast<std::size_t>(remaining));

    // Multinomial cell labels drawn as a chain of conditional binomials,
    // then uniform positions inside each cell.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double h = dom.h();
    double rest = gdag.values().sum();
    for (Eigen::Index k = 0; k < gdag.size() && remaining > 0; ++k) {
        const double w = gdag[k];
        long long nk;
        if (w >= rest) {
            nk = remaining;
        } else {
            std::binomial_distribution<long long> bin(remaining, w / rest);
            nk = bin(rng);
        }
        rest -= w;
        remaining -= nk;
        const Point c = dom.center(k);
        for (long long i = 0; i < nk; ++i) {
            Point x{c[0] + (unif(rng) - 0.5) * h, 0.0};
            if (dom.dim() == 2) x[1] = c[1] + (unif(rng) - 0.5) * h;
            out.points.push_back(x);
        }
    }
    return out;
}

double integrate_against(const GridFunction& psi, const PointData& data) {
    if (psi.domain() != data.domain) throw Error("integrand and data live on different domains");
    double acc = 0.0;
    for (const auto& x : data.points) acc += psi[data.domain.cell_of(x)];
    return acc / data.t;
}

double integrate_against(const GridFunction& psi, const BinnedCounts& counts) {
    if (psi.domain() != counts.domain) throw Error("integrand and counts live on different domains");
    return psi.values().dot(counts.counts) / counts.t;
}

BinnedCounts bin_counts(const PointData& data, const Domain& dom) {
    BinnedCounts out{dom, data.t, Eigen::VectorXd::Zero(dom.size())};
    for (const auto& x : data.points) out.counts[dom.cell_of(x)] += 1.0;
    return out;
}

BinnedCounts bin_counts(const PointData& data) { return bin_counts(data, data.domain); }

void write_points_csv(const std::string& path, const PointData& data) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << std::setprecision(17) << "# t=" << data.t << '\n';
    os << (data.domain.dim() == 1 ? "x1\n" : "x1,x2\n");
    for (const auto& x : data.points) {
        os << x[0];
        if (data.domain.dim() == 2) os << ',' << x[1];
        os << '\n';
    }
}

PointData read_points_csv(const std::string& path, const Domain& dom) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    PointData out{dom, 0.0, {}};
    std::string line;
    bool have_t = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("t=");
            if (pos != std::string::npos) {
                out.t = std::stod(line.substr(pos + 2));
                have_t = true;
            }
            continue;
        }
        if (line[0] == 'x') continue;
        std::istringstream ls(line);
        Point x{0.0, 0.0};
        char comma = ',';
        if (!(ls >> x[0])) throw Error("points csv: malformed row '" + line + "'");
        if (dom.dim() == 2 && !(ls >> comma >> x[1])) throw Error("points csv: expected two coordinates");
        out.points.push_back(x);
    }
    if (!have_t || !(out.t > 0.0)) throw Error("points csv: missing '# t=<value>' line");
    return out;
}

void write_counts_csv(const std::string& path, const BinnedCounts& counts) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "index,count\n";
    for (Eigen::Index i = 0; i < counts.counts.size(); ++i)
        os << i << ',' << static_cast<long long>(counts.counts[i]) << '\n';
}

}  // namespace pitik

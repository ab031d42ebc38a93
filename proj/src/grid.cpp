#include "pitik/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pitik {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

Eigen::VectorXcd transform(const Domain& dom, const Eigen::VectorXcd& x, bool inverse) {
    auto& eng = fft_engine();
    const int n = dom.n();
    Eigen::VectorXcd out(x.size());
    if (dom.dim() == 1) {
        if (inverse)
            eng.inv(out, x);
        else
            eng.fwd(out, x);
        return out;
    }
    Eigen::VectorXcd line(n), res(n);
    Eigen::VectorXcd tmp(x.size());
    for (int i0 = 0; i0 < n; ++i0) {
        line = x.segment(Eigen::Index(i0) * n, n);
        if (inverse)
            eng.inv(res, line);
        else
            eng.fwd(res, line);
        tmp.segment(Eigen::Index(i0) * n, n) = res;
    }
    for (int i1 = 0; i1 < n; ++i1) {
        for (int i0 = 0; i0 < n; ++i0) line[i0] = tmp[Eigen::Index(i0) * n + i1];
        if (inverse)
            eng.inv(res, line);
        else
            eng.fwd(res, line);
        for (int i0 = 0; i0 < n; ++i0) out[Eigen::Index(i0) * n + i1] = res[i0];
    }
    return out;
}

// exp(-i pi j/n) per axis: the cell centres sit at (k + 1/2) h.
cplx center_phase(const Domain& dom, const Freq& j) {
    double arg = 0.0;
    for (int a = 0; a < dom.dim(); ++a) arg += j[a];
    return std::polar(1.0, -M_PI * arg / dom.n());
}

}  // namespace

Domain::Domain(int d, int n) : d_(d), n_(n) {
    if (d != 1 && d != 2) throw Error("domain dimension must be 1 or 2");
    if (n < 8 || !power_of_two(n)) throw Error("grid size must be a power of two >= 8");
}

double Domain::cell_volume() const { return d_ == 1 ? h() : h() * h(); }

Point Domain::center(Eigen::Index cell) const {
    const double hh = h();
    if (d_ == 1) return {(cell + 0.5) * hh, 0.0};
    return {(cell / n_ + 0.5) * hh, (cell % n_ + 0.5) * hh};
}

Eigen::Index Domain::cell_of(const Point& x) const {
    auto axis = [this](double v) {
        int k = static_cast<int>(std::floor(v * n_));
        k %= n_;
        if (k < 0) k += n_;
        return k;
    };
    if (d_ == 1) return axis(x[0]);
    return Eigen::Index(axis(x[0])) * n_ + axis(x[1]);
}

Freq Domain::freq(Eigen::Index cell) const {
    if (d_ == 1) return {freq_of_bin(static_cast<int>(cell)), 0};
    return {freq_of_bin(static_cast<int>(cell / n_)), freq_of_bin(static_cast<int>(cell % n_))};
}

GridFunction::GridFunction(const Domain& dom, Eigen::VectorXd values) : dom_(dom), v_(std::move(values)) {
    if (v_.size() != dom_.size()) throw Error("grid function size does not match domain");
    if (!v_.allFinite()) throw Error("grid function values must be finite");
}

GridFunction GridFunction::constant(const Domain& dom, double c) {
    return GridFunction(dom, Eigen::VectorXd::Constant(dom.size(), c));
}

GridFunction GridFunction::sample(const Domain& dom, const std::function<double(const Point&)>& f) {
    Eigen::VectorXd v(dom.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(dom.center(i));
    return GridFunction(dom, std::move(v));
}

void require_same_domain(const GridFunction& a, const GridFunction& b) {
    if (a.domain() != b.domain()) throw Error("grid functions live on different domains");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    require_same_domain(*this, o);
    v_ += o.v_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    require_same_domain(*this, o);
    v_ -= o.v_;
    return *this;
}

GridFunction& GridFunction::operator*=(double c) {
    v_ *= c;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double c, GridFunction a) { return a *= c; }
GridFunction operator+(GridFunction a, double c) {
    a.values().array() += c;
    return a;
}

double integrate(const GridFunction& f) { return f.domain().cell_volume() * f.values().sum(); }

double inner(const GridFunction& f, const GridFunction& g) {
    require_same_domain(f, g);
    return f.domain().cell_volume() * f.values().dot(g.values());
}

double l2_norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

double sup_norm(const GridFunction& f) { return f.values().cwiseAbs().maxCoeff(); }

Eigen::VectorXcd dft(const Domain& dom, const Eigen::VectorXcd& x) { return transform(dom, x, false); }
Eigen::VectorXcd idft(const Domain& dom, const Eigen::VectorXcd& x) { return transform(dom, x, true); }

bool FourierCoeffs::in_set(Eigen::Index bin) const {
    Freq j = domain.freq(bin);
    for (int a = 0; a < domain.dim(); ++a)
        if (std::abs(j[a]) > cutoff) return false;
    return true;
}

cplx FourierCoeffs::at(const Freq& j) const {
    const int n = domain.n();
    for (int a = 0; a < domain.dim(); ++a) {
        if (std::abs(j[a]) > cutoff) return 0.0;
        if (j[a] <= -n / 2 || j[a] > n / 2) throw Error("frequency outside the grid's index range");
    }
    auto bin = [n](int f) { return f >= 0 ? f : f + n; };
    Eigen::Index idx = domain.dim() == 1 ? bin(j[0]) : Eigen::Index(bin(j[0])) * n + bin(j[1]);
    return c[idx];
}

FourierCoeffs fourier_coeffs(const GridFunction& f, int cutoff) {
    const Domain& dom = f.domain();
    if (cutoff < 0 || cutoff > dom.n() / 2) throw Error("frequency cutoff must lie in [0, n/2]");
    FourierCoeffs fc{dom, cutoff, dft(dom, f.values().cast<cplx>())};
    const double vol = dom.cell_volume();
    for (Eigen::Index k = 0; k < fc.c.size(); ++k) {
        if (fc.in_set(k))
            fc.c[k] *= vol * center_phase(dom, dom.freq(k));
        else
            fc.c[k] = 0.0;
    }
    return fc;
}

FourierCoeffs fourier_coeffs(const GridFunction& f) { return fourier_coeffs(f, f.domain().n() / 2); }

GridFunction synthesize(const FourierCoeffs& fc) {
    const Domain& dom = fc.domain;
    Eigen::VectorXcd spec(fc.c.size());
    const double vol = dom.cell_volume();
    for (Eigen::Index k = 0; k < spec.size(); ++k)
        spec[k] = fc.in_set(k) ? fc.c[k] / (vol * center_phase(dom, dom.freq(k))) : cplx(0.0);
    return GridFunction(dom, idft(dom, spec).real());
}

double sobolev_norm(const FourierCoeffs& fc, double s) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < fc.c.size(); ++k) {
        if (!fc.in_set(k)) continue;
        Freq j = fc.domain.freq(k);
        double j2 = double(j[0]) * j[0] + double(j[1]) * j[1];
        acc += std::pow(1.0 + j2, s) * std::norm(fc.c[k]);
    }
    return std::sqrt(acc);
}

double sobolev_norm(const GridFunction& f, double s, int cutoff) { return sobolev_norm(fourier_coeffs(f, cutoff), s); }

void write_csv(std::ostream& os, const GridFunction& f) {
    os << "index,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < f.size(); ++i) os << i << ',' << f[i] << '\n';
}

void write_csv(const std::string& path, const GridFunction& f) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_csv(os, f);
}

GridFunction read_grid_csv(std::istream& is, const Domain& dom) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("index,value", 0) != 0) throw Error("grid csv: missing header");
    Eigen::VectorXd v = Eigen::VectorXd::Constant(dom.size(), std::nan(""));
    Eigen::Index rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long idx;
        char comma;
        double val;
        if (!(ls >> idx >> comma >> val) || comma != ',') throw Error("grid csv: malformed row '" + line + "'");
        if (idx < 0 || idx >= dom.size()) throw Error("grid csv: index out of range");
        v[idx] = val;
        ++rows;
    }
    if (rows != dom.size()) throw Error("grid csv: expected " + std::to_string(dom.size()) + " rows");
    return GridFunction(dom, std::move(v));
}

GridFunction read_grid_csv(const std::string& path, const Domain& dom) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    return read_grid_csv(is, dom);
}

}  // namespace pitik

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace pitik {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;
using Freq = std::array<int, 2>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Uniform periodic grid on the unit torus [0,1)^d. Cells are indexed in
// row-major order, the first coordinate varying slowest.
class Domain {
public:
    Domain() = default;
    Domain(int d, int n);

    int dim() const { return d_; }
    int n() const { return n_; }
    double h() const { return 1.0 / n_; }
    double cell_volume() const;
    Eigen::Index size() const { return d_ == 1 ? n_ : Eigen::Index(n_) * n_; }

    Point center(Eigen::Index cell) const;
    Eigen::Index cell_of(const Point& x) const;
    // Signed frequency of DFT bin k along one axis, in (-n/2, n/2].
    int freq_of_bin(int k) const { return k <= n_ / 2 ? k : k - n_; }
    Freq freq(Eigen::Index cell) const;

    bool operator==(const Domain& o) const { return d_ == o.d_ && n_ == o.n_; }
    bool operator!=(const Domain& o) const { return !(*this == o); }

private:
    int d_ = 1;
    int n_ = 8;
};

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(const Domain& dom, Eigen::VectorXd values);
    static GridFunction constant(const Domain& dom, double c);
    static GridFunction sample(const Domain& dom, const std::function<double(const Point&)>& f);

    const Domain& domain() const { return dom_; }
    const Eigen::VectorXd& values() const { return v_; }
    Eigen::VectorXd& values() { return v_; }
    double operator[](Eigen::Index i) const { return v_[i]; }
    double& operator[](Eigen::Index i) { return v_[i]; }
    Eigen::Index size() const { return v_.size(); }

    double min() const { return v_.minCoeff(); }
    double max() const { return v_.maxCoeff(); }
    bool nonnegative() const { return v_.minCoeff() >= 0.0; }

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double c);

private:
    Domain dom_;
    Eigen::VectorXd v_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double c, GridFunction a);
GridFunction operator+(GridFunction a, double c);

void require_same_domain(const GridFunction& a, const GridFunction& b);

double integrate(const GridFunction& f);
double inner(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);
double sup_norm(const GridFunction& f);

// Raw DFT helpers over the full bin array (no normalisation on forward,
// 1/n^d on inverse). Used by the operator and coefficient code.
Eigen::VectorXcd dft(const Domain& dom, const Eigen::VectorXcd& x);
Eigen::VectorXcd idft(const Domain& dom, const Eigen::VectorXcd& x);

// Coefficients <f, e_j> for e_j(x) = exp(2 pi i j.x), restricted to
// |j|_inf <= cutoff. Stored over the full bin array; entries outside the
// index set are zero.
struct FourierCoeffs {
    Domain domain;
    int cutoff = 0;
    Eigen::VectorXcd c;

    bool in_set(Eigen::Index bin) const;
    cplx at(const Freq& j) const;
};

FourierCoeffs fourier_coeffs(const GridFunction& f, int cutoff);
FourierCoeffs fourier_coeffs(const GridFunction& f);
GridFunction synthesize(const FourierCoeffs& fc);

double sobolev_norm(const FourierCoeffs& fc, double s);
double sobolev_norm(const GridFunction& f, double s, int cutoff);

// CSV with header "index,value" and 17 significant digits.
void write_csv(std::ostream& os, const GridFunction& f);
void write_csv(const std::string& path, const GridFunction& f);
GridFunction read_grid_csv(std::istream& is, const Domain& dom);
GridFunction read_grid_csv(const std::string& path, const Domain& dom);

}  // namespace pitik

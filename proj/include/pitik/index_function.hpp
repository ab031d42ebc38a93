#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace pitik {

struct Interval {
    double lo;
    double hi;
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

struct PhiValue {
    double value;
    bool clamped;  // argument beyond the family's domain, value held constant
};

struct ConjugateValue {
    double value;
    double argmax;  // maximiser tau*; +inf if unbounded
};

// phi(tau) = C tau^kappa, C (-ln tau)^(-2p) on (0, tau_max], or a concave
// piecewise-linear interpolant of samples starting at (0, 0).
class IndexFunction {
public:
    enum class Family { Holder, Logarithmic, Tabulated };

    static IndexFunction holder(double C, double kappa);
    static IndexFunction logarithmic(double C, double p, double tau_max = std::exp(-1.0));
    static IndexFunction tabulated(std::vector<double> tau, std::vector<double> phi);

    Family family() const { return family_; }
    double C() const { return C_; }
    double kappa() const { return kappa_; }
    double p() const { return p_; }
    double tau_max() const { return tau_max_; }
    const std::vector<double>& knots() const { return tau_; }
    const std::vector<double>& knot_values() const { return phi_; }
    std::string describe() const;

    PhiValue eval_flagged(double tau) const;
    double operator()(double tau) const { return eval_flagged(tau).value; }
    double derivative(double tau) const;
    IndexFunction scaled(double c) const;

private:
    Family family_ = Family::Holder;
    double C_ = 1.0, kappa_ = 0.5, p_ = 1.0, tau_max_ = 1.0;
    std::vector<double> tau_, phi_;
};

double eval(const IndexFunction& phi, double tau);

// (-phi)^*(s) = sup_{tau >= 0} (s tau + phi(tau)) for s < 0.
ConjugateValue conjugate_neg_full(const IndexFunction& phi, double s);
double conjugate_neg(const IndexFunction& phi, double s);
// Same supremum by bracketed golden-section search, family-agnostic.
ConjugateValue conjugate_neg_numeric(const IndexFunction& phi, double s);

Interval subgradient_neg(const IndexFunction& phi, double tau);

struct ErrorBudget {
    double C_err = 1.0;
    double err = 0.0;
    double beta = 1.0;
};

double apriori_alpha(const IndexFunction& phi, double t, double C_err = 1.0);
// Same rule for a general noise level: 1/(C_err phi'(C_err err)).
double apriori_alpha_for_err(const IndexFunction& phi, double err, double C_err);
double deterministic_bound(const IndexFunction& phi, const ErrorBudget& budget, double alpha);

// Index function attached to a spectral source condition psi(tau) = tau^nu
// or psi(tau) = (-ln tau)^(-p).
IndexFunction phi_from_holder_source(double nu, double beta_tilde = 1.0);
IndexFunction phi_from_log_source(double p, double beta_bar = 1.0);

}  // namespace pitik

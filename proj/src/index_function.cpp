#include "pitik/index_function.hpp"

#include "pitik/grid.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace pitik {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

// Maximise f on [a, b] assuming unimodality there.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b) {
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

IndexFunction IndexFunction::holder(double C, double kappa) {
    if (!(C > 0.0) || !std::isfinite(C)) throw Error("holder index function needs C > 0");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw Error("holder exponent must lie in (0, 1]");
    IndexFunction f;
    f.family_ = Family::Holder;
    f.C_ = C;
    f.kappa_ = kappa;
    f.tau_max_ = kInfinity;
    return f;
}

IndexFunction IndexFunction::logarithmic(double C, double p, double tau_max) {
    if (!(C > 0.0) || !std::isfinite(C)) throw Error("logarithmic index function needs C > 0");
    if (!(p > 0.0) || !std::isfinite(p)) throw Error("logarithmic index function needs p > 0");
    if (!(tau_max > 0.0 && tau_max < 1.0)) throw Error("logarithmic tau_max must lie in (0, 1)");
    IndexFunction f;
    f.family_ = Family::Logarithmic;
    f.C_ = C;
    f.p_ = p;
    f.tau_max_ = tau_max;
    return f;
}

IndexFunction IndexFunction::tabulated(std::vector<double> tau, std::vector<double> phi) {
    if (tau.size() != phi.size() || tau.size() < 2) throw Error("tabulated index function needs >= 2 samples");
    if (tau[0] != 0.0 || phi[0] != 0.0) throw Error("tabulated index function must start at (0, 0)");
    double prev_slope = kInfinity;
    for (std::size_t k = 1; k < tau.size(); ++k) {
        if (!(tau[k] > tau[k - 1])) throw Error("tabulated knots must be strictly increasing");
        if (!(phi[k] >= phi[k - 1])) throw Error("tabulated values must be non-decreasing");
        const double slope = (phi[k] - phi[k - 1]) / (tau[k] - tau[k - 1]);
        if (slope > prev_slope * (1.0 + 1e-12) + 1e-300) throw Error("tabulated index function must be concave");
        prev_slope = slope;
    }
    // Discrete concavity of phi^2 at the knots.
    for (std::size_t k = 1; k + 1 < tau.size(); ++k) {
        const double w = (tau[k] - tau[k - 1]) / (tau[k + 1] - tau[k - 1]);
        const double chord = (1.0 - w) * phi[k - 1] * phi[k - 1] + w * phi[k + 1] * phi[k + 1];
        if (phi[k] * phi[k] < chord * (1.0 - 1e-9)) throw Error("tabulated index function: phi^2 is not concave");
    }
    IndexFunction f;
    f.family_ = Family::Tabulated;
    f.tau_max_ = tau.back();
    f.tau_ = std::move(tau);
    f.phi_ = std::move(phi);
    return f;
}

std::string IndexFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
        case Family::Holder: os << "holder(C=" << C_ << ", kappa=" << kappa_ << ")"; break;
        case Family::Logarithmic: os << "logarithmic(C=" << C_ << ", p=" << p_ << ", tau_max=" << tau_max_ << ")"; break;
        case Family::Tabulated: os << "tabulated(" << tau_.size() << " knots)"; break;
    }
    return os.str();
}

PhiValue IndexFunction::eval_flagged(double tau) const {
    if (!(tau >= 0.0) || std::isnan(tau)) throw Error("index function argument must be >= 0");
    switch (family_) {
        case Family::Holder:
            return {C_ * std::pow(tau, kappa_), false};
        case Family::Logarithmic: {
            if (tau == 0.0) return {0.0, false};
            const bool clamp = tau > tau_max_;
            const double x = clamp ? tau_max_ : tau;
            return {C_ * std::pow(-std::log(x), -2.0 * p_), clamp};
        }
        case Family::Tabulated: {
            if (tau >= tau_.back()) return {phi_.back(), tau > tau_.back()};
            auto it = std::upper_bound(tau_.begin(), tau_.end(), tau);
            const std::size_t k = static_cast<std::size_t>(it - tau_.begin());
            const double w = (tau - tau_[k - 1]) / (tau_[k] - tau_[k - 1]);
            return {(1.0 - w) * phi_[k - 1] + w * phi_[k], false};
        }
    }
    return {0.0, false};
}

double IndexFunction::derivative(double tau) const {
    const Interval g = subgradient_neg(*this, tau);
    return -0.5 * (g.lo + g.hi);
}

IndexFunction IndexFunction::scaled(double c) const {
    if (!(c > 0.0)) throw Error("index function scale must be positive");
    IndexFunction f = *this;
    f.C_ *= c;
    for (auto& v : f.phi_) v *= c;
    return f;
}

double eval(const IndexFunction& phi, double tau) { return phi(tau); }

ConjugateValue conjugate_neg_numeric(const IndexFunction& phi, double s) {
    if (!(s < 0.0)) throw Error("conjugate of -phi is only finite for s < 0");
    auto f = [&](double x) { return s * std::exp(x) + phi(std::exp(x)); };
    ConjugateValue best{0.0, 0.0};  // tau = 0 gives 0
    if (phi.family() == IndexFunction::Family::Holder) {
        if (phi.kappa() == 1.0 && s > -phi.C()) return {kInfinity, kInfinity};
        // Unimodal in x = ln tau: walk to a bracket, then refine.
        double x = 0.0, fx = f(x);
        const double step = 2.0;
        if (f(x + step) > fx) {
            while (f(x + step) > fx && x < 700.0) {
                x += step;
                fx = f(x);
            }
        } else {
            while (f(x - step) >= fx && x > -700.0) {
                x -= step;
                fx = f(x);
            }
        }
        auto [xm, fm] = golden_max(f, x - step, x + step);
        if (fm > best.value) best = {fm, std::exp(xm)};
        return best;
    }
    // Bounded domain: coarse scan in ln tau (phi need not be concave near
    // tau_max for the logarithmic family), then refine around the best cell.
    const double x_hi = std::log(phi.tau_max());
    const double h = 0.05;
    const int cells = 8000;
    int arg = -1;
    double fbest = 0.0;
    for (int i = 0; i <= cells; ++i) {
        const double v = f(x_hi - i * h);
        if (v > fbest) {
            fbest = v;
            arg = i;
        }
    }
    if (arg < 0) return best;
    const double lo = x_hi - (arg + 1) * h;
    const double hi = std::min(x_hi, x_hi - (arg - 1) * h);
    auto [xm, fm] = golden_max(f, lo, hi);
    if (fm >= fbest)
        best = {fm, std::exp(xm)};
    else
        best = {fbest, std::exp(x_hi - arg * h)};
    return best;
}

ConjugateValue conjugate_neg_full(const IndexFunction& phi, double s) {
    if (!(s < 0.0)) throw Error("conjugate of -phi is only finite for s < 0");
    switch (phi.family()) {
        case IndexFunction::Family::Holder: {
            const double C = phi.C(), k = phi.kappa();
            if (k == 1.0) {
                if (s <= -C) return {0.0, 0.0};
                return {kInfinity, kInfinity};
            }
            const double tau = std::pow(C * k / -s, 1.0 / (1.0 - k));
            return {C * (1.0 - k) * std::pow(tau, k), tau};
        }
        case IndexFunction::Family::Tabulated: {
            ConjugateValue best{0.0, 0.0};
            const auto& tk = phi.knots();
            const auto& pk = phi.knot_values();
            for (std::size_t i = 1; i < tk.size(); ++i) {
                const double v = s * tk[i] + pk[i];
                if (v > best.value) best = {v, tk[i]};
            }
            return best;
        }
        case IndexFunction::Family::Logarithmic:
            return conjugate_neg_numeric(phi, s);
    }
    return {0.0, 0.0};
}

double conjugate_neg(const IndexFunction& phi, double s) { return conjugate_neg_full(phi, s).value; }

Interval subgradient_neg(const IndexFunction& phi, double tau) {
    if (!(tau > 0.0)) throw Error("subdifferential of -phi is only computed for tau > 0");
    switch (phi.family()) {
        case IndexFunction::Family::Holder: {
            const double d = phi.C() * phi.kappa() * std::pow(tau, phi.kappa() - 1.0);
            return {-d, -d};
        }
        case IndexFunction::Family::Logarithmic: {
            if (tau > phi.tau_max()) return {0.0, 0.0};
            const double L = -std::log(tau);
            const double d = 2.0 * phi.p() * phi.C() * std::pow(L, -2.0 * phi.p() - 1.0) / tau;
            if (tau == phi.tau_max()) return {-d, 0.0};
            return {-d, -d};
        }
        case IndexFunction::Family::Tabulated: {
            const auto& tk = phi.knots();
            const auto& pk = phi.knot_values();
            auto slope = [&](std::size_t k) {  // slope of segment [k-1, k]; 0 past the end
                if (k >= tk.size()) return 0.0;
                return (pk[k] - pk[k - 1]) / (tk[k] - tk[k - 1]);
            };
            auto it = std::lower_bound(tk.begin(), tk.end(), tau);
            const std::size_t k = static_cast<std::size_t>(it - tk.begin());
            if (it != tk.end() && *it == tau) return {-slope(k), -slope(k + 1)};
            return {-slope(k), -slope(k)};
        }
    }
    return {0.0, 0.0};
}

double apriori_alpha_for_err(const IndexFunction& phi, double err, double C_err) {
    if (!(C_err >= 1.0)) throw Error("C_err must be >= 1");
    if (!(err > 0.0)) throw Error("a-priori rule needs err > 0");
    const double d = phi.derivative(C_err * err);
    if (!(d > 0.0)) throw Error("a-priori rule undefined: phi has zero slope at C_err*err");
    return 1.0 / (C_err * d);
}

double apriori_alpha(const IndexFunction& phi, double t, double C_err) {
    if (!(t >= 1.0)) throw Error("a-priori rule needs t >= 1");
    return apriori_alpha_for_err(phi, 1.0 / std::sqrt(t), C_err);
}

double deterministic_bound(const IndexFunction& phi, const ErrorBudget& budget, double alpha) {
    if (!(alpha > 0.0)) throw Error("alpha must be positive");
    if (!(budget.beta > 0.0) || !(budget.C_err >= 1.0) || !(budget.err >= 0.0)) throw Error("invalid error budget");
    return (budget.err / alpha + conjugate_neg(phi, -1.0 / (budget.C_err * alpha))) / budget.beta;
}

IndexFunction phi_from_holder_source(double nu, double beta_tilde) {
    if (!(nu > 0.0 && nu <= 0.5)) throw Error("Holder source index nu must lie in (0, 1/2]");
    return IndexFunction::holder(beta_tilde, 2.0 * nu / (2.0 * nu + 1.0));
}

IndexFunction phi_from_log_source(double p, double beta_bar) { return IndexFunction::logarithmic(beta_bar, p); }

}  // namespace pitik

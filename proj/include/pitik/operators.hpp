#pragma once

#include "pitik/grid.hpp"
#include "pitik/index_function.hpp"

#include <cstdint>

namespace pitik {

struct Box {
    double lo = 0.0;
    double hi = 1.0;
};

// Linear smoothing map u -> K u + b, K acting diagonally in the Fourier basis.
class ForwardOperator {
public:
    enum class Kind { SpectralDiagonal, PeriodicConvolution };

    // Singular values (1+|j|^2)^(-a/2), a > d/2.
    static ForwardOperator spectral_diagonal(const Domain& dom, double decay_a, double background = 0.0);
    // (K u)(x_k) = h^d sum_m kernel[m] u[k-m]; kernel[m] is the kernel at
    // lattice offset m*h. Unit mass means integrate(kernel) = 1.
    static ForwardOperator periodic_convolution(const GridFunction& kernel, double background = 0.0);

    Kind kind() const { return kind_; }
    const Domain& domain() const { return dom_; }
    double decay_a() const { return a_; }
    double background() const { return b_; }
    const GridFunction& kernel() const { return kernel_; }
    // Multiplier per DFT bin.
    const Eigen::VectorXcd& multiplier() const { return mult_; }
    double norm() const { return mult_.cwiseAbs().maxCoeff(); }

private:
    Kind kind_ = Kind::SpectralDiagonal;
    Domain dom_;
    double a_ = 0.0;
    double b_ = 0.0;
    GridFunction kernel_;
    Eigen::VectorXcd mult_;
};

GridFunction apply(const ForwardOperator& op, const GridFunction& u);
// Adjoint of the linear part; the background does not enter.
GridFunction apply_adjoint(const ForwardOperator& op, const GridFunction& g);
// Applies an arbitrary bin multiplier (used for functional calculus of K*K).
GridFunction apply_multiplier(const Eigen::VectorXcd& mult, const GridFunction& u);

// Certified bound on the H^s norm of apply(op, u) over u in the box.
double hs_image_radius(const ForwardOperator& op, const Box& box, double s);

struct SourceOptions {
    double omega_decay = 0.25;  // |omega_j| proportional to (1+|j|^2)^(-omega_decay)
    double margin = 0.5;        // min of udag after the shift
    double phi_constant = 1.0;  // beta-tilde (Holder) or beta-bar (logarithmic)
};

struct SourceFamily {
    enum class Kind { Holder, Logarithmic };
    Kind kind = Kind::Holder;
    double index = 0.5;  // nu or p

    static SourceFamily holder(double nu) { return {Kind::Holder, nu}; }
    static SourceFamily logarithmic(double p) { return {Kind::Logarithmic, p}; }
    double psi(double tau) const;
};

struct SourceInstance {
    ForwardOperator op;
    SourceFamily family;
    GridFunction udag;
    GridFunction u0;
    GridFunction gdag;
    GridFunction omega;
    IndexFunction predicted_phi = IndexFunction::holder(1.0, 0.5);
};

SourceInstance make_source_instance(const ForwardOperator& op, const SourceFamily& family, std::uint64_t omega_seed,
                                    double scale, const SourceOptions& opts = {});

// Exact variational source condition for nu = 1/2 with the quadratic penalty
// centred at u0: beta = 1 and phi(tau) = 2 ||omega|| sqrt(c tau) with c the
// KL lower-bound coefficient over images of the box.
IndexFunction certified_vsc_phi(const SourceInstance& inst, const Box& box, double sigma);

}  // namespace pitik

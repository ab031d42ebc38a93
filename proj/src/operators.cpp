#include "pitik/operators.hpp"

#include "pitik/fidelity.hpp"
#include "pitik/poisson.hpp"

#include <cmath>

namespace pitik {

namespace {

double freq_sq(const Domain& dom, Eigen::Index bin) {
    const Freq j = dom.freq(bin);
    return double(j[0]) * j[0] + double(j[1]) * j[1];
}

// Partner bin of k under j -> -j.
Eigen::Index mirror_bin(const Domain& dom, Eigen::Index k) {
    const int n = dom.n();
    auto neg = [n](int b) { return (n - b) % n; };
    if (dom.dim() == 1) return neg(static_cast<int>(k));
    return Eigen::Index(neg(static_cast<int>(k / n))) * n + neg(static_cast<int>(k % n));
}

}  // namespace

ForwardOperator ForwardOperator::spectral_diagonal(const Domain& dom, double decay_a, double background) {
    if (!(decay_a > 0.5 * dom.dim())) throw Error("spectral decay a must exceed d/2");
    if (!(background >= 0.0)) throw Error("background must be >= 0");
    ForwardOperator op;
    op.kind_ = Kind::SpectralDiagonal;
    op.dom_ = dom;
    op.a_ = decay_a;
    op.b_ = background;
    op.mult_.resize(dom.size());
    for (Eigen::Index k = 0; k < dom.size(); ++k) op.mult_[k] = std::pow(1.0 + freq_sq(dom, k), -0.5 * decay_a);
    return op;
}

ForwardOperator ForwardOperator::periodic_convolution(const GridFunction& kernel, double background) {
    if (!(background >= 0.0)) throw Error("background must be >= 0");
    ForwardOperator op;
    op.kind_ = Kind::PeriodicConvolution;
    op.dom_ = kernel.domain();
    op.b_ = background;
    op.kernel_ = kernel;
    op.mult_ = kernel.domain().cell_volume() * dft(op.dom_, kernel.values().cast<cplx>());
    return op;
}

GridFunction apply_multiplier(const Eigen::VectorXcd& mult, const GridFunction& u) {
    const Domain& dom = u.domain();
    Eigen::VectorXcd spec = dft(dom, u.values().cast<cplx>());
    spec.array() *= mult.array();
    return GridFunction(dom, idft(dom, spec).real());
}

GridFunction apply(const ForwardOperator& op, const GridFunction& u) {
    if (u.domain() != op.domain()) throw Error("operator and argument live on different domains");
    GridFunction g = apply_multiplier(op.multiplier(), u);
    if (op.background() != 0.0) g.values().array() += op.background();
    return g;
}

GridFunction apply_adjoint(const ForwardOperator& op, const GridFunction& g) {
    if (g.domain() != op.domain()) throw Error("operator and argument live on different domains");
    return apply_multiplier(op.multiplier().conjugate(), g);
}

double hs_image_radius(const ForwardOperator& op, const Box& box, double s) {
    const Domain& dom = op.domain();
    if (op.kind() == ForwardOperator::Kind::SpectralDiagonal && !(s < op.decay_a() - 0.5 * dom.dim()))
        throw Error("image of the operator is only bounded in H^s for s < a - d/2");
    if (box.lo > box.hi) throw Error("empty box");
    double gain = 0.0;
    for (Eigen::Index k = 0; k < dom.size(); ++k)
        gain = std::max(gain, std::pow(1.0 + freq_sq(dom, k), 0.5 * s) * std::abs(op.multiplier()[k]));
    const double umax = std::max(std::abs(box.lo), std::abs(box.hi));
    return gain * umax + std::abs(op.background());
}

double SourceFamily::psi(double tau) const {
    if (!(tau > 0.0 && tau <= 1.0 + 1e-12)) throw Error("source function argument must lie in (0, 1]");
    if (kind == Kind::Holder) return std::pow(tau, index);
    // (-ln(tau/e))^(-p): the shift by e keeps the j = 0 mode finite.
    return std::pow(1.0 - std::log(std::min(tau, 1.0)), -index);
}

SourceInstance make_source_instance(const ForwardOperator& op, const SourceFamily& family, std::uint64_t omega_seed,
                                    double scale, const SourceOptions& opts) {
    if (family.kind == SourceFamily::Kind::Holder && !(family.index > 0.0 && family.index <= 0.5))
        throw Error("Holder source index nu must lie in (0, 1/2]");
    if (family.kind == SourceFamily::Kind::Logarithmic && !(family.index > 0.0))
        throw Error("logarithmic source index p must be positive");
    if (!(scale >= 0.0)) throw Error("source scale must be >= 0");
    if (!(opts.margin >= 0.0)) throw Error("source margin must be >= 0");
    const Domain& dom = op.domain();

    // Hermitian spectrum with deterministic amplitudes and random phases.
    Rng rng(omega_seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    Eigen::VectorXcd W = Eigen::VectorXcd::Zero(dom.size());
    for (Eigen::Index k = 0; k < dom.size(); ++k) {
        const Eigen::Index m = mirror_bin(dom, k);
        if (m < k) continue;
        const double amp = std::pow(1.0 + freq_sq(dom, k), -opts.omega_decay);
        if (m == k) {
            W[k] = phase(rng) < M_PI ? amp : -amp;
        } else {
            W[k] = std::polar(amp, phase(rng));
            W[m] = std::conj(W[k]);
        }
    }
    GridFunction omega(dom, idft(dom, W).real());
    const double nrm = l2_norm(omega);
    omega *= (nrm > 0.0 ? scale / nrm : 0.0);

    Eigen::VectorXcd psi_mult(dom.size());
    for (Eigen::Index k = 0; k < dom.size(); ++k) psi_mult[k] = family.psi(std::norm(op.multiplier()[k]));
    const GridFunction du = apply_multiplier(psi_mult, omega);

    const double shift = opts.margin + std::max(0.0, -du.min());
    SourceInstance inst{op, family, du + shift, GridFunction::constant(dom, shift), {}, omega,
                        family.kind == SourceFamily::Kind::Holder ? phi_from_holder_source(family.index, opts.phi_constant)
                                                                  : phi_from_log_source(family.index, opts.phi_constant)};
    inst.gdag = apply(op, inst.udag);
    return inst;
}

IndexFunction certified_vsc_phi(const SourceInstance& inst, const Box& box, double sigma) {
    if (inst.family.kind != SourceFamily::Kind::Holder || inst.family.index != 0.5)
        throw Error("certified source condition is only available for nu = 1/2");
    const Domain& dom = inst.op.domain();
    // Sup norm of K u over the box via the l1 norm of the lattice kernel.
    const Eigen::VectorXd kern = idft(dom, inst.op.multiplier()).real();
    const double gmax = kern.cwiseAbs().sum() * std::max(std::abs(box.lo), std::abs(box.hi)) + inst.op.background();
    const double c = 4.0 / 3.0 * (gmax + sigma) + 2.0 / 3.0 * (inst.gdag.max() + sigma);
    const double w = l2_norm(inst.omega);
    if (w == 0.0) throw Error("certified source condition needs omega != 0");
    return IndexFunction::holder(2.0 * w * std::sqrt(c), 0.5);
}

}  // namespace pitik

#include "optomech/model.hpp"

#include <limits>
#include <sstream>

namespace optomech {

void SystemParams::validate() const {
    std::ostringstream bad;
    if (kappa <= 0.0) bad << "kappa must be > 0; ";
    if (gamma < 0.0) bad << "gamma must be >= 0; ";
    if (eps_p < 0.0) bad << "eps_p must be >= 0; ";
    if (lambda < 0.0) bad << "lambda must be >= 0; ";
    if (g0 < 0.0) bad << "g0 must be >= 0; ";
    if (r_e < 0.0) bad << "r_e must be >= 0; ";
    if (!bad.str().empty()) throw UnstableRegime("SystemParams: " + bad.str());
    if (delta_m <= lambda) {
        std::ostringstream ss;
        ss << "delta_m = " << delta_m << " <= lambda = " << lambda
           << " (hyperbolic amplification, no stable squeezed frame)";
        throw UnstableRegime(ss.str());
    }
}

double squeeze_param(double delta_m, double lambda) {
    if (lambda < 0.0) throw UnstableRegime("squeeze_param: lambda < 0");
    if (delta_m <= lambda) {
        std::ostringstream ss;
        ss << "squeeze_param: delta_m = " << delta_m << " <= lambda = " << lambda;
        throw UnstableRegime(ss.str());
    }
    return 0.25 * std::log((delta_m + lambda) / (delta_m - lambda));
}

double effective_coupling(double g0, double r_d) { return 0.5 * g0 * std::exp(r_d); }

double transformed_frequency(double delta_m, double r_d) {
    return delta_m / std::cosh(2.0 * r_d);
}

std::pair<double, Complex> bath_params(double r_e, double phi_e, double r_d, double phi_d) {
    const double phi = phi_e - phi_d;
    const double n_tilde = std::sinh(r_e) * std::sinh(r_e) * std::cosh(r_d) * std::cosh(r_d) +
                           std::sinh(r_d) * std::sinh(r_d) * std::cosh(r_e) * std::cosh(r_e) +
                           0.5 * std::cos(phi) * std::sinh(2.0 * r_e) * std::sinh(2.0 * r_d);
    const Complex m_tilde =
        std::exp(kI * phi_d) *
        (std::cosh(r_e) * std::cosh(r_d) + std::exp(-kI * phi) * std::sinh(r_e) * std::sinh(r_d)) *
        (std::cosh(r_e) * std::sinh(r_d) + std::exp(kI * phi) * std::sinh(r_e) * std::cosh(r_d));
    // The matched case (r_e = r_d, phi = pi) cancels catastrophically; snap
    // residue at the cancellation scale to exact zero so no dissipator ends
    // up with a spuriously negative rate.
    const double scale = std::cosh(r_e) * std::cosh(r_e) * std::cosh(r_d) * std::cosh(r_d);
    const double snap = 1e-12 * scale;
    const double n_out = std::abs(n_tilde) < snap ? 0.0 : n_tilde;
    const Complex m_out = std::abs(m_tilde) < snap ? Complex{0.0, 0.0} : m_tilde;
    return {n_out, m_out};
}

DerivedParams DerivedParams::from(const SystemParams& p) {
    p.validate();
    DerivedParams d;
    d.r_d = squeeze_param(p.delta_m, p.lambda);
    d.g_tilde = effective_coupling(p.g0, d.r_d);
    d.omega_m_tilde = transformed_frequency(p.delta_m, d.r_d);
    auto [n, m] = bath_params(p.r_e, p.phi_e, d.r_d, p.phi_d);
    d.n_tilde = n;
    d.m_tilde = m;
    d.phi = p.phi_e - p.phi_d;
    d.delta_c_resonance = d.g_tilde * d.g_tilde / d.omega_m_tilde;
    return d;
}

Operator build_h_oms(const SystemParams& p, const DerivedParams& d,
                     const SimSpaces& spaces, const HamiltonianOpts& opts) {
    const Operator a = spaces.a();
    const Operator b = spaces.b();
    const Operator n_a = a.adjoint() * a;
    Operator h = d.omega_m_tilde * (b.adjoint() * b) -
                 d.g_tilde * (n_a * (b + b.adjoint()));
    if (opts.include_cavity_free) h = h + p.delta_c * n_a;
    if (p.eps_p != 0.0) h = h + p.eps_p * (a + a.adjoint());
    return h;
}

Operator ModulatedTerm::at(double t) const {
    const Complex ph = std::exp(-kI * freq * t);
    return Operator(envelope.space, ph * envelope.mat + std::conj(ph) * envelope.mat.adjoint());
}

ModulatedTerm build_h_nr(const SystemParams& p, const DerivedParams& d,
                         const SimSpaces& spaces) {
    if (std::abs(p.phi_d - kPi) > 1e-12) {
        std::ostringstream ss;
        ss << "build_h_nr: phi_d = " << p.phi_d << " but only phi_d = pi is supported";
        throw UnsupportedPhase(ss.str());
    }
    const Operator a = spaces.a();
    const Operator b = spaces.b();
    const Operator n_a = a.adjoint() * a;
    Operator env = (-0.5 * p.g0) *
                   (n_a * (std::cosh(d.r_d) * b - std::sinh(d.r_d) * b.adjoint()));
    return ModulatedTerm{std::move(env), 2.0 * p.omega_d};
}

Operator build_h_nr_at(const SystemParams& p, const DerivedParams& d,
                       const SimSpaces& spaces, double t) {
    return build_h_nr(p, d, spaces).at(t);
}

RwaReport rwa_report(const SystemParams& p, const DerivedParams& d, double threshold) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    RwaReport r;
    r.threshold = threshold;
    r.ratio_omega_m = d.omega_m_tilde > 0.0 ? p.omega_d / d.omega_m_tilde : inf;
    const double gc = p.g0 * std::cosh(d.r_d);
    const double gs = p.g0 * std::sinh(d.r_d);
    r.ratio_g_cosh = gc > 0.0 ? p.omega_d / gc : inf;
    r.ratio_g_sinh = gs > 0.0 ? p.omega_d / gs : inf;
    r.satisfied = r.ratio_omega_m > threshold && r.ratio_g_cosh > threshold &&
                  r.ratio_g_sinh > threshold;
    return r;
}

}  // namespace optomech

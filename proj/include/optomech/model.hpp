#pragma once

#include <cmath>
#include <utility>

#include "optomech/fock.hpp"

namespace optomech {

/// Raw system parameters. All rates are in units of the cavity decay kappa
/// (kappa = 1 internally); angles in radians.
struct SystemParams {
    double kappa = 1.0;
    double gamma = 0.01;      // mechanical decay
    double g0 = 0.5;          // bare optomechanical coupling
    double delta_m = 4000.0;  // omega_m - omega_d
    double lambda = 3999.98;  // parametric-amplification amplitude
    double omega_d = 30.0;    // modulation frequency
    double phi_d = kPi;       // amplification phase (fixed to pi)
    double r_e = 0.0;         // bath squeezing parameter
    double phi_e = 0.0;       // bath reference phase
    double eps_p = 0.1;       // probe amplitude
    double delta_c = 0.0;     // omega_c - omega_p

    double delta() const { return delta_m - lambda; }

    /// delta = delta_m - lambda is the configuration-facing alternative input.
    void set_delta(double d) { lambda = delta_m - d; }

    void validate() const;
};

/// Squeezed-frame quantities, computed once per scenario point.
struct DerivedParams {
    double r_d = 0.0;
    double g_tilde = 0.0;
    double omega_m_tilde = 0.0;
    double n_tilde = 0.0;
    Complex m_tilde{0.0, 0.0};
    double phi = 0.0;  // Phi = phi_e - phi_d
    double delta_c_resonance = 0.0;  // g_tilde^2 / omega_m_tilde

    static DerivedParams from(const SystemParams& p);
};

/// r_d = (1/4) ln[(delta_m + lambda)/(delta_m - lambda)].
/// Throws UnstableRegime when delta_m <= lambda.
double squeeze_param(double delta_m, double lambda);

/// g_tilde = (1/2) g0 e^{r_d}.
double effective_coupling(double g0, double r_d);

/// omega_m_tilde = delta_m / cosh(2 r_d).
double transformed_frequency(double delta_m, double r_d);

/// Effective bath occupation N_tilde and two-phonon correlation M_tilde for
/// the squeezed mechanical mode, as functions of (r_e, phi_e, r_d, phi_d).
std::pair<double, Complex> bath_params(double r_e, double phi_e, double r_d, double phi_d);

/// Cavity (first) and mechanical (second) slots plus their composite.
struct SimSpaces {
    TruncatedSpace cavity;
    TruncatedSpace mech;
    CompositeSpace comp;

    SimSpaces(int cavity_dim, int mech_dim)
        : cavity(cavity_dim, "cavity"), mech(mech_dim, "mech"), comp{cavity, mech} {}

    Operator a() const { return embed(destroy(cavity), "cavity", comp); }
    Operator b() const { return embed(destroy(mech), "mech", comp); }
};

struct HamiltonianOpts {
    // Drop the Delta_c a^dag a term for interaction-picture cat runs.
    bool include_cavity_free = true;
};

/// H = Delta_c a^dag a + omega_m_tilde b^dag b - g_tilde a^dag a (b + b^dag)
///     + eps_p (a + a^dag)
Operator build_h_oms(const SystemParams& p, const DerivedParams& d,
                     const SimSpaces& spaces, const HamiltonianOpts& opts = {});

/// The counter-rotating correction H_nr(t) = A e^{-2 i omega_d t} + H.c. with
/// A = -(1/2) g0 a^dag a (b cosh r_d - b^dag sinh r_d). Only the envelope A
/// and the oscillation frequency are stored; evaluation at a fixed t is
/// h_nr_at(). Requires phi_d = pi.
struct ModulatedTerm {
    Operator envelope;  // A
    double freq = 0.0;  // 2 omega_d

    Operator at(double t) const;
};

ModulatedTerm build_h_nr(const SystemParams& p, const DerivedParams& d,
                         const SimSpaces& spaces);

Operator build_h_nr_at(const SystemParams& p, const DerivedParams& d,
                       const SimSpaces& spaces, double t);

/// Advisory check of the RWA conditions omega_d >> omega_m_tilde,
/// g0 cosh(r_d), g0 sinh(r_d). Never blocks a run.
struct RwaReport {
    double ratio_omega_m = 0.0;   // omega_d / omega_m_tilde
    double ratio_g_cosh = 0.0;    // omega_d / (g0 cosh r_d)
    double ratio_g_sinh = 0.0;    // omega_d / (g0 sinh r_d)
    double threshold = 2.0;
    bool satisfied = false;
};

RwaReport rwa_report(const SystemParams& p, const DerivedParams& d, double threshold = 2.0);

}  // namespace optomech

#include <doctest.h>

#include <cmath>

#include "optomech/dynamics.hpp"
#include "optomech/observables.hpp"

using namespace optomech;

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Closed-form Wigner of a coherent state |alpha0> in the x=(a+a^dag)/2
// convention with grid integral 1/2: W = (1/pi) exp(-2|alpha-alpha0|^2) * pi/2
// ... pinned instead directly against the vacuum peak 1/pi and the Gaussian
// falloff exp(-2 r^2).
double coherent_wigner(double x, double y, Complex alpha0) {
    const double dx = x - alpha0.real();
    const double dy = y - alpha0.imag();
    return (2.0 / kPi) * std::exp(-2.0 * (dx * dx + dy * dy)) * 0.5;
}

}  // namespace

TEST_CASE("g2 closed forms") {
    TruncatedSpace c(30, "cavity");

    // coherent light is Poissonian
    DensityMatrix coh = coherent_state(c, Complex(1.3, 0.4)).to_density();
    CHECK(g2_zero(coh) == doctest::Approx(1.0).epsilon(1e-8));

    // single photon: numerator vanishes
    DensityMatrix one = fock_state(c, 1).to_density();
    CHECK(g2_zero(one) == doctest::Approx(0.0));

    // thermal light bunches: g2 = 2 (brute force over Fock populations)
    DensityMatrix th = thermal_state(c, 0.5);
    double n_mean = 0.0, n2_mean = 0.0;
    for (int n = 0; n < 30; ++n) {
        const double pn = th.rho(n, n).real();
        n_mean += pn * n;
        n2_mean += pn * n * (n - 1.0);
    }
    CHECK(g2_zero(th) == doctest::Approx(n2_mean / (n_mean * n_mean)).epsilon(1e-12));
    CHECK(g2_zero(th) == doctest::Approx(2.0).epsilon(1e-6));

    // vacuum has undefined statistics
    CHECK_THROWS_AS(g2_zero(fock_state(c, 0).to_density()), VacuumDivergence);

    // works on a composite space via the cavity slot
    SimSpaces spaces(12, 30);
    DensityMatrix prod = tensor(coherent_state(spaces.cavity, Complex(0.5, 0.0)).to_density(),
                                thermal_state(spaces.mech, 0.7));
    CHECK(g2_zero(prod) == doctest::Approx(1.0).epsilon(1e-7));

    // invariant under symmetrization
    Mat sym = (prod.rho + prod.rho.adjoint()) / 2.0;
    CHECK(g2_zero(DensityMatrix(prod.space, sym)) == doctest::Approx(g2_zero(prod)));
}

TEST_CASE("g2 from moments") {
    CHECK(g2_from_moments(Complex(2.0, 0.0), Complex(4.0, 0.0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(g2_from_moments(Complex(1e-9, 0.0), Complex(0.0, 0.0)),
                    VacuumDivergence);
}

TEST_CASE("wigner: vacuum") {
    TruncatedSpace c(10, "cavity");
    DensityMatrix vac = fock_state(c, 0).to_density();
    WignerGridSpec spec;
    spec.nx = spec.ny = 81;
    spec.threads = 1;
    WignerGrid w = wigner(vac, spec);

    // peak at the origin with the pinned value 1/pi
    int ix0 = 40, iy0 = 40;  // center of a symmetric 81-point axis over [-4,4]
    CHECK(w.x_axis(ix0) == doctest::Approx(0.0));
    CHECK(w.values(iy0, ix0) == doctest::Approx(1.0 / kPi).epsilon(1e-6));
    CHECK(w.max_value() == doctest::Approx(1.0 / kPi).epsilon(1e-6));

    // grid integral = 1/2 in this quadrature convention
    CHECK(w.integral() == doctest::Approx(0.5).epsilon(0.02));
    // vacuum is nonnegative
    CHECK(w.min_value() > -1e-10);

    // full Gaussian profile
    double max_err = 0.0;
    for (int iy = 0; iy < spec.ny; iy += 8) {
        for (int ix = 0; ix < spec.nx; ix += 8) {
            max_err = std::max(max_err, std::abs(w.values(iy, ix) -
                               coherent_wigner(w.x_axis(ix), w.y_axis(iy), {0.0, 0.0})));
        }
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("wigner: coherent state peak and thermal integral") {
    TruncatedSpace c(16, "cavity");
    DensityMatrix coh = coherent_state(c, Complex(1.0, 0.0)).to_density();
    WignerGridSpec spec;
    spec.nx = spec.ny = 81;
    spec.threads = 1;
    WignerGrid w = wigner(coh, spec);

    // peak at (1, 0) within one grid cell
    int best_ix = 0, best_iy = 0;
    double best = -1e300;
    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            if (w.values(iy, ix) > best) {
                best = w.values(iy, ix);
                best_ix = ix;
                best_iy = iy;
            }
        }
    }
    const double cell = w.x_axis(1) - w.x_axis(0);
    CHECK(std::abs(w.x_axis(best_ix) - 1.0) <= cell + 1e-12);
    CHECK(std::abs(w.y_axis(best_iy) - 0.0) <= cell + 1e-12);
    CHECK(w.integral() == doctest::Approx(0.5).epsilon(0.02));

    DensityMatrix th = thermal_state(TruncatedSpace(40, "cavity"), 0.8);
    WignerGrid wt = wigner(th, spec);
    CHECK(wt.integral() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(wt.min_value() > -1e-9);
}

TEST_CASE("wigner: even cat has interference negativity") {
    TruncatedSpace c(30, "cavity");
    const Complex a0(2.0, 0.0);
    PureState p1 = coherent_state(c, a0);
    PureState p2 = coherent_state(c, -a0);
    CVec amps = p1.amps + p2.amps;
    amps /= amps.norm();
    DensityMatrix cat = PureState(CompositeSpace(c), amps).to_density();

    WignerGridSpec spec;
    spec.nx = spec.ny = 81;
    spec.threads = 2;
    WignerGrid w = wigner(cat, spec);

    CHECK(w.min_value() < -0.05);  // fringes between the lobes
    CHECK(w.integral() == doctest::Approx(0.5).epsilon(0.02));

    // closed-form even-cat Wigner at the origin: fringe maximum ~ 1/pi
    int ix0 = 40, iy0 = 40;
    CHECK(w.values(iy0, ix0) == doctest::Approx(1.0 / kPi).epsilon(1e-3));

    // deterministic across thread counts
    WignerGridSpec spec1 = spec;
    spec1.threads = 1;
    WignerGrid w1 = wigner(cat, spec1);
    CHECK((w.values - w1.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state fidelity") {
    TruncatedSpace c(12, "cavity");
    PureState psi = coherent_state(c, Complex(0.9, 0.1));
    CHECK(state_fidelity(psi.to_density(), psi) == doctest::Approx(1.0).epsilon(1e-10));

    PureState f0 = fock_state(c, 0);
    PureState f1 = fock_state(c, 1);
    CHECK(state_fidelity(f0.to_density(), f1) == doctest::Approx(0.0));

    Mat mix = 0.5 * f0.to_density().rho + 0.5 * f1.to_density().rho;
    CHECK(state_fidelity(DensityMatrix(CompositeSpace(c), mix), f0) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kerr cat reference") {
    TruncatedSpace c(30, "cavity");
    const Complex alpha(2.0, 0.0);

    // integer k: phase e^{i 2 pi n^2} = 1 -> plain coherent state
    PureState k1 = kerr_cat_reference(alpha, 1.0, c);
    PureState coh = coherent_state(c, alpha);
    CHECK((k1.amps - coh.amps).norm() < 1e-12);

    // k^2 = 1/2: phases alternate e^{i pi n^2} = (-1)^n, i.e. the enumerated
    // pattern +1, -1, +1, ... over n (equivalently the state |-alpha>)
    PureState k2 = kerr_cat_reference(alpha, std::sqrt(0.5), c);
    for (int n = 0; n < 9; ++n) {
        const Complex expect_phase = (n % 2 == 0) ? Complex(1.0, 0.0) : Complex(-1.0, 0.0);
        const Complex base = std::exp(-2.0) * std::pow(alpha, n) / std::sqrt(factorial(n));
        CHECK(std::abs(k2.amps(n) - expect_phase * base) < 1e-10);
    }

    // k = 1/2 (phase e^{i pi n^2 / 2}): the two-component cat
    // ((1+i)|alpha> + (1-i)|-alpha>)/2; fidelity ~ 1/2 against each lobe
    PureState kc = kerr_cat_reference(alpha, 0.5, c);
    DensityMatrix rhoc = kc.to_density();
    const double f_plus = state_fidelity(rhoc, coherent_state(c, alpha));
    const double f_minus = state_fidelity(rhoc, coherent_state(c, -alpha));
    CHECK(f_plus == doctest::Approx(0.5).epsilon(0.01));
    CHECK(f_minus == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("lossless Kerr-cat evolution oracle (end-to-end)") {
    // Full-module property: evolving the undriven interaction-picture
    // Hamiltonian for one mechanical period imprints the Kerr phase on the
    // cavity and disentangles the mirror.
    SystemParams p;
    p.gamma = 0.0;
    p.eps_p = 0.0;
    p.delta_c = 0.0;
    p.omega_d = 30.0;
    p.delta_m = 100.0;
    p.lambda = 60.0;
    DerivedParams d0 = DerivedParams::from(p);
    // choose g0 so k = g_tilde / omega_m_tilde = 1/2 (four-component cat)
    p.g0 = 2.0 * 0.5 * d0.omega_m_tilde * std::exp(-d0.r_d);
    DerivedParams d = DerivedParams::from(p);
    const double k = d.g_tilde / d.omega_m_tilde;
    REQUIRE(k == doctest::Approx(0.5).epsilon(1e-12));

    // The mechanical loop for cavity occupation n reaches |beta| = 2 k n, so
    // phonon occupations up to ~n^2 appear transiently; size the mode for the
    // largest n with non-negligible Poisson weight.
    const int cav_dim = 16, mech_dim = 80;
    TruncatedSpace cav(cav_dim, "cavity");
    TruncatedSpace mech(mech_dim, "mech");
    const Complex alpha(1.3, 0.0);
    PureState psi0 = tensor(coherent_state(cav, alpha), fock_state(mech, 0));

    HamiltonianOpts opts;
    opts.include_cavity_free = false;
    SpMat h = sparse_h_oms(p, d, cav_dim, mech_dim, opts);
    const double t_final = 2.0 * kPi / d.omega_m_tilde;
    PureTrajectory traj = evolve_pure_sparse(psi0, h, {t_final});

    DensityMatrix rho_cav = partial_trace(traj.states.back(), "cavity");
    PureState ref = kerr_cat_reference(alpha, k, cav);
    CHECK(state_fidelity(rho_cav, ref) > 0.999);
}

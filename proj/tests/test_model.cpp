#include <doctest.h>

#include <cmath>

#include "optomech/model.hpp"

using namespace optomech;

TEST_CASE("squeeze_param") {
    // headline value from the strong-squeezing operating point
    CHECK(squeeze_param(4000.0, 3999.98) == doctest::Approx(3.2248).epsilon(0.005 / 3.2248));
    CHECK(squeeze_param(4000.0, 0.0) == 0.0);
    CHECK(squeeze_param(4000.0, 2000.0) == doctest::Approx(0.25 * std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(squeeze_param(4000.0, 4000.0), UnstableRegime);
    CHECK_THROWS_AS(squeeze_param(4000.0, 5000.0), UnstableRegime);
    CHECK_THROWS_AS(squeeze_param(4000.0, -1.0), UnstableRegime);

    // inverse relation: delta_m tanh(2 r_d) = lambda
    for (double lam : {10.0, 1000.0, 3999.0, 3999.98}) {
        const double rd = squeeze_param(4000.0, lam);
        CHECK(4000.0 * std::tanh(2.0 * rd) == doctest::Approx(lam).epsilon(1e-9));
    }
}

TEST_CASE("effective_coupling and transformed_frequency") {
    CHECK(effective_coupling(0.5, 0.0) == doctest::Approx(0.25));
    const double rd = squeeze_param(4000.0, 3999.98);
    // independent high-precision evaluation of the same closed forms
    const double g_tilde_ref = 0.5 * 0.5 * std::exp(0.25 * std::log(7999.98 / 0.02));
    CHECK(effective_coupling(0.5, rd) == doctest::Approx(g_tilde_ref).epsilon(1e-12));
    CHECK(effective_coupling(0.5, rd) == doctest::Approx(6.29).epsilon(0.001));

    CHECK(transformed_frequency(4000.0, 0.0) == doctest::Approx(4000.0));
    CHECK(transformed_frequency(4000.0, rd) == doctest::Approx(12.65).epsilon(0.001));
    // monotonic decrease with r_d, bounded by delta_m
    double prev = 1e300;
    for (double r = 0.0; r < 4.0; r += 0.37) {
        const double w = transformed_frequency(4000.0, r);
        CHECK(w <= 4000.0);
        CHECK(w < prev + 1e-12);
        prev = w;
    }
}

TEST_CASE("bath_params cancellation and vacuum limits") {
    for (double r : {0.5, 1.0, 2.0, 3.22}) {
        for (double phi : {kPi, 3.0 * kPi}) {
            auto [n, m] = bath_params(r, kPi + phi, r, kPi);
            CHECK(std::abs(n) < 1e-12);
            CHECK(std::abs(m) < 1e-12);
        }
    }
    // r_e = 0 vacuum bath: N = sinh^2 r_d, |M| = sinh(2 r_d)/2
    for (double rd : {0.3, 1.0, 3.2248}) {
        auto [n, m] = bath_params(0.0, 0.0, rd, kPi);
        CHECK(n == doctest::Approx(std::sinh(rd) * std::sinh(rd)).epsilon(1e-10));
        CHECK(std::abs(m) == doctest::Approx(0.5 * std::sinh(2.0 * rd)).epsilon(1e-10));
    }
    auto [n0, m0] = bath_params(0.0, 0.0, 0.0, kPi);
    CHECK(n0 == 0.0);
    CHECK(std::abs(m0) == 0.0);
}

TEST_CASE("bath physicality |M|^2 <= N(N+1)") {
    for (double re = 0.0; re <= 3.0; re += 0.5) {
        for (double rd = 0.0; rd <= 3.0; rd += 0.5) {
            for (double phi = 0.0; phi < 2.0 * kPi; phi += kPi / 6.0) {
                auto [n, m] = bath_params(re, phi + kPi, rd, kPi);
                CHECK(n >= -1e-12);
                CHECK(std::norm(m) <= n * (n + 1.0) + 1e-9 * (1.0 + n * n));
            }
        }
    }
}

TEST_CASE("derived params bundle") {
    SystemParams p;  // defaults are the headline operating point
    const DerivedParams d = DerivedParams::from(p);
    CHECK(d.r_d == doctest::Approx(3.2248).epsilon(0.002));
    CHECK(d.g_tilde == doctest::Approx(6.29).epsilon(0.001));
    CHECK(d.omega_m_tilde == doctest::Approx(12.65).epsilon(0.001));
    CHECK(d.delta_c_resonance == doctest::Approx(3.13).epsilon(0.002));
    CHECK(d.delta_c_resonance ==
          doctest::Approx(d.g_tilde * d.g_tilde / d.omega_m_tilde).epsilon(1e-12));

    SystemParams bad = p;
    bad.lambda = 4001.0;
    CHECK_THROWS_AS(DerivedParams::from(bad), UnstableRegime);

    // delta accessor round-trip
    SystemParams q;
    q.set_delta(0.02);
    CHECK(q.delta() == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(q.lambda == doctest::Approx(3999.98).epsilon(1e-15));
}

TEST_CASE("h_oms structure") {
    SystemParams p;
    DerivedParams d = DerivedParams::from(p);
    SimSpaces spaces(4, 4);

    // g=0, eps=0 -> diagonal
    SystemParams p0 = p;
    p0.g0 = 0.0;
    p0.eps_p = 0.0;
    DerivedParams d0 = DerivedParams::from(p0);
    Operator hdiag = build_h_oms(p0, d0, spaces);
    Mat offdiag = hdiag.mat;
    offdiag.diagonal().setZero();
    CHECK(offdiag.norm() < 1e-14);

    p.delta_c = d.delta_c_resonance;
    Operator h = build_h_oms(p, d, spaces);
    CHECK(h.is_hermitian());

    // index (i_cav, i_mech) -> i_cav * mech_dim + i_mech
    auto idx = [](int ic, int im) { return ic * 4 + im; };
    CHECK(h.mat(idx(1, 0), idx(1, 0)).real() == doctest::Approx(p.delta_c).epsilon(1e-12));
    CHECK(h.mat(idx(1, 1), idx(1, 0)).real() == doctest::Approx(-d.g_tilde).epsilon(1e-12));
    // probe element <1,0|H|0,0> = eps_p
    CHECK(h.mat(idx(1, 0), idx(0, 0)).real() == doctest::Approx(p.eps_p).epsilon(1e-12));

    // cavity-free flag removes the Delta_c term
    HamiltonianOpts no_free;
    no_free.include_cavity_free = false;
    Operator h2 = build_h_oms(p, d, spaces, no_free);
    CHECK(h2.mat(idx(1, 0), idx(1, 0)).real() == doctest::Approx(0.0));
}

TEST_CASE("h_nr construction") {
    SystemParams p;
    DerivedParams d = DerivedParams::from(p);
    SimSpaces spaces(10, 10);

    ModulatedTerm hnr = build_h_nr(p, d, spaces);
    CHECK(hnr.freq == doctest::Approx(2.0 * p.omega_d));
    for (double t : {0.0, 0.013, 0.4}) {
        CHECK(hnr.at(t).is_hermitian(1e-12));
    }

    SystemParams pz = p;
    pz.g0 = 0.0;
    CHECK(build_h_nr(pz, DerivedParams::from(pz), spaces).envelope.mat.norm() < 1e-15);

    SystemParams pbad = p;
    pbad.phi_d = 0.5;
    CHECK_THROWS_AS(build_h_nr(pbad, d, spaces), UnsupportedPhase);

    // time average over one full period vanishes for any fixed state
    PureState psi = tensor(coherent_state(spaces.cavity, Complex(0.7, 0.2)),
                           coherent_state(spaces.mech, Complex(0.3, -0.4)));
    const double period = 2.0 * kPi / hnr.freq;
    const int nq = 400;
    Complex acc{0.0, 0.0};
    for (int i = 0; i < nq; ++i) {
        acc += expectation(psi, hnr.at((i + 0.5) * period / nq));
    }
    acc /= double(nq);
    CHECK(std::abs(acc) < 1e-10);
}

TEST_CASE("rwa_report") {
    SystemParams p;
    DerivedParams d = DerivedParams::from(p);
    RwaReport r = rwa_report(p, d);
    CHECK(r.ratio_omega_m == doctest::Approx(2.37).epsilon(0.002));
    CHECK(r.satisfied);

    SystemParams pz = p;
    pz.g0 = 0.0;
    RwaReport rz = rwa_report(pz, DerivedParams::from(pz));
    CHECK(std::isinf(rz.ratio_g_cosh));
    CHECK(std::isinf(rz.ratio_g_sinh));

    SystemParams pr0 = p;
    pr0.lambda = 0.0;
    RwaReport rr0 = rwa_report(pr0, DerivedParams::from(pr0));
    CHECK(std::isinf(rr0.ratio_g_sinh));
}

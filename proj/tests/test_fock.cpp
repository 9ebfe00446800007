#include <doctest.h>

#include <cmath>
#include <random>

#include "optomech/fock.hpp"

using namespace optomech;

namespace {

// Deterministic random density matrix: rho = G G^dag / Tr.
DensityMatrix random_density(const CompositeSpace& sp, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const long d = sp.dim();
    Mat g(d, d);
    for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) g(i, j) = Complex(dist(gen), dist(gen));
    }
    Mat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(sp, rho);
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

TEST_CASE("space construction invariants") {
    CHECK_THROWS_AS(TruncatedSpace(1, "x"), SimError);
    TruncatedSpace a(3, "cavity"), b(4, "mech");
    CompositeSpace comp{a, b};
    CHECK(comp.dim() == 12);
    CHECK(comp.slot_index("cavity") == 0);
    CHECK(comp.slot_index("mech") == 1);
    CHECK_THROWS_AS(comp.slot_index("nope"), UnknownSlot);
}

TEST_CASE("destroy matrix elements") {
    // dim=2 ladder is [[0,1],[0,0]]
    Operator a2 = destroy(TruncatedSpace(2, "cavity"));
    CHECK(a2.mat(0, 1).real() == doctest::Approx(1.0));
    CHECK(std::abs(a2.mat(1, 0)) == 0.0);
    CHECK(std::abs(a2.mat(0, 0)) == 0.0);

    // dim=3, entry (1,2) = sqrt(2)
    Operator a3 = destroy(TruncatedSpace(3, "cavity"));
    CHECK(a3.mat(1, 2).real() == doctest::Approx(std::sqrt(2.0)));

    // ladder identity <m|a|n> = sqrt(n) delta_{m,n-1} on several dims
    for (int dim : {2, 5, 17}) {
        Operator a = destroy(TruncatedSpace(dim, "cavity"));
        for (int m = 0; m < dim; ++m) {
            for (int n = 0; n < dim; ++n) {
                const double want = (m == n - 1) ? std::sqrt(double(n)) : 0.0;
                CHECK(std::abs(a.mat(m, n) - want) < 1e-15);
            }
        }
    }

    // number = create * destroy on dim=4 is diag(0,1,2,3)
    TruncatedSpace s4(4, "cavity");
    Operator n4 = create(s4) * destroy(s4);
    CHECK((n4.mat - number(s4).mat).norm() < 1e-14);
    for (int k = 0; k < 4; ++k) CHECK(n4.mat(k, k).real() == doctest::Approx(double(k)));
}

TEST_CASE("operator arithmetic and commutator") {
    TruncatedSpace s(20, "cavity");
    Operator a = destroy(s);
    Operator comm = commutator(a, a.adjoint());
    // identity except the truncation corner, which is -(dim-1)
    Mat want = Mat::Identity(20, 20);
    want(19, 19) = Complex(-19.0, 0.0);
    CHECK((comm.mat - want).norm() < 1e-12);

    Operator i_id = kI * identity(s);
    CHECK((i_id.adjoint().mat + kI * Mat::Identity(20, 20)).norm() < 1e-15);

    CHECK(commutator(a, a).mat.norm() == 0.0);

    TruncatedSpace other(20, "mech");
    CHECK_THROWS_AS(a + destroy(other), SpaceMismatch);
    CHECK_THROWS_AS(a * destroy(other), SpaceMismatch);
}

TEST_CASE("tensor products") {
    TruncatedSpace c(2, "cavity"), m(3, "mech");
    Operator id6 = tensor(identity(c), identity(m));
    CHECK((id6.mat - Mat::Identity(6, 6)).norm() == 0.0);

    // number x I on |2> x |0> -> eigenvalue 2 (use 3-level cavity)
    TruncatedSpace c3(3, "cavity");
    Operator nxi = tensor(number(c3), identity(m));
    PureState psi = tensor(fock_state(c3, 2), fock_state(m, 0));
    CHECK(expectation(psi, nxi).real() == doctest::Approx(2.0));

    // <a^dag a x (b + b^dag)> on |1> x |beta=1> -> 2 Re(beta) = 2
    TruncatedSpace mb(30, "mech");
    Operator op = tensor(number(c3), destroy(mb) + create(mb));
    PureState psi2 = tensor(fock_state(c3, 1), coherent_state(mb, Complex(1.0, 0.0)));
    CHECK(expectation(psi2, op).real() == doctest::Approx(2.0).epsilon(1e-8));

    // Tr(X x Y) = Tr X Tr Y on random operators
    std::mt19937 gen(7);
    std::normal_distribution<double> dist;
    Mat xm(3, 3), ym(4, 4);
    for (int i = 0; i < 9; ++i) xm(i / 3, i % 3) = Complex(dist(gen), dist(gen));
    for (int i = 0; i < 16; ++i) ym(i / 4, i % 4) = Complex(dist(gen), dist(gen));
    Operator x(CompositeSpace(TruncatedSpace(3, "cavity")), xm);
    Operator y(CompositeSpace(TruncatedSpace(4, "mech")), ym);
    const Complex lhs = tensor(x, y).mat.trace();
    const Complex rhs = xm.trace() * ym.trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("embed matches explicit tensor") {
    TruncatedSpace c(4, "cavity"), m(5, "mech");
    CompositeSpace comp{c, m};
    CHECK((embed(number(c), "cavity", comp).mat -
           tensor(number(c), identity(m)).mat).norm() < 1e-14);
    CHECK((embed(number(m), "mech", comp).mat -
           tensor(identity(c), number(m)).mat).norm() < 1e-14);
    CHECK_THROWS_AS(embed(number(c), "bogus", comp), UnknownSlot);
}

TEST_CASE("matrix exponential") {
    TruncatedSpace s(4, "cavity");
    Operator zero(CompositeSpace(s), Mat::Zero(4, 4));
    CHECK((matrix_exponential(zero).mat - Mat::Identity(4, 4)).norm() < 1e-14);

    // exp(i pi n) = diag(1,-1,1,-1)
    Operator ipn = kI * kPi * number(s);
    Mat want = Mat::Zero(4, 4);
    for (int k = 0; k < 4; ++k) want(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    CHECK((matrix_exponential(ipn).mat - want).norm() < 1e-12);

    // exp(alpha a^dag - alpha* a)|0> reproduces coherent amplitudes, alpha=1
    TruncatedSpace big(30, "cavity");
    const Complex alpha(1.0, 0.0);
    Operator gen = alpha * create(big) - std::conj(alpha) * destroy(big);
    CVec vac = CVec::Zero(30);
    vac(0) = 1.0;
    CVec displaced = matrix_exponential(gen).mat * vac;
    double max_err = 0.0;
    for (int n = 0; n < 25; ++n) {
        const Complex want_amp = std::exp(-0.5) * std::pow(alpha, n) / std::sqrt(factorial(n));
        max_err = std::max(max_err, std::abs(displaced(n) - want_amp));
    }
    CHECK(max_err < 1e-8);

    // expm(X) expm(-X) = I for a generic bounded X
    std::mt19937 g2(11);
    std::normal_distribution<double> dist;
    Mat xm(6, 6);
    for (int i = 0; i < 36; ++i) xm(i / 6, i % 6) = Complex(dist(g2), dist(g2));
    TruncatedSpace s6(6, "cavity");
    Operator x(CompositeSpace(s6), xm);
    CHECK((matrix_exponential(x).mat * matrix_exponential((-1.0) * x).mat -
           Mat::Identity(6, 6)).norm() < 1e-9);

    Mat bad = Mat::Zero(4, 4);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(matrix_exponential(Operator(CompositeSpace(s), bad)), NonFinite);
}

TEST_CASE("coherent state") {
    TruncatedSpace s30(30, "cavity");
    PureState vac = coherent_state(s30, Complex(0.0, 0.0));
    CHECK(std::abs(vac.amps(0) - Complex(1.0, 0.0)) < 1e-15);

    PureState c2 = coherent_state(s30, Complex(2.0, 0.0));
    CHECK(expectation(c2, number(s30)).real() == doctest::Approx(4.0).epsilon(1e-6));

    // closed-form Poisson amplitudes when leakage is tiny
    double leak = 0.0;
    PureState c1 = coherent_state(s30, Complex(0.8, 0.6), &leak);
    CHECK(leak < 1e-8);
    const Complex alpha(0.8, 0.6);
    for (int n = 0; n < 15; ++n) {
        const Complex want = std::exp(-0.5) * std::pow(alpha, n) / std::sqrt(factorial(n));
        CHECK(std::abs(c1.amps(n) - want) < 1e-10);
    }

    CHECK_THROWS_AS(coherent_state(TruncatedSpace(8, "cavity"), Complex(2.0, 0.0)),
                    TruncationTooSmall);
}

TEST_CASE("fock and thermal states") {
    TruncatedSpace s(40, "mech");
    DensityMatrix t0 = thermal_state(s, 0.0);
    Mat want = Mat::Zero(40, 40);
    want(0, 0) = 1.0;
    CHECK((t0.rho - want).norm() < 1e-15);

    DensityMatrix t1 = thermal_state(s, 1.0);
    CHECK(expectation(t1, number(s)).real() == doctest::Approx(1.0).epsilon(1e-6));

    PureState one = fock_state(s, 1);
    Operator n2 = create(s) * create(s) * destroy(s) * destroy(s);
    CHECK(std::abs(expectation(one, n2)) < 1e-15);

    CHECK_THROWS_AS(fock_state(s, 40), IndexOutOfRange);
    CHECK_THROWS_AS(fock_state(s, -1), IndexOutOfRange);
}

TEST_CASE("partial trace") {
    TruncatedSpace c(4, "cavity"), m(3, "mech");

    // product state reduces to its factor
    DensityMatrix ra = random_density(CompositeSpace(c), 1);
    DensityMatrix rb = random_density(CompositeSpace(m), 2);
    DensityMatrix prod = tensor(ra, rb);
    CHECK((partial_trace(prod, "cavity").rho - ra.rho).norm() < 1e-12);
    CHECK((partial_trace(prod, "mech").rho - rb.rho).norm() < 1e-12);

    // Bell-like state reduces to I/2 on either slot
    TruncatedSpace c2(2, "cavity"), m2(2, "mech");
    CompositeSpace comp2{c2, m2};
    CVec bell = CVec::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    PureState psi(comp2, bell);
    for (const char* keep : {"cavity", "mech"}) {
        DensityMatrix red = partial_trace(psi, keep);
        CHECK((red.rho - 0.5 * Mat::Identity(2, 2)).norm() < 1e-12);
    }

    // random 4x3 state: trace preserved, Hermiticity preserved
    DensityMatrix rnd = random_density(CompositeSpace{c, m}, 3);
    DensityMatrix red = partial_trace(rnd, "cavity");
    CHECK(std::abs(red.rho.trace().real() - 1.0) < 1e-12);
    CHECK((red.rho - red.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(partial_trace(rnd, "bogus"), UnknownSlot);

    // consistency with an expectation value taken in the full space
    CompositeSpace comp{c, m};
    Operator n_emb = embed(number(c), "cavity", comp);
    CHECK(std::abs(expectation(rnd, n_emb) - expectation(red, number(c))) < 1e-12);
}

TEST_CASE("expectation and state validation") {
    TruncatedSpace s(30, "cavity");
    CHECK(std::abs(expectation(fock_state(s, 0), number(s))) < 1e-15);
    PureState c2 = coherent_state(s, Complex(2.0, 0.0));
    CHECK(expectation(c2, number(s)).real() == doctest::Approx(4.0).epsilon(1e-6));

    DensityMatrix rnd = random_density(CompositeSpace(s), 4);
    CHECK(expectation(rnd, identity(s)).real() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_NOTHROW(rnd.validate());

    // violations are caught
    Mat bad = rnd.rho;
    bad(0, 1) += Complex(1e-3, 0.0);  // break Hermiticity
    CHECK_THROWS_AS(DensityMatrix(CompositeSpace(s), bad).validate(), SimError);
    Mat bad2 = 2.0 * rnd.rho;  // break trace
    CHECK_THROWS_AS(DensityMatrix(CompositeSpace(s), bad2).validate(), SimError);
}

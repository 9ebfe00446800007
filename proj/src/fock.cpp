#include "optomech/fock.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace optomech {

namespace {

void require_same_space(const CompositeSpace& a, const CompositeSpace& b,
                        const char* what) {
    if (a != b) {
        throw SpaceMismatch(std::string(what) + ": operands live on different spaces");
    }
}

void require_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) {
        throw NonFinite(std::string(what) + ": matrix contains NaN/Inf");
    }
}

}  // namespace

TruncatedSpace::TruncatedSpace(int dim_, std::string label_)
    : dim(dim_), label(std::move(label_)) {
    if (dim < 2) {
        throw IndexOutOfRange("TruncatedSpace needs dim >= 2, got " + std::to_string(dim));
    }
}

CompositeSpace::CompositeSpace(const TruncatedSpace& s) : slots{s} {}

CompositeSpace::CompositeSpace(std::initializer_list<TruncatedSpace> list) : slots(list) {
    for (size_t i = 0; i < slots.size(); ++i) {
        for (size_t j = i + 1; j < slots.size(); ++j) {
            if (slots[i].label == slots[j].label) {
                throw UnknownSlot("duplicate slot label '" + slots[i].label + "'");
            }
        }
    }
}

long CompositeSpace::dim() const {
    long d = 1;
    for (const auto& s : slots) d *= s.dim;
    return d;
}

int CompositeSpace::slot_index(const std::string& label) const {
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].label == label) return static_cast<int>(i);
    }
    throw UnknownSlot("no slot labeled '" + label + "'");
}

bool CompositeSpace::operator==(const CompositeSpace& other) const {
    if (slots.size() != other.slots.size()) return false;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].dim != other.slots[i].dim || slots[i].label != other.slots[i].label) {
            return false;
        }
    }
    return true;
}

Operator::Operator(CompositeSpace sp, Mat m) : space(std::move(sp)), mat(std::move(m)) {
    if (mat.rows() != mat.cols() || mat.rows() != space.dim()) {
        throw SpaceMismatch("Operator matrix side " + std::to_string(mat.rows()) +
                            " does not match space dim " + std::to_string(space.dim()));
    }
    require_finite(mat, "Operator");
}

Operator Operator::adjoint() const { return Operator(space, mat.adjoint()); }

bool Operator::is_hermitian(double tol) const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff() < tol;
}

Operator operator+(const Operator& x, const Operator& y) {
    require_same_space(x.space, y.space, "add");
    return Operator(x.space, x.mat + y.mat);
}

Operator operator-(const Operator& x, const Operator& y) {
    require_same_space(x.space, y.space, "sub");
    return Operator(x.space, x.mat - y.mat);
}

Operator operator*(const Operator& x, const Operator& y) {
    require_same_space(x.space, y.space, "mul");
    return Operator(x.space, x.mat * y.mat);
}

Operator operator*(Complex c, const Operator& x) { return Operator(x.space, c * x.mat); }
Operator operator*(double c, const Operator& x) { return Operator(x.space, c * x.mat); }

Operator commutator(const Operator& x, const Operator& y) {
    require_same_space(x.space, y.space, "commutator");
    return Operator(x.space, x.mat * y.mat - y.mat * x.mat);
}

PureState::PureState(CompositeSpace sp, CVec a) : space(std::move(sp)), amps(std::move(a)) {
    if (amps.size() != space.dim()) {
        throw SpaceMismatch("PureState length does not match space dim");
    }
    const double n = amps.norm();
    if (std::abs(n - 1.0) > 1e-12) {
        if (n == 0.0) throw NonFinite("PureState: zero vector");
        amps /= n;
    }
}

DensityMatrix PureState::to_density() const {
    return DensityMatrix(space, amps * amps.adjoint());
}

DensityMatrix::DensityMatrix(CompositeSpace sp, Mat m) : space(std::move(sp)), rho(std::move(m)) {
    if (rho.rows() != rho.cols() || rho.rows() != space.dim()) {
        throw SpaceMismatch("DensityMatrix side does not match space dim");
    }
    require_finite(rho, "DensityMatrix");
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat> es((rho + rho.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double pos_tol) const {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) {
        std::ostringstream ss;
        ss << "DensityMatrix not Hermitian, max |rho - rho^dag| = " << herm;
        throw NonFinite(ss.str());
    }
    const double tr = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (tr > trace_tol) {
        std::ostringstream ss;
        ss << "DensityMatrix trace off by " << tr;
        throw NonFinite(ss.str());
    }
    const double lmin = min_eigenvalue();
    if (lmin < -pos_tol) {
        std::ostringstream ss;
        ss << "DensityMatrix min eigenvalue " << lmin;
        throw NonFinite(ss.str());
    }
}

Operator destroy(const TruncatedSpace& space) {
    Mat m = Mat::Zero(space.dim, space.dim);
    for (int n = 1; n < space.dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(CompositeSpace(space), std::move(m));
}

Operator create(const TruncatedSpace& space) { return destroy(space).adjoint(); }

Operator number(const TruncatedSpace& space) {
    Mat m = Mat::Zero(space.dim, space.dim);
    for (int n = 0; n < space.dim; ++n) m(n, n) = static_cast<double>(n);
    return Operator(CompositeSpace(space), std::move(m));
}

Operator identity(const CompositeSpace& space) {
    return Operator(space, Mat::Identity(space.dim(), space.dim()));
}

Operator identity(const TruncatedSpace& space) { return identity(CompositeSpace(space)); }

Operator tensor(const Operator& x, const Operator& y) {
    CompositeSpace sp;
    sp.slots = x.space.slots;
    for (const auto& s : y.space.slots) {
        for (const auto& t : sp.slots) {
            if (s.label == t.label) {
                throw SpaceMismatch("tensor: slot label '" + s.label + "' appears twice");
            }
        }
        sp.slots.push_back(s);
    }
    const long dx = x.space.dim(), dy = y.space.dim();
    Mat m(dx * dy, dx * dy);
    for (long i = 0; i < dx; ++i) {
        for (long j = 0; j < dx; ++j) {
            m.block(i * dy, j * dy, dy, dy) = x.mat(i, j) * y.mat;
        }
    }
    return Operator(std::move(sp), std::move(m));
}

PureState tensor(const PureState& x, const PureState& y) {
    CompositeSpace sp;
    sp.slots = x.space.slots;
    for (const auto& s : y.space.slots) sp.slots.push_back(s);
    const long dx = x.space.dim(), dy = y.space.dim();
    CVec v(dx * dy);
    for (long i = 0; i < dx; ++i) v.segment(i * dy, dy) = x.amps(i) * y.amps;
    return PureState(std::move(sp), std::move(v));
}

DensityMatrix tensor(const DensityMatrix& x, const DensityMatrix& y) {
    Operator t = tensor(Operator(x.space, x.rho), Operator(y.space, y.rho));
    return DensityMatrix(t.space, std::move(t.mat));
}

Operator embed(const Operator& x, const std::string& slot, const CompositeSpace& comp) {
    if (x.space.slots.size() != 1) {
        throw SpaceMismatch("embed expects a single-slot operator");
    }
    const int k = comp.slot_index(slot);
    if (comp.slots[k].dim != x.space.slots[0].dim) {
        throw SpaceMismatch("embed: slot dim mismatch for '" + slot + "'");
    }
    Operator acc = (k == 0) ? Operator(CompositeSpace(comp.slots[0]), x.mat)
                            : identity(comp.slots[0]);
    for (size_t i = 1; i < comp.slots.size(); ++i) {
        Operator next = (static_cast<int>(i) == k)
                            ? Operator(CompositeSpace(comp.slots[i]), x.mat)
                            : identity(comp.slots[i]);
        acc = tensor(acc, next);
    }
    return acc;
}

Operator matrix_exponential(const Operator& x) {
    require_finite(x.mat, "matrix_exponential");
    return Operator(x.space, x.mat.exp());
}

PureState coherent_state(const TruncatedSpace& space, Complex alpha,
                         double* leakage, double leak_tol) {
    CVec v(space.dim);
    // c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), built by recursion.
    Complex c = std::exp(-0.5 * std::norm(alpha));
    v(0) = c;
    for (int n = 1; n < space.dim; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = c;
    }
    const double kept = v.squaredNorm();
    const double leak = 1.0 - kept;
    if (leakage) *leakage = leak;
    if (leak > leak_tol) {
        std::ostringstream ss;
        ss << "coherent_state(alpha=" << alpha << ", dim=" << space.dim
           << ") leaks " << leak << " > " << leak_tol;
        throw TruncationTooSmall(ss.str());
    }
    return PureState(CompositeSpace(space), v / std::sqrt(kept));
}

PureState fock_state(const TruncatedSpace& space, int n) {
    if (n < 0 || n >= space.dim) {
        throw IndexOutOfRange("fock_state: n = " + std::to_string(n) +
                              " outside dim " + std::to_string(space.dim));
    }
    CVec v = CVec::Zero(space.dim);
    v(n) = 1.0;
    return PureState(CompositeSpace(space), std::move(v));
}

DensityMatrix thermal_state(const TruncatedSpace& space, double nbar,
                            double* leakage, double leak_tol) {
    if (nbar < 0.0) throw IndexOutOfRange("thermal_state: nbar < 0");
    Mat m = Mat::Zero(space.dim, space.dim);
    if (nbar == 0.0) {
        m(0, 0) = 1.0;
        if (leakage) *leakage = 0.0;
        return DensityMatrix(CompositeSpace(space), std::move(m));
    }
    const double q = nbar / (1.0 + nbar);
    double p = 1.0 / (1.0 + nbar), kept = 0.0;
    for (int n = 0; n < space.dim; ++n) {
        m(n, n) = p;
        kept += p;
        p *= q;
    }
    const double leak = 1.0 - kept;
    if (leakage) *leakage = leak;
    if (leak > leak_tol) {
        std::ostringstream ss;
        ss << "thermal_state(nbar=" << nbar << ", dim=" << space.dim
           << ") leaks " << leak << " > " << leak_tol;
        throw TruncationTooSmall(ss.str());
    }
    m /= kept;
    return DensityMatrix(CompositeSpace(space), std::move(m));
}

namespace {

// Strides for global index = sum_k i_k * stride_k in slot order.
std::vector<long> slot_strides(const CompositeSpace& sp) {
    std::vector<long> strides(sp.slots.size());
    long s = 1;
    for (int k = static_cast<int>(sp.slots.size()) - 1; k >= 0; --k) {
        strides[k] = s;
        s *= sp.slots[k].dim;
    }
    return strides;
}

DensityMatrix partial_trace_impl(const CompositeSpace& sp, const Mat& rho,
                                 const std::string& keep) {
    const int k = sp.slot_index(keep);
    const auto strides = slot_strides(sp);
    const long dk = sp.slots[k].dim;
    const long stride_k = strides[k];
    const long rest = sp.dim() / dk;

    Mat out = Mat::Zero(dk, dk);
    // Enumerate the traced-out multi-index once; r -> base offset.
    for (long r = 0; r < rest; ++r) {
        long base = 0, rr = r;
        for (int s = static_cast<int>(sp.slots.size()) - 1; s >= 0; --s) {
            if (s == k) continue;
            const long d = sp.slots[s].dim;
            base += (rr % d) * strides[s];
            rr /= d;
        }
        for (long i = 0; i < dk; ++i) {
            for (long j = 0; j < dk; ++j) {
                out(i, j) += rho(base + i * stride_k, base + j * stride_k);
            }
        }
    }
    return DensityMatrix(CompositeSpace(sp.slots[k]), std::move(out));
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, const std::string& keep) {
    return partial_trace_impl(rho.space, rho.rho, keep);
}

DensityMatrix partial_trace(const PureState& psi, const std::string& keep) {
    // For pure states avoid forming the full outer product when possible.
    const CompositeSpace& sp = psi.space;
    const int k = sp.slot_index(keep);
    const auto strides = slot_strides(sp);
    const long dk = sp.slots[k].dim;
    const long stride_k = strides[k];
    const long rest = sp.dim() / dk;

    Mat out = Mat::Zero(dk, dk);
    for (long r = 0; r < rest; ++r) {
        long base = 0, rr = r;
        for (int s = static_cast<int>(sp.slots.size()) - 1; s >= 0; --s) {
            if (s == k) continue;
            const long d = sp.slots[s].dim;
            base += (rr % d) * strides[s];
            rr /= d;
        }
        for (long i = 0; i < dk; ++i) {
            const Complex ai = psi.amps(base + i * stride_k);
            if (ai == Complex(0.0, 0.0)) continue;
            for (long j = 0; j < dk; ++j) {
                out(i, j) += ai * std::conj(psi.amps(base + j * stride_k));
            }
        }
    }
    return DensityMatrix(CompositeSpace(sp.slots[k]), std::move(out));
}

Complex expectation(const DensityMatrix& rho, const Operator& x) {
    require_same_space(rho.space, x.space, "expectation");
    return (rho.rho * x.mat).trace();
}

Complex expectation(const PureState& psi, const Operator& x) {
    require_same_space(psi.space, x.space, "expectation");
    return psi.amps.dot(x.mat * psi.amps);
}

}  // namespace optomech

#pragma once

#include <complex>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optomech/errors.hpp"

namespace optomech {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// A bosonic mode kept to its lowest `dim` Fock levels |0>..|dim-1>.
struct TruncatedSpace {
    int dim;
    std::string label;

    TruncatedSpace(int dim_, std::string label_);
};

/// Ordered tensor factors. Slot order is fixed at construction; by project
/// convention the cavity slot comes first and the mechanical slot second.
struct CompositeSpace {
    std::vector<TruncatedSpace> slots;

    CompositeSpace() = default;
    explicit CompositeSpace(const TruncatedSpace& s);
    CompositeSpace(std::initializer_list<TruncatedSpace> list);

    long dim() const;
    int slot_index(const std::string& label) const;  // throws UnknownSlot
    bool operator==(const CompositeSpace& other) const;
    bool operator!=(const CompositeSpace& other) const { return !(*this == other); }
};

/// Dense complex matrix tagged with the space it acts on.
struct Operator {
    CompositeSpace space;
    Mat mat;

    Operator() = default;
    Operator(CompositeSpace sp, Mat m);

    Operator adjoint() const;
    bool is_hermitian(double tol = 1e-12) const;
};

Operator operator+(const Operator& x, const Operator& y);
Operator operator-(const Operator& x, const Operator& y);
Operator operator*(const Operator& x, const Operator& y);
Operator operator*(Complex c, const Operator& x);
Operator operator*(double c, const Operator& x);
Operator commutator(const Operator& x, const Operator& y);

struct DensityMatrix;

struct PureState {
    CompositeSpace space;
    CVec amps;

    PureState() = default;
    PureState(CompositeSpace sp, CVec a);

    DensityMatrix to_density() const;
};

struct DensityMatrix {
    CompositeSpace space;
    Mat rho;

    DensityMatrix() = default;
    DensityMatrix(CompositeSpace sp, Mat m);

    // Hermiticity / unit-trace / positivity checks (tolerances from the
    // module contract). Throws on violation.
    void validate(double herm_tol = 1e-10, double trace_tol = 1e-8,
                  double pos_tol = 1e-8) const;
    double min_eigenvalue() const;
};

// Ladder operators: <n-1|a|n> = sqrt(n).
Operator destroy(const TruncatedSpace& space);
Operator create(const TruncatedSpace& space);
Operator number(const TruncatedSpace& space);
Operator identity(const CompositeSpace& space);
Operator identity(const TruncatedSpace& space);

/// Kronecker product in slot order.
Operator tensor(const Operator& x, const Operator& y);
PureState tensor(const PureState& x, const PureState& y);
DensityMatrix tensor(const DensityMatrix& x, const DensityMatrix& y);

/// Operator on one slot, identities on all others.
Operator embed(const Operator& x, const std::string& slot, const CompositeSpace& comp);

/// exp(X) by scaling-and-squaring (Pade). Throws NonFinite on NaN/Inf input.
Operator matrix_exponential(const Operator& x);

// State constructors. Each reports truncation leakage (probability mass cut
// by the Fock cutoff) and throws TruncationTooSmall above `leak_tol`.
PureState coherent_state(const TruncatedSpace& space, Complex alpha,
                         double* leakage = nullptr, double leak_tol = 1e-6);
PureState fock_state(const TruncatedSpace& space, int n);
DensityMatrix thermal_state(const TruncatedSpace& space, double nbar,
                            double* leakage = nullptr, double leak_tol = 1e-6);

/// Reduce to the slot named `keep`; trace preserved.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::string& keep);
DensityMatrix partial_trace(const PureState& psi, const std::string& keep);

Complex expectation(const DensityMatrix& rho, const Operator& x);
Complex expectation(const PureState& psi, const Operator& x);

}  // namespace optomech

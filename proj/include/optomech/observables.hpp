#pragma once

#include "optomech/fock.hpp"

namespace optomech {

/// g2(0) = <a^dag a^dag a a> / <a^dag a>^2 for the mode named `slot`
/// (default "cavity"; a single-slot state uses its only slot).
/// Throws VacuumDivergence when <a^dag a> <= floor.
double g2_zero(const DensityMatrix& rho, double floor = 1e-8,
               const std::string& slot = "cavity");

/// Raw ingredients, for storage-lean trajectory recording.
struct G2Ingredients {
    Operator n;       // a^dag a
    Operator n2;      // a^dag a^dag a a
};
G2Ingredients g2_operators(const CompositeSpace& space, const std::string& slot = "cavity");
double g2_from_moments(Complex n_expect, Complex n2_expect, double floor = 1e-8);

struct WignerGridSpec {
    double x_min = -4.0, x_max = 4.0;
    double y_min = -4.0, y_max = 4.0;
    int nx = 121, ny = 121;
    int pad_dim = 0;       // 0 = automatic from max |alpha| over the grid
    int threads = 0;       // 0 = hardware default
};

struct WignerGrid {
    Eigen::VectorXd x_axis;
    Eigen::VectorXd y_axis;
    Eigen::MatrixXd values;  // values(iy, ix)

    double min_value() const { return values.minCoeff(); }
    double max_value() const { return values.maxCoeff(); }
    /// Integral of min(W, 0) over the grid (trapezoid in each direction).
    double negative_volume() const;
    double integral() const;
};

/// Displaced-parity Wigner function, W(x, y) = (1/pi) Tr[D(a)^dag rho D(a) P]
/// with alpha = x + i y and parity P = diag((-1)^n), evaluated in a padded
/// Fock space. Normalized so that the grid integral is 1/2 (x = (a+a^dag)/2
/// quadrature convention); vacuum peaks at 1/pi.
WignerGrid wigner(const DensityMatrix& rho_cav, const WignerGridSpec& spec = {});

/// <psi| rho |psi>.
double state_fidelity(const DensityMatrix& rho, const PureState& psi);

/// Kerr-evolved coherent state sum_n c_n(alpha) e^{i 2 pi k^2 n^2} |n>,
/// the lossless reference for the cavity state at t = 2 pi / omega_m_tilde
/// with k = g_tilde / omega_m_tilde.
PureState kerr_cat_reference(Complex alpha, double k_ratio, const TruncatedSpace& cavity);

}  // namespace optomech

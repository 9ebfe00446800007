#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "optomech/model.hpp"

namespace optomech {

using SpMat = Eigen::SparseMatrix<Complex>;

enum class DissipatorKind {
    Normal,      // D[o] rho = o rho o^dag - (1/2){o^dag o, rho}
    Anomalous,   // G[o] rho = o rho o   - (1/2){o o, rho}
};

struct Channel {
    Operator op;
    Complex coeff;  // real nonnegative rate for Normal channels
    DissipatorKind kind = DissipatorKind::Normal;
};

struct DissipatorSpec {
    std::vector<Channel> channels;

    /// kappa D[a] + gamma(N+1) D[b] + gamma N D[b^dag]
    /// - gamma M G[b] - gamma M* G[b^dag]
    static DissipatorSpec standard(const SystemParams& p, const DerivedParams& d,
                                   const SimSpaces& spaces);
    void check(const CompositeSpace& space) const;
};

Mat apply_dissipator(DissipatorKind kind, const Operator& o, const Mat& rho);

/// Right-hand side of the master equation, evaluated matrix-free.
Mat liouvillian_apply(const Operator& h, const DissipatorSpec& diss, const Mat& rho);

/// Explicit superoperator matrix under column-stacking vectorization.
/// Dense; guarded for small composite dimensions only.
Mat liouvillian_matrix(const Operator& h, const DissipatorSpec& diss, long max_dim = 64);

/// Sparse version of the same matrix, used for steady-state solving.
SpMat liouvillian_sparse(const Operator& h, const DissipatorSpec& diss, long max_dim = 400);

struct StepperOpts {
    double safety = 0.05;         // h <= safety / ||H||
    double max_h = 0.0;           // optional hard cap (0 = none)
    double leak_tol = 1e-3;       // top-two-level population guard per mode
    double renorm_tol = 1e-10;    // renormalize trace drift beyond this
    bool record_states = false;
    std::vector<Operator> observables;
    std::vector<std::string> observable_names;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;                 // when record_states
    std::vector<std::vector<Complex>> observables;     // one row per time point
    std::vector<std::string> observable_names;
    int renorm_events = 0;
    double max_trace_drift = 0.0;
    double step_size = 0.0;
};

/// Fixed-step RK4 integration of the master equation. With a modulated term
/// present the step is additionally bounded by pi/(40 omega_d) so the
/// 2 omega_d oscillation is resolved.
Trajectory evolve(const DensityMatrix& rho0, const Operator& h_static,
                  const std::optional<ModulatedTerm>& h_time,
                  const DissipatorSpec& diss, const std::vector<double>& t_grid,
                  const StepperOpts& opts = {});

/// Schroedinger-picture RK4 for dissipation-free runs; used where the density
/// matrix would not fit (lossless cat evolution at large mechanical cutoffs).
struct PureTrajectory {
    std::vector<double> times;
    std::vector<PureState> states;
    double step_size = 0.0;
};

PureTrajectory evolve_pure(const PureState& psi0, const Operator& h_static,
                           const std::vector<double>& t_grid,
                           const StepperOpts& opts = {});

/// Same integration, but with a caller-supplied sparse Hamiltonian. Large
/// mechanical cutoffs never materialize a dense matrix this way.
PureTrajectory evolve_pure_sparse(const PureState& psi0, const SpMat& h,
                                  const std::vector<double>& t_grid,
                                  const StepperOpts& opts = {});

double spmat_norm_estimate(const SpMat& m, int iters = 30);

/// Triplet assembly of H'_OMS on a cavity_dim x mech_dim product basis
/// (index = i_cav * mech_dim + i_mech), bypassing dense intermediates.
SpMat sparse_h_oms(const SystemParams& p, const DerivedParams& d, int cavity_dim,
                   int mech_dim, const HamiltonianOpts& opts = {});

struct SteadyStateOpts {
    long max_dim = 400;
    double residual_tol = 1e-8;
    double pos_tol = 1e-6;
};

/// Null vector of the (time-independent) Liouvillian with the trace
/// constraint replacing one row; sparse LU solve.
DensityMatrix steady_state(const Operator& h_static, const DissipatorSpec& diss,
                           const SteadyStateOpts& opts = {});

/// Spectral-norm estimate by power iteration on H^dag H (deterministic start).
double operator_norm_estimate(const Operator& h, int iters = 30);

/// Population of the top two Fock levels of each mode; the truncation guard.
std::vector<double> top_level_population(const DensityMatrix& rho);
std::vector<double> top_level_population(const PureState& psi);

}  // namespace optomech

#include "optomech/dynamics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

namespace optomech {

namespace {

constexpr double kSparseDropTol = 1e-14;

SpMat to_sparse(const Mat& m) {
    return m.sparseView(1.0, kSparseDropTol);
}

void require_space(const CompositeSpace& a, const CompositeSpace& b, const char* what) {
    if (a != b) throw SpaceMismatch(std::string(what) + ": space mismatch");
}

}  // namespace

DissipatorSpec DissipatorSpec::standard(const SystemParams& p, const DerivedParams& d,
                                        const SimSpaces& spaces) {
    DissipatorSpec spec;
    const Operator a = spaces.a();
    const Operator b = spaces.b();
    spec.channels.push_back({a, Complex(p.kappa), DissipatorKind::Normal});
    if (p.gamma > 0.0) {
        spec.channels.push_back({b, Complex(p.gamma * (d.n_tilde + 1.0)), DissipatorKind::Normal});
        if (d.n_tilde > 0.0) {
            spec.channels.push_back({b.adjoint(), Complex(p.gamma * d.n_tilde),
                                     DissipatorKind::Normal});
        }
        if (std::abs(d.m_tilde) > 0.0) {
            spec.channels.push_back({b, -p.gamma * d.m_tilde, DissipatorKind::Anomalous});
            spec.channels.push_back({b.adjoint(), -p.gamma * std::conj(d.m_tilde),
                                     DissipatorKind::Anomalous});
        }
    }
    return spec;
}

void DissipatorSpec::check(const CompositeSpace& space) const {
    for (const auto& ch : channels) {
        require_space(ch.op.space, space, "DissipatorSpec");
        if (ch.kind == DissipatorKind::Normal &&
            (ch.coeff.real() < 0.0 || std::abs(ch.coeff.imag()) > 1e-14)) {
            throw SpaceMismatch("DissipatorSpec: normal channel rate must be real >= 0");
        }
    }
}

Mat apply_dissipator(DissipatorKind kind, const Operator& o, const Mat& rho) {
    if (o.mat.rows() != rho.rows()) throw SpaceMismatch("apply_dissipator: size mismatch");
    if (kind == DissipatorKind::Normal) {
        Mat od_o = o.mat.adjoint() * o.mat;
        return o.mat * rho * o.mat.adjoint() - 0.5 * (od_o * rho + rho * od_o);
    }
    Mat oo = o.mat * o.mat;
    return o.mat * rho * o.mat - 0.5 * (oo * rho + rho * oo);
}

Mat liouvillian_apply(const Operator& h, const DissipatorSpec& diss, const Mat& rho) {
    if (h.mat.rows() != rho.rows()) throw SpaceMismatch("liouvillian_apply: size mismatch");
    Mat out = -kI * (h.mat * rho - rho * h.mat);
    for (const auto& ch : diss.channels) {
        out += ch.coeff * apply_dissipator(ch.kind, ch.op, rho);
    }
    return out;
}

namespace {

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
template <typename MatrixT>
MatrixT liouvillian_build(const Operator& h, const DissipatorSpec& diss) {
    const long d = h.space.dim();
    const Mat id = Mat::Identity(d, d);

    Mat dense = Mat::Zero(d * d, d * d);
    auto add = [&](const Mat& left, const Mat& right, Complex c) {
        // c * left . rho . right  ->  c (right^T kron left)
        dense += c * Eigen::kroneckerProduct(right.transpose(), left).eval();
    };

    add(h.mat, id, -kI);
    add(id, h.mat, kI);
    for (const auto& ch : diss.channels) {
        const Mat& o = ch.op.mat;
        if (ch.kind == DissipatorKind::Normal) {
            Mat od_o = o.adjoint() * o;
            add(o, o.adjoint(), ch.coeff);
            add(od_o, id, -0.5 * ch.coeff);
            add(id, od_o, -0.5 * ch.coeff);
        } else {
            Mat oo = o * o;
            add(o, o, ch.coeff);
            add(oo, id, -0.5 * ch.coeff);
            add(id, oo, -0.5 * ch.coeff);
        }
    }
    if constexpr (std::is_same_v<MatrixT, Mat>) {
        return dense;
    } else {
        return to_sparse(dense);
    }
}

}  // namespace

Mat liouvillian_matrix(const Operator& h, const DissipatorSpec& diss, long max_dim) {
    diss.check(h.space);
    const long d = h.space.dim();
    if (d > max_dim) {
        throw DimensionTooLarge("liouvillian_matrix: dim " + std::to_string(d) +
                                " exceeds guard " + std::to_string(max_dim));
    }
    return liouvillian_build<Mat>(h, diss);
}

SpMat liouvillian_sparse(const Operator& h, const DissipatorSpec& diss, long max_dim) {
    diss.check(h.space);
    const long d = h.space.dim();
    if (d > max_dim) {
        throw DimensionTooLarge("liouvillian_sparse: dim " + std::to_string(d) +
                                " exceeds guard " + std::to_string(max_dim));
    }
    const SpMat hs = to_sparse(h.mat);
    SpMat id(d, d);
    id.setIdentity();

    SpMat out(d * d, d * d);
    auto add = [&](const SpMat& left, const SpMat& right, Complex c) {
        SpMat term = Eigen::kroneckerProduct(SpMat(right.transpose()), left);
        out = out + SpMat(c * term);
    };
    add(hs, id, -kI);
    add(id, hs, kI);
    for (const auto& ch : diss.channels) {
        const SpMat o = to_sparse(ch.op.mat);
        const SpMat od(o.adjoint());
        if (ch.kind == DissipatorKind::Normal) {
            SpMat od_o = od * o;
            add(o, od, ch.coeff);
            add(od_o, id, -0.5 * ch.coeff);
            add(id, od_o, -0.5 * ch.coeff);
        } else {
            SpMat oo = o * o;
            add(o, o, ch.coeff);
            add(oo, id, -0.5 * ch.coeff);
            add(id, oo, -0.5 * ch.coeff);
        }
    }
    out.makeCompressed();
    return out;
}

double operator_norm_estimate(const Operator& h, int iters) {
    const long d = h.space.dim();
    CVec v = CVec::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    double nrm = 0.0;
    for (int i = 0; i < iters; ++i) {
        CVec w = h.mat * v;
        CVec u = h.mat.adjoint() * w;
        const double un = u.norm();
        if (un == 0.0) return 0.0;
        nrm = std::sqrt(un);
        v = u / un;
    }
    return nrm;
}

namespace {

std::vector<double> top_levels_from_diag(const CompositeSpace& sp, const CVec& diag) {
    std::vector<long> strides(sp.slots.size());
    long s = 1;
    for (int k = static_cast<int>(sp.slots.size()) - 1; k >= 0; --k) {
        strides[k] = s;
        s *= sp.slots[k].dim;
    }
    std::vector<double> pops(sp.slots.size(), 0.0);
    const long d = sp.dim();
    for (long idx = 0; idx < d; ++idx) {
        for (size_t k = 0; k < sp.slots.size(); ++k) {
            const long ik = (idx / strides[k]) % sp.slots[k].dim;
            if (ik >= sp.slots[k].dim - 2) pops[k] += diag(idx).real();
        }
    }
    return pops;
}

}  // namespace

std::vector<double> top_level_population(const DensityMatrix& rho) {
    return top_levels_from_diag(rho.space, rho.rho.diagonal());
}

std::vector<double> top_level_population(const PureState& psi) {
    return top_levels_from_diag(psi.space, psi.amps.cwiseAbs2().cast<Complex>());
}

namespace {

// Precomputed sparse form of the master-equation right-hand side:
//   rho_dot = A rho + rho B + sum_k c_k (o_k rho) p_k
// with A = -iH - K/2, B = +iH - K/2, K = sum rates o^dag o + sum c oo.
struct SparseRhs {
    SpMat a_left;
    SpMat b_right;
    struct Jump {
        SpMat o;
        SpMat p;  // o^dag for normal channels, o for anomalous
        Complex c;
    };
    std::vector<Jump> jumps;
    bool modulated = false;
    SpMat env, env_adj;
    double freq = 0.0;

    SparseRhs(const Operator& h, const std::optional<ModulatedTerm>& h_time,
              const DissipatorSpec& diss) {
        const long d = h.space.dim();
        Mat k_acc = Mat::Zero(d, d);
        for (const auto& ch : diss.channels) {
            if (ch.kind == DissipatorKind::Normal) {
                k_acc += ch.coeff * (ch.op.mat.adjoint() * ch.op.mat);
                jumps.push_back({to_sparse(ch.op.mat), to_sparse(ch.op.mat.adjoint()), ch.coeff});
            } else {
                k_acc += ch.coeff * (ch.op.mat * ch.op.mat);
                jumps.push_back({to_sparse(ch.op.mat), to_sparse(ch.op.mat), ch.coeff});
            }
        }
        a_left = to_sparse((-kI * h.mat - 0.5 * k_acc).eval());
        b_right = to_sparse((kI * h.mat - 0.5 * k_acc).eval());
        if (h_time) {
            modulated = true;
            env = to_sparse(h_time->envelope.mat);
            env_adj = to_sparse(h_time->envelope.mat.adjoint());
            freq = h_time->freq;
        }
    }

    Mat operator()(const Mat& rho, double t) const {
        Mat out = a_left * rho + rho * b_right;
        for (const auto& j : jumps) {
            out.noalias() += j.c * ((j.o * rho) * j.p);
        }
        if (modulated) {
            const Complex ph = std::exp(-kI * freq * t);
            out.noalias() += (-kI * ph) * (env * rho);
            out.noalias() += (-kI * std::conj(ph)) * (env_adj * rho);
            out.noalias() += (kI * ph) * (rho * env);
            out.noalias() += (kI * std::conj(ph)) * (rho * env_adj);
        }
        return out;
    }
};

struct LeakGuard {
    const CompositeSpace& space;
    double tol;

    void check(const DensityMatrix& rho, double t) const {
        const auto pops = top_level_population(rho);
        for (size_t k = 0; k < pops.size(); ++k) {
            if (pops[k] > tol) {
                std::ostringstream ss;
                ss << "top-two-level population of mode '" << space.slots[k].label
                   << "' is " << pops[k] << " > " << tol << " at t = " << t
                   << "; raise the " << space.slots[k].label << " truncation";
                throw TruncationLeak(ss.str());
            }
        }
    }
};

// One RK4 step with NaN-triggered halving (two half steps, recursively).
template <typename Rhs, typename StateT>
void rk4_step(const Rhs& rhs, StateT& y, double t, double h, int depth) {
    StateT k1 = rhs(y, t);
    StateT k2 = rhs((y + 0.5 * h * k1).eval(), t + 0.5 * h);
    StateT k3 = rhs((y + 0.5 * h * k2).eval(), t + 0.5 * h);
    StateT k4 = rhs((y + h * k3).eval(), t + h);
    StateT next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        if (depth >= 10) {
            throw StepRejected("NaN persisted after 10 step halvings at t = " +
                               std::to_string(t));
        }
        rk4_step(rhs, y, t, 0.5 * h, depth + 1);
        rk4_step(rhs, y, t + 0.5 * h, 0.5 * h, depth + 1);
        return;
    }
    y = std::move(next);
}

double base_step(const Operator& h_static, const std::optional<ModulatedTerm>& h_time,
                 const DissipatorSpec& diss, const StepperOpts& opts) {
    double scale = operator_norm_estimate(h_static);
    if (h_time) scale += 2.0 * operator_norm_estimate(h_time->envelope);
    for (const auto& ch : diss.channels) {
        const double on = operator_norm_estimate(ch.op);
        scale += 0.5 * std::abs(ch.coeff) * on * on;
    }
    double h = scale > 0.0 ? opts.safety / scale : 0.1;
    if (h_time && h_time->freq > 0.0) h = std::min(h, kPi / (20.0 * h_time->freq));
    if (opts.max_h > 0.0) h = std::min(h, opts.max_h);
    return h;
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const Operator& h_static,
                  const std::optional<ModulatedTerm>& h_time,
                  const DissipatorSpec& diss, const std::vector<double>& t_grid,
                  const StepperOpts& opts) {
    require_space(rho0.space, h_static.space, "evolve");
    diss.check(h_static.space);
    if (t_grid.empty()) throw IndexOutOfRange("evolve: empty time grid");
    for (size_t i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] <= t_grid[i - 1]) {
            throw IndexOutOfRange("evolve: t_grid must be strictly increasing");
        }
    }
    for (const auto& ob : opts.observables) require_space(ob.space, rho0.space, "evolve");

    const SparseRhs rhs(h_static, h_time, diss);
    const LeakGuard guard{h_static.space, opts.leak_tol};
    const double h = base_step(h_static, h_time, diss, opts);

    Trajectory traj;
    traj.observable_names = opts.observable_names;
    traj.step_size = h;

    Mat rho = rho0.rho;
    double t = 0.0;

    auto record = [&](double tp) {
        DensityMatrix snap(rho0.space, rho);
        guard.check(snap, tp);
        traj.times.push_back(tp);
        if (opts.record_states) traj.states.push_back(snap);
        std::vector<Complex> row;
        row.reserve(opts.observables.size());
        for (const auto& ob : opts.observables) {
            row.push_back((rho.transpose().cwiseProduct(ob.mat)).sum());
        }
        traj.observables.push_back(std::move(row));
    };

    if (t_grid.front() == 0.0) record(0.0);

    for (size_t gi = (t_grid.front() == 0.0 ? 1 : 0); gi < t_grid.size(); ++gi) {
        const double target = t_grid[gi];
        const double dt = target - t;
        const long n = std::max(1L, static_cast<long>(std::ceil(dt / h)));
        const double hs = dt / static_cast<double>(n);
        for (long s = 0; s < n; ++s) {
            rk4_step(rhs, rho, t + s * hs, hs, 0);
            const double tr = rho.trace().real();
            const double drift = std::abs(tr - 1.0);
            if (drift > traj.max_trace_drift) traj.max_trace_drift = drift;
            if (drift > opts.renorm_tol && tr != 0.0) {
                rho /= tr;
                ++traj.renorm_events;
            }
        }
        t = target;
        record(t);
    }
    return traj;
}

double spmat_norm_estimate(const SpMat& m, int iters) {
    const long d = m.rows();
    CVec v = CVec::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    double nrm = 0.0;
    for (int i = 0; i < iters; ++i) {
        CVec w = m * v;
        CVec u = m.adjoint() * w;
        const double un = u.norm();
        if (un == 0.0) return 0.0;
        nrm = std::sqrt(un);
        v = u / un;
    }
    return nrm;
}

PureTrajectory evolve_pure(const PureState& psi0, const Operator& h_static,
                           const std::vector<double>& t_grid, const StepperOpts& opts) {
    require_space(psi0.space, h_static.space, "evolve_pure");
    return evolve_pure_sparse(psi0, to_sparse(h_static.mat), t_grid, opts);
}

PureTrajectory evolve_pure_sparse(const PureState& psi0, const SpMat& hs,
                                  const std::vector<double>& t_grid,
                                  const StepperOpts& opts) {
    if (t_grid.empty()) throw IndexOutOfRange("evolve_pure: empty time grid");
    if (hs.rows() != psi0.amps.size()) throw SpaceMismatch("evolve_pure: H size mismatch");

    auto rhs = [&](const CVec& v, double) -> CVec { return -kI * (hs * v); };

    const StepperOpts& o = opts;
    const double scale = spmat_norm_estimate(hs);
    double h = scale > 0.0 ? o.safety / scale : 0.1;
    if (o.max_h > 0.0) h = std::min(h, o.max_h);

    PureTrajectory traj;
    traj.step_size = h;
    CVec psi = psi0.amps;
    double t = 0.0;

    auto record = [&](double tp) {
        PureState snap(psi0.space, psi);
        const auto pops = top_level_population(snap);
        for (size_t k = 0; k < pops.size(); ++k) {
            if (pops[k] > o.leak_tol) {
                throw TruncationLeak("evolve_pure: mode '" + psi0.space.slots[k].label +
                                     "' top-level population " + std::to_string(pops[k]));
            }
        }
        traj.times.push_back(tp);
        traj.states.push_back(std::move(snap));
    };

    if (t_grid.front() == 0.0) record(0.0);
    for (size_t gi = (t_grid.front() == 0.0 ? 1 : 0); gi < t_grid.size(); ++gi) {
        const double dt = t_grid[gi] - t;
        const long n = std::max(1L, static_cast<long>(std::ceil(dt / h)));
        const double hstep = dt / static_cast<double>(n);
        for (long s = 0; s < n; ++s) {
            rk4_step(rhs, psi, t + s * hstep, hstep, 0);
            const double nn = psi.norm();
            if (std::abs(nn - 1.0) > 1e-10 && nn > 0.0) psi /= nn;
        }
        t = t_grid[gi];
        record(t);
    }
    return traj;
}

SpMat sparse_h_oms(const SystemParams& p, const DerivedParams& d, int cavity_dim,
                   int mech_dim, const HamiltonianOpts& opts) {
    const long dim = static_cast<long>(cavity_dim) * mech_dim;
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(4 * dim);
    auto idx = [&](int ic, int im) { return static_cast<long>(ic) * mech_dim + im; };
    for (int ic = 0; ic < cavity_dim; ++ic) {
        for (int im = 0; im < mech_dim; ++im) {
            double diag = d.omega_m_tilde * im;
            if (opts.include_cavity_free) diag += p.delta_c * ic;
            if (diag != 0.0) trip.emplace_back(idx(ic, im), idx(ic, im), Complex(diag));
            if (im + 1 < mech_dim) {
                const double v = -d.g_tilde * ic * std::sqrt(im + 1.0);
                if (v != 0.0) {
                    trip.emplace_back(idx(ic, im + 1), idx(ic, im), Complex(v));
                    trip.emplace_back(idx(ic, im), idx(ic, im + 1), Complex(v));
                }
            }
            if (p.eps_p != 0.0 && ic + 1 < cavity_dim) {
                const double v = p.eps_p * std::sqrt(ic + 1.0);
                trip.emplace_back(idx(ic + 1, im), idx(ic, im), Complex(v));
                trip.emplace_back(idx(ic, im), idx(ic + 1, im), Complex(v));
            }
        }
    }
    SpMat h(dim, dim);
    h.setFromTriplets(trip.begin(), trip.end());
    h.makeCompressed();
    return h;
}

DensityMatrix steady_state(const Operator& h_static, const DissipatorSpec& diss,
                           const SteadyStateOpts& opts) {
    const long d = h_static.space.dim();
    if (d > opts.max_dim) {
        throw DimensionTooLarge("steady_state: dim " + std::to_string(d) +
                                " exceeds guard " + std::to_string(opts.max_dim));
    }
    const SpMat lmat = liouvillian_sparse(h_static, diss, opts.max_dim);

    // Replace row 0 by the trace constraint vec(I)^dag vec(rho) = 1.
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(lmat.nonZeros() + d);
    for (int k = 0; k < lmat.outerSize(); ++k) {
        for (SpMat::InnerIterator it(lmat, k); it; ++it) {
            if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (long i = 0; i < d; ++i) trip.emplace_back(0, i * d + i, Complex(1.0));
    SpMat sys(d * d, d * d);
    sys.setFromTriplets(trip.begin(), trip.end());
    sys.makeCompressed();

    CVec rhs = CVec::Zero(d * d);
    rhs(0) = 1.0;

    Eigen::SparseLU<SpMat> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) {
        throw SingularSystem("steady_state: LU factorization failed "
                             "(degenerate steady manifold?)");
    }
    CVec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw SingularSystem("steady_state: solve failed");
    }

    // Residual against the unmodified Liouvillian.
    const double resid = (lmat * x).norm();
    const double lscale = lmat.coeffs().abs().maxCoeff();
    if (resid > opts.residual_tol * std::max(1.0, lscale)) {
        std::ostringstream ss;
        ss << "steady_state: |L vec(rho)| = " << resid << " too large";
        throw SingularSystem(ss.str());
    }

    Mat rho = Eigen::Map<Mat>(x.data(), d, d);
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    rho /= rho.trace().real();
    DensityMatrix out(h_static.space, std::move(rho));
    out.validate(1e-9, 1e-8, opts.pos_tol);
    return out;
}

}  // namespace optomech

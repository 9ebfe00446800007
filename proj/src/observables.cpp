#include "optomech/observables.hpp"

#include <cmath>
#include <sstream>
#include <algorithm>
#include <atomic>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

namespace optomech {

namespace {

const TruncatedSpace& resolve_slot(const CompositeSpace& space, std::string& slot) {
    if (space.slots.size() == 1) {
        slot = space.slots[0].label;
        return space.slots[0];
    }
    return space.slots[space.slot_index(slot)];
}

}  // namespace

G2Ingredients g2_operators(const CompositeSpace& space, const std::string& slot) {
    std::string s = slot;
    const TruncatedSpace& ts = resolve_slot(space, s);
    const Operator a = embed(destroy(ts), s, space);
    const Operator ad = a.adjoint();
    return {ad * a, ad * ad * a * a};
}

double g2_from_moments(Complex n_expect, Complex n2_expect, double floor) {
    const double n = n_expect.real();
    if (n <= floor) {
        std::ostringstream ss;
        ss << "g2(0) undefined: <a^dag a> = " << n << " <= floor " << floor;
        throw VacuumDivergence(ss.str());
    }
    return n2_expect.real() / (n * n);
}

double g2_zero(const DensityMatrix& rho, double floor, const std::string& slot) {
    const auto ops = g2_operators(rho.space, slot);
    return g2_from_moments(expectation(rho, ops.n), expectation(rho, ops.n2), floor);
}

double WignerGrid::negative_volume() const {
    const double dx = x_axis.size() > 1 ? x_axis(1) - x_axis(0) : 1.0;
    const double dy = y_axis.size() > 1 ? y_axis(1) - y_axis(0) : 1.0;
    double acc = 0.0;
    for (int iy = 0; iy < values.rows(); ++iy) {
        const double wy = (iy == 0 || iy == values.rows() - 1) ? 0.5 : 1.0;
        for (int ix = 0; ix < values.cols(); ++ix) {
            const double wx = (ix == 0 || ix == values.cols() - 1) ? 0.5 : 1.0;
            const double v = values(iy, ix);
            if (v < 0.0) acc += wy * wx * v;
        }
    }
    return acc * dx * dy;
}

double WignerGrid::integral() const {
    const double dx = x_axis.size() > 1 ? x_axis(1) - x_axis(0) : 1.0;
    const double dy = y_axis.size() > 1 ? y_axis(1) - y_axis(0) : 1.0;
    double acc = 0.0;
    for (int iy = 0; iy < values.rows(); ++iy) {
        const double wy = (iy == 0 || iy == values.rows() - 1) ? 0.5 : 1.0;
        for (int ix = 0; ix < values.cols(); ++ix) {
            const double wx = (ix == 0 || ix == values.cols() - 1) ? 0.5 : 1.0;
            acc += wy * wx * values(iy, ix);
        }
    }
    return acc * dx * dy;
}

WignerGrid wigner(const DensityMatrix& rho_cav, const WignerGridSpec& spec) {
    if (rho_cav.space.slots.size() != 1) {
        throw SpaceMismatch("wigner: reduce to a single mode with partial_trace first");
    }
    if (spec.nx < 2 || spec.ny < 2) throw IndexOutOfRange("wigner: grid needs >= 2 points");

    const double mx = std::max(std::abs(spec.x_min), std::abs(spec.x_max));
    const double my = std::max(std::abs(spec.y_min), std::abs(spec.y_max));
    const double m = std::hypot(mx, my);

    const int d0 = static_cast<int>(rho_cav.space.dim());
    int pad = spec.pad_dim > 0
                  ? spec.pad_dim
                  : std::max(d0, static_cast<int>(std::ceil(m * m + 6.5 * m)) + 8);
    // The displaced vacuum at the grid corner must fit into the padded space.
    {
        double leak = 0.0;
        try {
            coherent_state(TruncatedSpace(pad, "pad"), Complex(m, 0.0), &leak);
        } catch (const TruncationTooSmall&) {
            std::ostringstream ss;
            ss << "wigner: pad dim " << pad << " leaks " << leak
               << " at |alpha| = " << m;
            throw PadTooSmall(ss.str());
        }
    }

    Mat rho_pad = Mat::Zero(pad, pad);
    rho_pad.topLeftCorner(d0, d0) = rho_cav.rho;

    Eigen::VectorXd parity(pad);
    for (int n = 0; n < pad; ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;

    WignerGrid grid;
    grid.x_axis = Eigen::VectorXd::LinSpaced(spec.nx, spec.x_min, spec.x_max);
    grid.y_axis = Eigen::VectorXd::LinSpaced(spec.ny, spec.y_min, spec.y_max);
    grid.values.resize(spec.ny, spec.nx);

    std::atomic<bool> bad_imag{false};

    auto eval_column = [&](int ix) {
        Mat gen = Mat::Zero(pad, pad);
        for (int iy = 0; iy < spec.ny; ++iy) {
            const Complex alpha(grid.x_axis(ix), grid.y_axis(iy));
            for (int n = 0; n + 1 < pad; ++n) {
                gen(n + 1, n) = alpha * std::sqrt(n + 1.0);
                gen(n, n + 1) = -std::conj(alpha) * std::sqrt(n + 1.0);
            }
            const Mat disp = gen.exp();
            const CVec diag = (disp.adjoint() * (rho_pad * disp)).diagonal();
            Complex w{0.0, 0.0};
            for (int n = 0; n < pad; ++n) w += parity(n) * diag(n);
            w /= kPi;
            if (std::abs(w.imag()) > 1e-9) bad_imag = true;
            grid.values(iy, ix) = w.real();
        }
    };

    int nthreads = spec.threads > 0 ? spec.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = std::min(nthreads, spec.nx);
    if (nthreads == 1) {
        for (int ix = 0; ix < spec.nx; ++ix) eval_column(ix);
    } else {
        // Columns are disjoint, so assembly order never affects the result.
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int tth = 0; tth < nthreads; ++tth) {
            pool.emplace_back([&]() {
                for (int ix = next.fetch_add(1); ix < spec.nx; ix = next.fetch_add(1)) {
                    eval_column(ix);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    if (bad_imag) throw NonFinite("wigner: imaginary residue exceeded 1e-9");
    return grid;
}

double state_fidelity(const DensityMatrix& rho, const PureState& psi) {
    if (rho.space != psi.space) throw SpaceMismatch("state_fidelity: space mismatch");
    const Complex f = psi.amps.dot(rho.rho * psi.amps);
    const double fr = f.real();
    if (fr < -1e-10 || fr > 1.0 + 1e-8) {
        throw NonFinite("state_fidelity: value " + std::to_string(fr) + " outside [0,1]");
    }
    return std::clamp(fr, 0.0, 1.0);
}

PureState kerr_cat_reference(Complex alpha, double k_ratio, const TruncatedSpace& cavity) {
    PureState base = coherent_state(cavity, alpha);  // carries the truncation guard
    CVec v = base.amps;
    const double two_pi_k2 = 2.0 * kPi * k_ratio * k_ratio;
    for (int n = 0; n < cavity.dim; ++n) {
        v(n) *= std::exp(kI * (two_pi_k2 * static_cast<double>(n) * static_cast<double>(n)));
    }
    return PureState(base.space, std::move(v));
}

}  // namespace optomech

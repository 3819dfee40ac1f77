#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bohm/wavefunction.hpp"

namespace bohm {

// ---------------------------------------------------------------------------
// Probability flow snapshots.

struct Flow1D {
    std::vector<double> rho;
    std::vector<double> j;
    double peak = 0.0;  // max rho, for the relative node floor
};

inline Flow1D flow_1d(const WaveFunction1D& psi) {
    Flow1D f;
    density_and_current(psi, f.rho, f.j);
    for (double r : f.rho) f.peak = std::max(f.peak, r);
    return f;
}

// Spinor guidance: v = sum_s Im(psi_s* dpsi_s) / sum_s |psi_s|^2.
inline Flow1D flow_spinor(const SpinorWaveFunction1D& psi) {
    Flow1D f;
    const std::size_t n = psi.grid.n;
    f.rho.assign(n, 0.0);
    f.j.assign(n, 0.0);
    const auto du = spectral_derivative(psi.grid, psi.up);
    const auto dd = spectral_derivative(psi.grid, psi.down);
    for (std::size_t i = 0; i < n; ++i) {
        f.rho[i] = std::norm(psi.up[i]) + std::norm(psi.down[i]);
        f.j[i] = std::imag(std::conj(psi.up[i]) * du[i]) + std::imag(std::conj(psi.down[i]) * dd[i]);
        f.peak = std::max(f.peak, f.rho[i]);
    }
    return f;
}

// rho, jx, jq on the composite grid (row-major [ix * nq + iq]). jq is filled
// only when with_q is set (pointer kinetic term active).
struct Flow2D {
    std::size_t nx = 0, nq = 0;
    std::vector<double> rho;
    std::vector<double> jx;
    std::vector<double> jq;
    double peak = 0.0;
};

inline Flow2D flow_2d(const WaveFunction2D& Psi, bool with_q) {
    Flow2D f;
    f.nx = Psi.grid_x.n;
    f.nq = Psi.grid_q.n;
    const std::size_t total = f.nx * f.nq;
    f.rho.resize(total);
    f.jx.resize(total);
    if (with_q) f.jq.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        f.rho[i] = std::norm(Psi.amp[i]);
        f.peak = std::max(f.peak, f.rho[i]);
    }
    // d/dx along columns.
    {
        std::vector<cplx> d(Psi.amp);
        fft_cols(d, f.nx, f.nq);
        for (std::size_t ix = 0; ix < f.nx; ++ix) {
            const cplx ik{0.0, (ix == f.nx / 2) ? 0.0 : Psi.grid_x.k(ix)};
            for (std::size_t iq = 0; iq < f.nq; ++iq) d[ix * f.nq + iq] *= ik;
        }
        ifft_cols(d, f.nx, f.nq);
        for (std::size_t i = 0; i < total; ++i) f.jx[i] = std::imag(std::conj(Psi.amp[i]) * d[i]);
    }
    if (with_q) {
        std::vector<cplx> d(Psi.amp);
        fft_rows(d, f.nx, f.nq);
        for (std::size_t ix = 0; ix < f.nx; ++ix)
            for (std::size_t iq = 0; iq < f.nq; ++iq) {
                const cplx ik{0.0, (iq == f.nq / 2) ? 0.0 : Psi.grid_q.k(iq)};
                d[ix * f.nq + iq] *= ik;
            }
        ifft_rows(d, f.nx, f.nq);
        for (std::size_t i = 0; i < total; ++i) f.jq[i] = std::imag(std::conj(Psi.amp[i]) * d[i]);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Interpolation: cubic (Catmull-Rom) along x, linear along q and t. Cubic in
// the fringe direction matches the integrator accuracy; the pointer axis is
// smooth so linear is enough there.

namespace interp_detail {

inline double catmull(double fm1, double f0, double f1, double f2, double u) {
    const double a = -0.5 * fm1 + 1.5 * f0 - 1.5 * f1 + 0.5 * f2;
    const double b = fm1 - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
    const double c = -0.5 * fm1 + 0.5 * f1;
    return ((a * u + b) * u + c) * u + f0;
}

inline std::size_t clamp_idx(long i, std::size_t n) {
    if (i < 0) return 0;
    if (i >= static_cast<long>(n)) return n - 1;
    return static_cast<std::size_t>(i);
}

}  // namespace interp_detail

inline double interp_cubic(const Grid1D& g, const std::vector<double>& f, double x) {
    const double u = (x - g.x_min) / g.dx();
    const long i0 = static_cast<long>(std::floor(u));
    const double frac = u - static_cast<double>(i0);
    using interp_detail::clamp_idx;
    return interp_detail::catmull(f[clamp_idx(i0 - 1, g.n)], f[clamp_idx(i0, g.n)],
                                  f[clamp_idx(i0 + 1, g.n)], f[clamp_idx(i0 + 2, g.n)], frac);
}

// Cubic in x, linear in q on a row-major field.
inline double interp_xq(const Grid1D& gx, const Grid1D& gq, const std::vector<double>& f, double x,
                        double q) {
    using interp_detail::clamp_idx;
    const std::size_t nq = gq.n;
    const double ux = (x - gx.x_min) / gx.dx();
    const long ix0 = static_cast<long>(std::floor(ux));
    const double fx = ux - static_cast<double>(ix0);
    const double uq = (q - gq.x_min) / gq.dx();
    const long iq0 = static_cast<long>(std::floor(uq));
    const double fq = std::clamp(uq - static_cast<double>(iq0), 0.0, 1.0);
    const std::size_t qa = clamp_idx(iq0, nq), qb = clamp_idx(iq0 + 1, nq);
    double col[4];
    for (int m = -1; m <= 2; ++m) {
        const std::size_t ix = clamp_idx(ix0 + m, gx.n);
        col[m + 1] = (1.0 - fq) * f[ix * nq + qa] + fq * f[ix * nq + qb];
    }
    return interp_detail::catmull(col[0], col[1], col[2], col[3], fx);
}

// ---------------------------------------------------------------------------
// Trajectories.

struct Trajectory {
    std::vector<double> times;
    std::vector<double> x;
    std::vector<double> q;  // empty for 1D trajectories
    bool has_q() const { return !q.empty(); }
};

struct NodeReport {
    bool hit = false;
    double t = 0.0;
    double x = 0.0;
    double q = 0.0;
};

struct IntegratorOptions {
    // Adaptive substep: h = cfl * length_scale / (|v| + 0.1 * v_ref). The
    // length scale should resolve the finest density feature (half fringe of
    // counter-propagating packets: pi / v_packet); v_ref guards v ~ 0.
    double cfl = 0.05;
    double length_scale = 0.1;
    double v_ref = 1.0;
    double rho_floor_rel = 1e-12;
    // halt_on_node: stop and report (single-trajectory contract). Otherwise
    // density is clamped at the floor (ensemble mode) and min rho is tracked.
    bool halt_on_node = true;
};

namespace guide_detail {

// One adaptive RK4 advance over [t0, t1] through a velocity callback
// v(t, x, q, out[2]) -> false near a node. Returns false if halted.
template <typename VelFn>
bool advance_point(double t0, double t1, double& x, double& q, bool has_q, const VelFn& vel,
                   const IntegratorOptions& opt, NodeReport* report) {
    double t = t0;
    double v[2], k1[2], k2[2], k3[2], k4[2];
    while (t < t1 - 1e-15) {
        if (!vel(t, x, q, v)) {
            if (report) *report = {true, t, x, q};
            return false;
        }
        const double speed = std::abs(v[0]) + (has_q ? std::abs(v[1]) : 0.0);
        double h = opt.cfl * opt.length_scale / (speed + 0.1 * opt.v_ref);
        h = std::min(h, t1 - t);
        k1[0] = v[0];
        k1[1] = v[1];
        double xm = x + 0.5 * h * k1[0], qm = q + 0.5 * h * k1[1];
        if (!vel(t + 0.5 * h, xm, qm, k2)) {
            if (report) *report = {true, t, xm, qm};
            return false;
        }
        xm = x + 0.5 * h * k2[0];
        qm = q + 0.5 * h * k2[1];
        if (!vel(t + 0.5 * h, xm, qm, k3)) {
            if (report) *report = {true, t, xm, qm};
            return false;
        }
        xm = x + h * k3[0];
        qm = q + h * k3[1];
        if (!vel(t + h, xm, qm, k4)) {
            if (report) *report = {true, t, xm, qm};
            return false;
        }
        x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        if (has_q) q += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        t += h;
    }
    return true;
}

}  // namespace guide_detail

// ---------------------------------------------------------------------------
// 1D snapshot series and its integrator.

struct FieldSeries1D {
    Grid1D grid;
    std::vector<double> times;
    std::vector<Flow1D> frames;

    void push(double t, Flow1D f) {
        times.push_back(t);
        frames.push_back(std::move(f));
    }
};

// Velocity at (t, x) by linear interpolation of rho and j between the two
// bracketing frames (interpolating the flow, not the velocity, keeps v exact
// where j is fringe-free but rho is not).
inline bool sample_velocity_1d(const FieldSeries1D& s, double t, double x, double& v_out,
                               double rho_floor_rel, bool clamp_floor) {
    const auto& ts = s.times;
    std::size_t hi = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
    if (hi == 0) hi = 1;
    if (hi >= ts.size()) hi = ts.size() - 1;
    const std::size_t lo = hi - 1;
    const double w = (ts[hi] > ts[lo]) ? std::clamp((t - ts[lo]) / (ts[hi] - ts[lo]), 0.0, 1.0) : 0.0;
    const double rho = (1.0 - w) * interp_cubic(s.grid, s.frames[lo].rho, x) +
                       w * interp_cubic(s.grid, s.frames[hi].rho, x);
    const double j = (1.0 - w) * interp_cubic(s.grid, s.frames[lo].j, x) +
                     w * interp_cubic(s.grid, s.frames[hi].j, x);
    const double floor_abs = rho_floor_rel * std::max(s.frames[lo].peak, s.frames[hi].peak);
    if (rho < floor_abs && !clamp_floor) return false;
    v_out = j / std::max(rho, floor_abs);
    return true;
}

// Integrate one trajectory through a stored 1D series; output sampled at
// dt_out. Halts with a node report per options.
inline Trajectory integrate_trajectory(const FieldSeries1D& s, double x0, double dt_out,
                                       const IntegratorOptions& opt, NodeReport* report = nullptr) {
    if (s.times.size() < 2) throw ValidationError("integrate_trajectory: need >= 2 snapshots");
    {
        double v0;
        if (!sample_velocity_1d(s, s.times.front(), x0, v0, opt.rho_floor_rel, false))
            throw ValidationError("integrate_trajectory: start below density floor");
    }
    Trajectory tr;
    double x = x0;
    double t = s.times.front();
    const double t_end = s.times.back();
    tr.times.push_back(t);
    tr.x.push_back(x);
    auto vel = [&](double tt, double xx, double, double* out) {
        out[1] = 0.0;
        return sample_velocity_1d(s, tt, xx, out[0], opt.rho_floor_rel, !opt.halt_on_node);
    };
    while (t < t_end - 1e-12) {
        const double t_next = std::min(t + dt_out, t_end);
        double qdummy = 0.0;
        if (!guide_detail::advance_point(t, t_next, x, qdummy, false, vel, opt, report)) break;
        t = t_next;
        tr.times.push_back(t);
        tr.x.push_back(x);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Windowed 2D ensemble advance: move all points from t0 to t1 using the flow
// frames at the window ends (linear in t). Used by the streaming scenario
// runner so only two frames are ever held.

struct EnsembleState {
    std::vector<double> x;
    std::vector<double> q;
    std::vector<std::uint8_t> halted;
    double min_rho_rel = 1e300;  // smallest relative density any point visited
    std::vector<double> min_rho_pt;  // per-point minimum, tracked when sized
};

// extra_vq(t, x): additive pointer velocity from couplings that are linear in
// the pointer momentum (velocity = coupling rate inside the region); such a
// term is not part of the kinetic flow jq / rho.
inline void advance_window_2d(const Grid1D& gx, const Grid1D& gq, const Flow2D& f0,
                              const Flow2D& f1, double t0, double t1, EnsembleState& ens,
                              const IntegratorOptions& opt,
                              const std::function<double(double, double)>& extra_vq = nullptr) {
    const double peak = std::max(f0.peak, f1.peak);
    const double floor_abs = opt.rho_floor_rel * peak;
    const bool has_q = !f0.jq.empty();
    for (std::size_t p = 0; p < ens.x.size(); ++p) {
        if (ens.halted[p]) continue;
        // A point that left the grid rides extrapolated (clamped) fields;
        // freeze it where it is instead of letting it wander.
        if (ens.x[p] < gx.x_min || ens.x[p] > gx.x_max) {
            ens.halted[p] = 1;
            continue;
        }
        auto vel = [&](double tt, double xx, double qq, double* out) {
            const double w = std::clamp((tt - t0) / (t1 - t0), 0.0, 1.0);
            const double rho = (1.0 - w) * interp_xq(gx, gq, f0.rho, xx, qq) +
                               w * interp_xq(gx, gq, f1.rho, xx, qq);
            const double jx = (1.0 - w) * interp_xq(gx, gq, f0.jx, xx, qq) +
                              w * interp_xq(gx, gq, f1.jx, xx, qq);
            ens.min_rho_rel = std::min(ens.min_rho_rel, rho / peak);
            if (!ens.min_rho_pt.empty())
                ens.min_rho_pt[p] = std::min(ens.min_rho_pt[p], rho / peak);
            if (rho < floor_abs && opt.halt_on_node) return false;
            const double denom = std::max(rho, floor_abs);
            out[0] = jx / denom;
            out[1] = 0.0;
            if (has_q) {
                const double jq = (1.0 - w) * interp_xq(gx, gq, f0.jq, xx, qq) +
                                  w * interp_xq(gx, gq, f1.jq, xx, qq);
                out[1] = jq / denom;
            }
            if (extra_vq) out[1] += extra_vq(tt, xx);
            return true;
        };
        NodeReport rep;
        if (!guide_detail::advance_point(t0, t1, ens.x[p], ens.q[p], true, vel, opt, &rep))
            ens.halted[p] = 1;
    }
}

// ---------------------------------------------------------------------------
// Ensemble sampling.

struct EnsembleSpec {
    std::size_t n_samples = 1;
    std::uint64_t seed = 1;
    enum class Mode { born, uniform_support } mode = Mode::born;
};

// Inverse-CDF samples from a gridded density (piecewise-linear CDF over
// cells). Deterministic for a given seed.
inline std::vector<double> sample_from_density(const Grid1D& g, const std::vector<double>& rho,
                                               const EnsembleSpec& spec) {
    std::vector<double> cdf(g.n + 1, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) cdf[i + 1] = cdf[i] + std::max(rho[i], 0.0);
    const double total = cdf.back();
    if (!(total > 0.0)) throw ValidationError("sample_from_density: zero density");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> out(spec.n_samples);
    for (std::size_t s = 0; s < spec.n_samples; ++s) {
        const double target = uni(rng) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t i = std::max<std::size_t>(1, it - cdf.begin()) - 1;
        if (i >= g.n) i = g.n - 1;
        const double seg = cdf[i + 1] - cdf[i];
        const double frac = (seg > 0.0) ? (target - cdf[i]) / seg : 0.5;
        out[s] = g.x(i) + frac * g.dx();
    }
    return out;
}

inline std::vector<double> sample_uniform(double a, double b, const EnsembleSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uni(a, b);
    std::vector<double> out(spec.n_samples);
    for (auto& v : out) v = uni(rng);
    return out;
}

inline std::vector<double> sample_initial(const WaveFunction1D& psi, const EnsembleSpec& spec) {
    if (spec.mode == EnsembleSpec::Mode::born) return sample_from_density(psi.grid, psi.density(), spec);
    // uniform over the support (cells above 1e-10 of peak)
    const auto rho = psi.density();
    double peak = 0.0;
    for (double r : rho) peak = std::max(peak, r);
    std::vector<double> ind(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) ind[i] = rho[i] > 1e-10 * peak ? 1.0 : 0.0;
    return sample_from_density(psi.grid, ind, spec);
}

// ---------------------------------------------------------------------------
// Property-check helpers.

// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF callback.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = cdf(samples[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(c - static_cast<double>(i + 1) / n));
    }
    return d;
}

// True when the relative order of every pair is preserved between the two
// position snapshots (1D non-crossing).
inline bool ordering_preserved(const std::vector<double>& before, const std::vector<double>& after) {
    std::vector<std::size_t> idx(before.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return before[a] < before[b]; });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (after[idx[i]] < after[idx[i - 1]] - 1e-9) return false;
    return true;
}

}  // namespace bohm

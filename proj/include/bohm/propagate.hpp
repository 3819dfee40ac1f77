#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bohm/packets.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

// Time profile of the coupling strength g(t).
struct GProfile {
    enum class Shape { square, smooth_adiabatic };
    Shape shape = Shape::square;
    // square: constant on [t_on, t_off], zero outside.
    double t_on = 0.0;
    double t_off = 1.0;
    // smooth_adiabatic: integrates to 1 over [0, T]; raised-cosine ramps of
    // length `ramp` at both ends, flat plateau between.
    double T = 1.0;
    double ramp = 0.1;

    // Instantaneous rate multiplying the coupling strength; the caller scales
    // by CouplingSpec::strength so that the time integral equals strength.
    double rate(double t) const {
        if (shape == Shape::square) {
            if (t < t_on || t >= t_off) return 0.0;
            return 1.0 / (t_off - t_on);
        }
        if (t < 0.0 || t > T) return 0.0;
        // Plateau height so that ramps (each contributing ramp/2) plus
        // plateau integrate to 1.
        const double h = 1.0 / (T - ramp);
        if (t < ramp) return h * 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
        if (t > T - ramp) return h * 0.5 * (1.0 - std::cos(std::numbers::pi * (T - t) / ramp));
        return h;
    }

    double start() const { return shape == Shape::square ? t_on : 0.0; }
    double stop() const { return shape == Shape::square ? t_off : T; }
};

// Measurement interaction acting on the composite (x, q) state inside the
// spatial window region = [a, b]:
//   position_shift: H = g(t) * P * indicator_V(x)   (P conjugate to q)
//   momentum_kick:  H = g(t) * Q * indicator_V(x)
// strength = total impulse, i.e. integral of g over the pulse.
struct CouplingSpec {
    enum class Kind { position_shift, momentum_kick };
    Kind kind = Kind::position_shift;
    double region_a = 0.0;
    double region_b = 1.0;
    // Edge smoothing width of the spatial indicator. A sharp step radiates
    // grid-scale momentum components that wrap the periodic box; a few cells
    // of raised-cosine ramp band-limits them. 0 = auto (4 dx).
    double region_smoothing = 0.0;
    GProfile profile;
    double strength = 1.0;
};

struct Hamiltonian2DConfig {
    bool kinetic_x = true;
    bool kinetic_q = false;
    std::optional<std::vector<double>> potential_x;  // sampled on grid_x
    std::optional<CouplingSpec> coupling;
    // Dirichlet (hard-wall) boundary on the x axis instead of periodic; used
    // for box eigenstates. Realized by odd extension onto a doubled grid.
    bool dirichlet_x = false;
};

namespace prop_detail {

// Max |density| appearing within `pad` points of either boundary; the
// boundary-leakage guard.
inline double edge_density(const std::vector<double>& rho, std::size_t pad) {
    double m = 0.0;
    for (std::size_t i = 0; i < pad && i < rho.size(); ++i) {
        m = std::max(m, rho[i]);
        m = std::max(m, rho[rho.size() - 1 - i]);
    }
    return m;
}

// Kinetic phase applied on an odd extension of length 2n, which enforces
// psi = 0 at x_min and x_max exactly (hard walls).
inline void kinetic_dirichlet(std::vector<cplx>& a, const Grid1D& g, double dt) {
    const std::size_t n = g.n;
    const std::size_t n2 = 2 * n;
    std::vector<cplx> ext(n2);
    ext[0] = cplx{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) ext[i] = a[i];
    // Odd mirror: ext[2n - i] = -ext[i]; index n is the far wall (zero).
    ext[n] = cplx{0.0, 0.0};
    for (std::size_t i = 1; i < n; ++i) ext[n2 - i] = -a[i];
    fft_inplace(ext);
    const double dk = 2.0 * std::numbers::pi / (2.0 * g.length());
    for (std::size_t i = 0; i < n2; ++i) {
        const double idx = (i < n) ? static_cast<double>(i)
                                   : static_cast<double>(i) - static_cast<double>(n2);
        const double k = dk * idx;
        ext[i] *= std::polar(1.0, -0.5 * k * k * dt);
    }
    ifft_inplace(ext);
    for (std::size_t i = 0; i < n; ++i) a[i] = ext[i];
}

}  // namespace prop_detail

// Free/potential 1D split-step evolution (Strang). potential may be empty.
// Guards: norm drift and boundary leakage.
inline WaveFunction1D evolve_1d(const WaveFunction1D& psi0, const std::vector<double>* potential,
                                double t, double dt, bool dirichlet = false) {
    if (dt <= 0.0 || t < 0.0) throw ValidationError("evolve_1d: need dt > 0, t >= 0");
    WaveFunction1D psi = psi0;
    const Grid1D& g = psi.grid;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
    const double h = (steps > 0) ? t / static_cast<double>(steps) : 0.0;
    const double norm0 = psi.norm2();

    auto kinetic = [&](double tau) {
        if (dirichlet) {
            prop_detail::kinetic_dirichlet(psi.amp, g, tau);
            return;
        }
        fft_inplace(psi.amp);
        for (std::size_t i = 0; i < g.n; ++i) {
            const double k = g.k(i);
            psi.amp[i] *= std::polar(1.0, -0.5 * k * k * tau);
        }
        ifft_inplace(psi.amp);
    };

    for (std::size_t s = 0; s < steps; ++s) {
        kinetic(0.5 * h);
        if (potential && !potential->empty()) {
            for (std::size_t i = 0; i < g.n; ++i)
                psi.amp[i] *= std::polar(1.0, -(*potential)[i] * h);
        }
        kinetic(0.5 * h);
    }

    if (!dirichlet) {
        const auto rho = psi.density();
        if (prop_detail::edge_density(rho, 2) > 1e-8)
            throw NumericalGuardError("domain too small: boundary density above 1e-8 at t=" +
                                      std::to_string(t));
    }
    if (std::abs(psi.norm2() - norm0) > 1e-8)
        throw NumericalGuardError("evolve_1d: norm drift above 1e-8");
    return psi;
}

// One Strang step of the 2D composite dynamics, in place. Wall-clock layout:
//   amp[ix * nq + iq]; kinetic_q and couplings act along rows, kinetic_x along
//   columns. All factors are diagonal in their own representation, so each is
//   applied exactly.
class Evolver2D {
  public:
    Evolver2D(const Grid1D& gx, const Grid1D& gq, Hamiltonian2DConfig cfg)
        : gx_(gx), gq_(gq), cfg_(std::move(cfg)) {
        if (!cfg_.kinetic_x && !cfg_.kinetic_q && !cfg_.potential_x && !cfg_.coupling)
            throw ValidationError("evolve_2d: no Hamiltonian term active");
        if (cfg_.coupling) {
            const auto& c = *cfg_.coupling;
            if (c.region_a >= c.region_b || c.region_a < gx.x_min || c.region_b > gx.x_max)
                throw ValidationError("coupling: region must be a nonempty interval inside grid_x");
            const double s = c.region_smoothing > 0.0 ? c.region_smoothing : 4.0 * gx.dx();
            if (c.region_smoothing > 0.0 && c.region_smoothing < 2.0 * gx.dx())
                throw ValidationError("coupling: region smoothing under two grid cells");
            vmask_.resize(gx.n);
            row0_ = gx.n;
            for (std::size_t i = 0; i < gx.n; ++i) {
                const double x = gx.x(i);
                vmask_[i] = packet_detail::smoothed_box(x, c.region_a, c.region_b, s);
                if (vmask_[i] != 0.0) {
                    row0_ = std::min(row0_, i);
                    row1_ = i;
                }
            }
            if (row0_ == gx.n) throw ValidationError("coupling: region contains no grid point");
        }
    }

    // Advance from t to t + dt (one symmetric split step). When the diagonal
    // factor is inert over the step the two kinetic halves fuse into one
    // exact full-step factor.
    void step(WaveFunction2D& Psi, double t, double dt) const {
        if (diagonal_inert(t, dt)) {
            apply_kinetic(Psi, dt);
            return;
        }
        apply_kinetic(Psi, 0.5 * dt);
        apply_diagonal(Psi, t, dt);
        apply_kinetic(Psi, 0.5 * dt);
    }

    // Exact advance over a span where the diagonal factor stays inert.
    void advance_inert(WaveFunction2D& Psi, double tau) const { apply_kinetic(Psi, tau); }

    // True when e^{-i V dt} is the identity for this step: kinetic factors
    // are exactly diagonal in momentum, so any run of such steps may be fused.
    bool diagonal_inert(double t, double dt) const {
        if (cfg_.potential_x) return false;
        if (!cfg_.coupling) return true;
        const auto& c = *cfg_.coupling;
        return c.strength * c.profile.rate(t + 0.5 * dt) * dt == 0.0;
    }

    const std::vector<double>& region_mask() const { return vmask_; }

  private:
    void apply_kinetic(WaveFunction2D& Psi, double tau) const {
        if (tau == 0.0) return;
        if (cfg_.kinetic_x) {
            if (cfg_.dirichlet_x) {
                // Column-wise odd extension; reuse the 1D helper via scratch.
                std::vector<cplx> col(gx_.n);
                for (std::size_t iq = 0; iq < gq_.n; ++iq) {
                    for (std::size_t ix = 0; ix < gx_.n; ++ix) col[ix] = Psi.at(ix, iq);
                    prop_detail::kinetic_dirichlet(col, gx_, tau);
                    for (std::size_t ix = 0; ix < gx_.n; ++ix) Psi.at(ix, iq) = col[ix];
                }
            } else {
                fft_cols(Psi.amp, gx_.n, gq_.n);
                for (std::size_t ix = 0; ix < gx_.n; ++ix) {
                    const double k = gx_.k(ix);
                    const cplx ph = std::polar(1.0, -0.5 * k * k * tau);
                    for (std::size_t iq = 0; iq < gq_.n; ++iq) Psi.at(ix, iq) *= ph;
                }
                ifft_cols(Psi.amp, gx_.n, gq_.n);
            }
        }
        if (cfg_.kinetic_q) {
            fft_rows(Psi.amp, gx_.n, gq_.n);
            for (std::size_t iq = 0; iq < gq_.n; ++iq) {
                const double k = gq_.k(iq);
                const cplx ph = std::polar(1.0, -0.5 * k * k * tau);
                for (std::size_t ix = 0; ix < gx_.n; ++ix) Psi.at(ix, iq) *= ph;
            }
            ifft_rows(Psi.amp, gx_.n, gq_.n);
        }
    }

    void apply_diagonal(WaveFunction2D& Psi, double t, double dt) const {
        if (cfg_.potential_x) {
            const auto& v = *cfg_.potential_x;
            for (std::size_t ix = 0; ix < gx_.n; ++ix) {
                if (v[ix] == 0.0) continue;
                const cplx ph = std::polar(1.0, -v[ix] * dt);
                for (std::size_t iq = 0; iq < gq_.n; ++iq) Psi.at(ix, iq) *= ph;
            }
        }
        if (!cfg_.coupling) return;
        const auto& c = *cfg_.coupling;
        // Midpoint sample of g over the step keeps the splitting second order
        // for time-dependent pulses.
        const double gdt = c.strength * c.profile.rate(t + 0.5 * dt) * dt;
        if (gdt == 0.0) return;
        if (c.kind == CouplingSpec::Kind::momentum_kick) {
            for (std::size_t ix = row0_; ix <= row1_; ++ix) {
                const double w = vmask_[ix];
                for (std::size_t iq = 0; iq < gq_.n; ++iq)
                    Psi.at(ix, iq) *= std::polar(1.0, -gdt * w * gq_.x(iq));
            }
        } else {
            // The weighted region is a contiguous index block; only those
            // rows pick up the momentum-space phase.
            const std::size_t nrows = row1_ - row0_ + 1;
            cplx* block = Psi.amp.data() + row0_ * gq_.n;
            fft_rows(block, nrows, gq_.n);
            for (std::size_t ix = row0_; ix <= row1_; ++ix) {
                const double w = vmask_[ix];
                for (std::size_t iq = 0; iq < gq_.n; ++iq)
                    Psi.at(ix, iq) *= std::polar(1.0, -gdt * w * gq_.k(iq));
            }
            ifft_rows(block, nrows, gq_.n);
        }
    }

    Grid1D gx_;
    Grid1D gq_;
    Hamiltonian2DConfig cfg_;
    std::vector<double> vmask_;
    std::size_t row0_ = 0;
    std::size_t row1_ = 0;
};

// Whole-interval 2D evolution with optional per-stride snapshot callback.
// on_snapshot(t, Psi) is invoked at t0, after every `stride` steps, and at t1.
inline WaveFunction2D evolve_2d(
    const WaveFunction2D& Psi0, const Hamiltonian2DConfig& cfg, double t0, double t1, double dt,
    std::size_t stride = 10,
    const std::function<void(double, const WaveFunction2D&)>& on_snapshot = nullptr) {
    if (dt <= 0.0 || t1 < t0) throw ValidationError("evolve_2d: need dt > 0, t1 >= t0");
    WaveFunction2D Psi = Psi0;
    Evolver2D ev(Psi.grid_x, Psi.grid_q, cfg);
    const double norm0 = Psi.norm2();
    const std::size_t steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-12));
    const double h = (steps > 0) ? (t1 - t0) / static_cast<double>(steps) : 0.0;
    if (on_snapshot) on_snapshot(t0, Psi);
    for (std::size_t s = 0; s < steps; ++s) {
        ev.step(Psi, t0 + s * h, h);
        if (on_snapshot && ((s + 1) % stride == 0 || s + 1 == steps))
            on_snapshot(t0 + (s + 1) * h, Psi);
    }
    if (!cfg.dirichlet_x) {
        const auto mx = Psi.marginal_x();
        if (prop_detail::edge_density(mx, 2) > 1e-8)
            throw NumericalGuardError("domain too small: x-boundary density above 1e-8 at t=" +
                                      std::to_string(t1));
    }
    if (std::abs(Psi.norm2() - norm0) > 1e-8)
        throw NumericalGuardError("evolve_2d: norm drift above 1e-8");
    return Psi;
}

}  // namespace bohm

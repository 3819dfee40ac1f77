#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "bohm/errors.hpp"
#include "bohm/fft.hpp"
#include "bohm/grid.hpp"

namespace bohm {

using cplx = std::complex<double>;

struct WaveFunction1D {
    Grid1D grid;
    std::vector<cplx> amp;

    WaveFunction1D() = default;
    explicit WaveFunction1D(const Grid1D& g) : grid(g), amp(g.n, cplx{0.0, 0.0}) {}
    WaveFunction1D(const Grid1D& g, std::vector<cplx> a) : grid(g), amp(std::move(a)) {
        if (amp.size() != grid.n) throw ValidationError("wavefunction: amp size != grid n");
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& z : amp) s += std::norm(z);
        return s * grid.dx();
    }

    void normalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0) || !std::isfinite(n2))
            throw NumericalGuardError("wavefunction: cannot normalize zero/non-finite state");
        const double s = 1.0 / std::sqrt(n2);
        for (auto& z : amp) z *= s;
    }

    std::vector<double> density() const {
        std::vector<double> rho(amp.size());
        for (std::size_t i = 0; i < amp.size(); ++i) rho[i] = std::norm(amp[i]);
        return rho;
    }
};

// Composite (particle x, pointer q) state, row-major: amp[ix * nq + iq].
struct WaveFunction2D {
    Grid1D grid_x;
    Grid1D grid_q;
    std::vector<cplx> amp;

    WaveFunction2D() = default;
    WaveFunction2D(const Grid1D& gx, const Grid1D& gq)
        : grid_x(gx), grid_q(gq), amp(gx.n * gq.n, cplx{0.0, 0.0}) {}

    cplx& at(std::size_t ix, std::size_t iq) { return amp[ix * grid_q.n + iq]; }
    const cplx& at(std::size_t ix, std::size_t iq) const { return amp[ix * grid_q.n + iq]; }

    double cell() const { return grid_x.dx() * grid_q.dx(); }

    double norm2() const {
        double s = 0.0;
        for (const auto& z : amp) s += std::norm(z);
        return s * cell();
    }

    void normalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0) || !std::isfinite(n2))
            throw NumericalGuardError("wavefunction2d: cannot normalize zero/non-finite state");
        const double s = 1.0 / std::sqrt(n2);
        for (auto& z : amp) z *= s;
    }

    // Marginal density over q (integrating out x) and vice versa.
    std::vector<double> marginal_q() const {
        std::vector<double> m(grid_q.n, 0.0);
        for (std::size_t ix = 0; ix < grid_x.n; ++ix)
            for (std::size_t iq = 0; iq < grid_q.n; ++iq) m[iq] += std::norm(at(ix, iq));
        for (auto& v : m) v *= grid_x.dx();
        return m;
    }
    std::vector<double> marginal_x() const {
        std::vector<double> m(grid_x.n, 0.0);
        for (std::size_t ix = 0; ix < grid_x.n; ++ix)
            for (std::size_t iq = 0; iq < grid_q.n; ++iq) m[ix] += std::norm(at(ix, iq));
        for (auto& v : m) v *= grid_q.dx();
        return m;
    }
};

// Two-component spinor on a shared spatial grid.
struct SpinorWaveFunction1D {
    Grid1D grid;
    std::vector<cplx> up;
    std::vector<cplx> down;

    SpinorWaveFunction1D() = default;
    explicit SpinorWaveFunction1D(const Grid1D& g)
        : grid(g), up(g.n, cplx{0.0, 0.0}), down(g.n, cplx{0.0, 0.0}) {}

    double norm2() const {
        double s = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) s += std::norm(up[i]) + std::norm(down[i]);
        return s * grid.dx();
    }

    void normalize() {
        const double n2 = norm2();
        if (!(n2 > 0.0) || !std::isfinite(n2))
            throw NumericalGuardError("spinor: cannot normalize zero/non-finite state");
        const double s = 1.0 / std::sqrt(n2);
        for (std::size_t i = 0; i < grid.n; ++i) {
            up[i] *= s;
            down[i] *= s;
        }
    }
};

inline cplx inner(const WaveFunction1D& a, const WaveFunction1D& b) {
    if (!(a.grid == b.grid)) throw ValidationError("inner: grid mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s * a.grid.dx();
}

// Spectral derivative on the periodic grid.
inline std::vector<cplx> spectral_derivative(const Grid1D& g, const std::vector<cplx>& f) {
    std::vector<cplx> hat(f);
    fft_inplace(hat);
    for (std::size_t i = 0; i < g.n; ++i) hat[i] *= cplx{0.0, g.k(i)};
    // Zero the (real-derivative-ambiguous) Nyquist mode.
    hat[g.n / 2] = cplx{0.0, 0.0};
    ifft_inplace(hat);
    return hat;
}

// rho = |psi|^2 and current j = Im(psi* dpsi/dx), hbar = m = 1.
inline void density_and_current(const WaveFunction1D& psi, std::vector<double>& rho,
                                std::vector<double>& j) {
    const std::size_t n = psi.grid.n;
    rho.resize(n);
    j.resize(n);
    const auto dpsi = spectral_derivative(psi.grid, psi.amp);
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = std::norm(psi.amp[i]);
        j[i] = std::imag(std::conj(psi.amp[i]) * dpsi[i]);
    }
}

// Momentum representation round trip (unitary convention is not needed by
// callers; forward here is plain FFT, use ifft to come back).
inline std::vector<cplx> to_momentum(const WaveFunction1D& psi) {
    std::vector<cplx> hat(psi.amp);
    fft_inplace(hat);
    return hat;
}

}  // namespace bohm

#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "bohm/wavefunction.hpp"

namespace bohm {

enum class PotentialKind { box, harmonic };

// Analytic bound state: infinite box of width L on [0, L] (quantum_number n
// >= 1 interior half-waves) or harmonic oscillator of frequency omega
// centered at 0 (n >= 0), hbar = m = 1.
struct EnergyEigenstate {
    PotentialKind potential = PotentialKind::box;
    double scale = 1.0;  // L for box, omega for harmonic
    int quantum_number = 1;

    double energy() const {
        if (potential == PotentialKind::box) {
            const double k = std::numbers::pi * quantum_number / scale;
            return 0.5 * k * k;
        }
        return scale * (quantum_number + 0.5);
    }

    double domain_min() const {
        return potential == PotentialKind::box ? 0.0 : -effective_halfwidth();
    }
    double domain_max() const {
        return potential == PotentialKind::box ? scale : effective_halfwidth();
    }

    double effective_halfwidth() const {
        // Classical turning point plus tail room.
        const double xt = std::sqrt((2.0 * quantum_number + 1.0) / scale);
        return xt + 6.0 / std::sqrt(scale);
    }

    double value(double x) const {
        if (potential == PotentialKind::box) {
            if (quantum_number < 1) throw ValidationError("box eigenstate: n >= 1");
            if (x <= 0.0 || x >= scale) return 0.0;
            return std::sqrt(2.0 / scale) * std::sin(std::numbers::pi * quantum_number * x / scale);
        }
        if (quantum_number < 0) throw ValidationError("harmonic eigenstate: n >= 0");
        const double w = scale;
        const double u = std::sqrt(w) * x;
        // Hermite recurrence; normalization pi^-1/4 w^1/4 / sqrt(2^n n!).
        double h0 = 1.0, h1 = 2.0 * u;
        double h = (quantum_number == 0) ? h0 : h1;
        for (int k = 2; k <= quantum_number; ++k) {
            const double hk = 2.0 * u * h1 - 2.0 * (k - 1) * h0;
            h0 = h1;
            h1 = hk;
            h = hk;
        }
        double lognorm = 0.25 * std::log(w / std::numbers::pi);
        for (int k = 1; k <= quantum_number; ++k) lognorm -= 0.5 * std::log(2.0 * k);
        return std::exp(lognorm - 0.5 * u * u) * h;
    }
};

inline WaveFunction1D eigenstate_field(const EnergyEigenstate& e, const Grid1D& grid) {
    if (grid.x_min > e.domain_min() || grid.x_max < e.domain_max())
        throw ValidationError("eigenstate: grid does not cover the state's support");
    WaveFunction1D psi(grid);
    for (std::size_t i = 0; i < grid.n; ++i) psi.amp[i] = e.value(grid.x(i));
    psi.normalize();
    return psi;
}

// The matching static potential sampled on a grid. Box walls are realized by
// the propagator's Dirichlet mode, not by a finite potential, so the box
// potential is zero inside its domain.
inline std::vector<double> potential_field(const EnergyEigenstate& e, const Grid1D& grid) {
    std::vector<double> v(grid.n, 0.0);
    if (e.potential == PotentialKind::harmonic) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double x = grid.x(i);
            v[i] = 0.5 * e.scale * e.scale * x * x;
        }
    }
    return v;
}

}  // namespace bohm

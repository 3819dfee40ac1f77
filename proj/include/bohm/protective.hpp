#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bohm/eigenstates.hpp"
#include "bohm/guidance.hpp"
#include "bohm/propagate.hpp"

namespace bohm {

// Adiabatic measurement of the probability mass in V = [a, b] on an energy
// eigenstate: coupling H = g(t) P indicator_V(x) with g integrating to 1 over
// [0, T] and smooth ramps. In the slow limit the pointer mean shifts by
// exactly the projection expectation.
struct ProtectiveConfig {
    EnergyEigenstate state;
    double region_a = 0.0;
    double region_b = 0.5;
    double T = 8.0;
    double ramp = 0.8;      // >= 0.05 T
    double Delta = 0.25;    // pointer spread
    std::size_t nx = 128;
    std::size_t nq = 128;
    double dt = 0.0;        // 0 -> auto

    void validate() const {
        if (!(T > 0.0)) throw ValidationError("protective: T > 0");
        if (ramp < 0.05 * T) throw ValidationError("protective: ramp >= 0.05 T required");
        if (!(region_b > region_a)) throw ValidationError("protective: empty region");
        if (!(Delta > 0.0)) throw ValidationError("protective: Delta > 0");
    }
};

// Integral of |psi|^2 over [a, b]: closed form for the box, error function
// for the harmonic ground state, composite Simpson otherwise.
inline double expected_projection(const EnergyEigenstate& e, double a, double b) {
    if (!(b > a)) throw ValidationError("expected_projection: empty interval");
    if (a < e.domain_min() - 1e-9 || b > e.domain_max() + 1e-9)
        throw ValidationError("expected_projection: region outside the state's domain");
    if (e.potential == PotentialKind::box) {
        // integral of (2/L) sin^2(n pi x / L) = x/L - sin(2 n pi x / L)/(2 n pi)
        const double L = e.scale;
        const double w = 2.0 * std::numbers::pi * e.quantum_number;
        auto F = [&](double x) { return x / L - std::sin(w * x / L) / w; };
        return F(b) - F(a);
    }
    if (e.quantum_number == 0) {
        // Gaussian ground state, sigma^2 = 1 / (2 omega).
        const double s = 1.0 / std::sqrt(2.0 * e.scale);
        auto F = [&](double x) { return 0.5 * (1.0 + std::erf(x / (s * std::sqrt(2.0)))); };
        return F(b) - F(a);
    }
    // Simpson on a fine subdivision.
    const int m = 4000;  // even
    const double h = (b - a) / m;
    double s = 0.0;
    auto rho = [&](double x) {
        const double v = e.value(x);
        return v * v;
    };
    for (int i = 0; i <= m; ++i) {
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * rho(a + i * h);
    }
    return s * h / 3.0;
}

struct AdiabaticResult {
    double shift = 0.0;         // simulated pointer-mean displacement
    double prediction = 0.0;    // <Pi_V> first-order value
    double rel_error = 0.0;
    double eigen_overlap = 0.0; // |projection of the final state on the eigenstate|
    double norm_drift = 0.0;
};

namespace protective_detail {

inline double pointer_mean(const WaveFunction2D& Psi) {
    const auto mq = Psi.marginal_q();
    double m = 0.0, tot = 0.0;
    for (std::size_t iq = 0; iq < Psi.grid_q.n; ++iq) {
        m += mq[iq] * Psi.grid_q.x(iq);
        tot += mq[iq];
    }
    return m / tot;
}

// Norm of the projection of Psi(x, q) onto psi0(x), over all q.
inline double eigen_projection_norm(const WaveFunction2D& Psi, const WaveFunction1D& psi0) {
    double p = 0.0;
    for (std::size_t iq = 0; iq < Psi.grid_q.n; ++iq) {
        cplx ov{0.0, 0.0};
        for (std::size_t ix = 0; ix < Psi.grid_x.n; ++ix)
            ov += std::conj(psi0.amp[ix]) * Psi.at(ix, iq);
        p += std::norm(ov) * Psi.grid_x.dx() * Psi.grid_x.dx() * Psi.grid_q.dx();
    }
    return std::sqrt(p);
}

}  // namespace protective_detail

inline AdiabaticResult adiabatic_pointer_shift(const ProtectiveConfig& cfg) {
    cfg.validate();
    const auto& e = cfg.state;
    const bool box = e.potential == PotentialKind::box;
    const Grid1D gx(e.domain_min(), e.domain_max(), cfg.nx);
    const double prediction = expected_projection(e, cfg.region_a, cfg.region_b);
    // Pointer starts centred at 0 and moves by at most 1.
    const Grid1D gq(-8.0 * cfg.Delta, 1.0 + 8.0 * cfg.Delta, cfg.nq);

    const auto psi0 = eigenstate_field(e, gx);
    WaveFunction1D chi(gq);
    for (std::size_t iq = 0; iq < gq.n; ++iq) {
        const double u = gq.x(iq) / cfg.Delta;
        chi.amp[iq] = std::exp(-0.5 * u * u);
    }
    chi.normalize();
    WaveFunction2D Psi = product_state(psi0, chi);
    const double norm0 = Psi.norm2();

    Hamiltonian2DConfig h;
    h.kinetic_x = true;
    h.kinetic_q = false;
    h.dirichlet_x = box;
    if (!box) h.potential_x = potential_field(e, gx);
    CouplingSpec c;
    c.kind = CouplingSpec::Kind::position_shift;
    c.region_a = cfg.region_a;
    c.region_b = cfg.region_b;
    c.strength = 1.0;
    c.profile.shape = GProfile::Shape::smooth_adiabatic;
    c.profile.T = cfg.T;
    c.profile.ramp = cfg.ramp;
    h.coupling = c;

    // Step budget: keep per-step phases from the state's energy and from the
    // coupling (g ~ 1/T times occupied pointer bandwidth ~ 3/Delta) below
    // half a radian.
    double dt = cfg.dt;
    if (dt <= 0.0) {
        const double e_phase = std::max(e.energy(), 1.0);
        const double c_phase = (1.0 / (cfg.T - cfg.ramp)) * (3.0 / cfg.Delta);
        dt = 0.5 / std::max(e_phase, c_phase);
        dt = std::min(dt, cfg.T / 400.0);
    }

    const double q0 = protective_detail::pointer_mean(Psi);
    Psi = evolve_2d(Psi, h, 0.0, cfg.T, dt);

    AdiabaticResult r;
    r.prediction = prediction;
    r.shift = protective_detail::pointer_mean(Psi) - q0;
    r.rel_error = std::abs(r.shift - prediction) / std::max(prediction, 1e-12);
    r.eigen_overlap = protective_detail::eigen_projection_norm(Psi, psi0);
    r.norm_drift = std::abs(Psi.norm2() - norm0);
    if (r.eigen_overlap < 0.99)
        throw NumericalGuardError("T too small: eigenstate overlap " +
                                  std::to_string(r.eigen_overlap) + " < 0.99");
    return r;
}

struct ReconstructionReport {
    std::vector<double> edges;      // M + 1 bin edges
    std::vector<double> averages;   // measured <Pi_bin>
    std::vector<double> reference;  // exact integral of |psi|^2 per bin
    double l1_error = 0.0;          // total-variation distance: 0.5 integral |hist - rho|
};

// Reconstruct |psi|^2 from the projection averages of M bins partitioning the
// domain; L1 error compares the implied histogram density with a fine-grid
// analytic density.
inline ReconstructionReport reconstruct_density(const EnergyEigenstate& e, std::size_t M) {
    if (M < 2) throw ValidationError("reconstruct_density: M >= 2");
    ReconstructionReport rep;
    const double lo = e.domain_min(), hi = e.domain_max();
    rep.edges.resize(M + 1);
    for (std::size_t k = 0; k <= M; ++k)
        rep.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(M);
    rep.averages.resize(M);
    rep.reference.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        rep.averages[k] = expected_projection(e, rep.edges[k], rep.edges[k + 1]);
        rep.reference[k] = rep.averages[k];
    }
    // Total-variation distance (half the L1 integral, so two normalized
    // densities are at most 1 apart) via midpoint sampling inside each bin.
    // For the box ground state this is ~1/(2M).
    const int sub = 200;
    double l1 = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        const double w = rep.edges[k + 1] - rep.edges[k];
        const double h = rep.averages[k] / w;
        for (int i = 0; i < sub; ++i) {
            const double x = rep.edges[k] + (i + 0.5) * w / sub;
            const double v = e.value(x);
            l1 += std::abs(h - v * v) * (w / sub);
        }
    }
    rep.l1_error = 0.5 * l1;
    return rep;
}

struct StationarityReport {
    double max_speed = 0.0;          // over points with rho >= 1e-4 peak
    std::size_t bins_total = 0;
    std::size_t bins_visited = 0;    // by a single frozen particle
    bool empty_bins_nonnull = false; // unvisited bins still measure > 0
};

// An eigenstate is real: the current vanishes and the Bohmian particle is
// frozen. The speed bound is taken over the bulk (density >= 1e-4 of peak);
// below that the division j / rho only amplifies spectral rounding noise.
inline StationarityReport eigenstate_stationarity(const EnergyEigenstate& e, std::size_t M,
                                                  double x0, std::size_t nx = 512) {
    const Grid1D gx(e.domain_min(), e.domain_max(), nx);
    const auto psi = eigenstate_field(e, gx);
    const auto flow = flow_1d(psi);
    StationarityReport rep;
    for (std::size_t i = 0; i < gx.n; ++i) {
        if (flow.rho[i] < 1e-4 * flow.peak) continue;
        rep.max_speed = std::max(rep.max_speed, std::abs(flow.j[i] / flow.rho[i]));
    }
    rep.bins_total = M;
    const double lo = e.domain_min(), hi = e.domain_max();
    if (x0 < lo || x0 > hi) throw ValidationError("stationarity: x0 outside domain");
    rep.bins_visited = 1;  // the particle never moves: exactly its own bin
    // Any other bin with nonzero measure is "measured but never visited".
    const double w = (hi - lo) / static_cast<double>(M);
    for (std::size_t k = 0; k < M; ++k) {
        const double a = lo + k * w, b = a + w;
        if (x0 >= a && x0 < b) continue;
        if (expected_projection(e, a, b) > 1e-6) {
            rep.empty_bins_nonnull = true;
            break;
        }
    }
    return rep;
}

}  // namespace bohm

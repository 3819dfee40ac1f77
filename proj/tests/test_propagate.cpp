#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bohm/errors.hpp"
#include "bohm/eigenstates.hpp"
#include "bohm/packets.hpp"
#include "bohm/propagate.hpp"

using namespace bohm;
using std::numbers::pi;

namespace {

// Free Gaussian evolution in closed form: the amplitude width grows as
// sigma0 sqrt(1 + (t/sigma0^2)^2); the density std is that over sqrt(2).
// (hbar = m = 1 throughout.)
double free_sigma(double s0, double t) {
    const double u = t / (s0 * s0);
    return s0 * std::sqrt(1.0 + u * u) / std::sqrt(2.0);
}

double grid_sigma(const WaveFunction1D& psi) {
    const auto rho = psi.density();
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < psi.grid.n; ++i) {
        m1 += psi.grid.x(i) * rho[i] * psi.grid.dx();
        m2 += psi.grid.x(i) * psi.grid.x(i) * rho[i] * psi.grid.dx();
    }
    return std::sqrt(m2 - m1 * m1);
}

double grid_mean(const WaveFunction1D& psi) {
    const auto rho = psi.density();
    double m1 = 0.0;
    for (std::size_t i = 0; i < psi.grid.n; ++i) m1 += psi.grid.x(i) * rho[i] * psi.grid.dx();
    return m1;
}

}  // namespace

TEST_CASE("profiles integrate to one and vanish outside their window") {
    GProfile sq;  // square on [0, 1]
    CHECK(sq.rate(-0.1) == 0.0);
    CHECK(sq.rate(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sq.rate(1.0) == 0.0);
    GProfile ad;
    ad.shape = GProfile::Shape::smooth_adiabatic;
    ad.T = 4.0;
    ad.ramp = 0.8;
    CHECK(ad.rate(2.0) == doctest::Approx(1.0 / (4.0 - 0.8)).epsilon(1e-15));
    CHECK(ad.rate(-1e-9) == 0.0);
    CHECK(ad.rate(4.0 + 1e-9) == 0.0);
    // Midpoint integral of the rate is 1 for both shapes (midpoints avoid the
    // half-open support endpoints).
    for (const GProfile& p : {sq, ad}) {
        const double t1 = p.stop();
        const std::size_t m = 200000;
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            acc += p.rate(t1 * (i + 0.5) / m) * (t1 / m);
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Continuity of the adiabatic ramp at the plateau joints.
    CHECK(ad.rate(0.8 - 1e-9) == doctest::Approx(ad.rate(0.8 + 1e-9)).epsilon(1e-6));
}

TEST_CASE("free Gaussian spreads by the closed-form law") {
    const Grid1D g(-60.0, 60.0, 2048);
    const double s0 = 2.0, v = 3.0, t = 2.0;
    const auto psi0 = build_packet(g, PacketSpec{PacketShape::gaussian, -10.0, s0, v, 1.0, 0.0});
    const auto psi = evolve_1d(psi0, nullptr, t, 1e-3);
    // Amplitude width 2 sqrt(1 + (2/4)^2) = sqrt(5), density std sqrt(5/2);
    // center at -10 + 3 t.
    CHECK(grid_sigma(psi) == doctest::Approx(free_sigma(s0, t)).epsilon(1e-6));
    CHECK(grid_mean(psi) == doctest::Approx(-10.0 + v * t).epsilon(1e-8));
    CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("norm is conserved to 1e-8 over long runs") {
    const Grid1D g(-60.0, 60.0, 1024);
    const auto psi0 = build_packet(g, PacketSpec{PacketShape::gaussian, 0.0, 3.0, 1.0, 1.0, 0.0});
    std::vector<double> pot(g.n);
    for (std::size_t i = 0; i < g.n; ++i) pot[i] = 0.05 * g.x(i) * g.x(i);
    const auto psi = evolve_1d(psi0, &pot, 5.0, 1e-3);
    CHECK(std::abs(psi.norm2() - 1.0) < 1e-10);
}

TEST_CASE("harmonic coherent oscillation: one period returns the packet") {
    // omega = 1 trap, displaced ground state swings back after t = 2 pi.
    const Grid1D g(-24.0, 24.0, 1024);
    const double x0 = 2.0;
    auto psi0 = build_packet(
        g, PacketSpec{PacketShape::gaussian, x0, 1.0 / std::sqrt(2.0), 0.0, 1.0, 0.0});
    std::vector<double> pot(g.n);
    for (std::size_t i = 0; i < g.n; ++i) pot[i] = 0.5 * g.x(i) * g.x(i);
    const auto half = evolve_1d(psi0, &pot, pi, 2e-4);
    CHECK(grid_mean(half) == doctest::Approx(-x0).epsilon(1e-5));
    const auto full = evolve_1d(half, &pot, pi, 2e-4);
    CHECK(grid_mean(full) == doctest::Approx(x0).epsilon(1e-5));
    CHECK(std::abs(inner(full, psi0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("strang splitting converges at second order") {
    const Grid1D g(-30.0, 30.0, 512);
    const auto psi0 = build_packet(g, PacketSpec{PacketShape::gaussian, -3.0, 2.0, 1.0, 1.0, 0.0});
    std::vector<double> pot(g.n);
    for (std::size_t i = 0; i < g.n; ++i) pot[i] = 0.3 * g.x(i) * g.x(i);
    const double t = 1.0;
    const auto ref = evolve_1d(psi0, &pot, t, 1.0 / 4096.0);
    auto err = [&](double dt) {
        const auto psi = evolve_1d(psi0, &pot, t, dt);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) acc += std::norm(psi.amp[i] - ref.amp[i]);
        return std::sqrt(acc * g.dx());
    };
    const double e1 = err(1.0 / 64.0), e2 = err(1.0 / 128.0), e3 = err(1.0 / 256.0);
    CHECK(e1 / e2 > 3.0);  // ~4 for order 2
    CHECK(e1 / e2 < 5.0);
    CHECK(e2 / e3 > 3.0);
    CHECK(e2 / e3 < 5.0);
}

TEST_CASE("boundary-leakage guard fires when a packet reaches the edge") {
    const Grid1D g(-20.0, 20.0, 256);
    const auto psi0 = build_packet(g, PacketSpec{PacketShape::gaussian, 0.0, 2.0, 5.0, 1.0, 0.0});
    CHECK_THROWS_AS(evolve_1d(psi0, nullptr, 4.0, 1e-3), NumericalGuardError);
}

TEST_CASE("dirichlet walls hold a box eigenstate stationary") {
    const double L = 1.0;
    const EnergyEigenstate e{PotentialKind::box, L, 1};
    const Grid1D g(0.0, L, 256);
    const auto psi0 = eigenstate_field(e, g);
    const double t = 0.7;
    const auto psi = evolve_1d(psi0, nullptr, t, 1e-4, true);
    // Eigenstate picks up only the phase e^{-i E t} (compared modulo 2 pi).
    const cplx ov = inner(psi0, psi);
    CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::arg(ov) == doctest::Approx(std::remainder(-e.energy() * t, 2.0 * pi)).epsilon(1e-6));
    // A wall collision stays inside: packet bounces, norm conserved.
    const Grid1D g2(0.0, 8.0, 512);
    const auto mv = build_packet(g2, PacketSpec{PacketShape::gaussian, 4.0, 0.5, 6.0, 1.0, 0.0});
    const auto after = evolve_1d(mv, nullptr, 1.2, 1e-4, true);
    CHECK(after.norm2() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(grid_mean(after) < 8.0);
}

TEST_CASE("2d evolver: position shift moves the pointer only inside the region") {
    // Particle packet passing through [a, b] with a position_shift coupling;
    // the pointer marginal ends displaced by `strength` with its shape intact.
    const Grid1D gx(-40.0, 40.0, 1024), gq(-3.0, 3.0, 128);
    const auto part = build_packet(gx, PacketSpec{PacketShape::gaussian, -15.0, 2.0, 10.0, 1.0, 0.0});
    const auto ptr = build_packet(gq, PacketSpec{PacketShape::gaussian, 0.0, 0.4, 0.0, 1.0, 0.0});
    auto Psi = product_state(part, ptr);
    Hamiltonian2DConfig ham;
    CouplingSpec c;
    c.kind = CouplingSpec::Kind::position_shift;
    c.region_a = -1.0;
    c.region_b = 1.0;
    c.profile.t_on = 0.0;
    c.profile.t_off = 3.0;
    c.strength = 0.8;  // pointer shift = strength * (transit time) / pulse length... scaled below
    ham.coupling = c;
    // Transit time through [a,b] = 0.2; expected shift = strength * rate * transit
    const double expected = 0.8 * (1.0 / 3.0) * 0.2;
    const auto out = evolve_2d(Psi, ham, 0.0, 3.0, 2e-3);
    const auto mq = out.marginal_q();
    double mean = 0.0;
    for (std::size_t i = 0; i < gq.n; ++i) mean += gq.x(i) * mq[i] * gq.dx();
    CHECK(mean == doctest::Approx(expected).epsilon(2e-2));
    CHECK(out.norm2() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("2d evolver: momentum kick leaves the pointer density in place") {
    const Grid1D gx(-40.0, 40.0, 1024), gq(-8.0, 8.0, 128);
    const auto part = build_packet(gx, PacketSpec{PacketShape::gaussian, -15.0, 2.0, 10.0, 1.0, 0.0});
    const auto ptr = build_packet(gq, PacketSpec{PacketShape::gaussian, 0.0, 1.5, 0.0, 1.0, 0.0});
    auto Psi = product_state(part, ptr);
    Hamiltonian2DConfig ham;
    ham.kinetic_q = true;
    CouplingSpec c;
    c.kind = CouplingSpec::Kind::momentum_kick;
    c.region_a = -1.0;
    c.region_b = 1.0;
    c.profile.t_off = 3.0;
    c.strength = 0.5;
    ham.coupling = c;
    Hamiltonian2DConfig free_ham = ham;
    free_ham.coupling.reset();
    const auto out = evolve_2d(Psi, ham, 0.0, 3.0, 2e-3);
    const auto ref = evolve_2d(Psi, free_ham, 0.0, 3.0, 2e-3);
    const auto mq = out.marginal_q();
    const auto mq0 = ref.marginal_q();
    double l1 = 0.0;
    for (std::size_t i = 0; i < gq.n; ++i) l1 += std::abs(mq[i] - mq0[i]) * gq.dx();
    // The kick changes pointer momentum; relative to the free evolution the
    // position density barely moves before t_end.
    CHECK(l1 < 0.05);
}

TEST_CASE("invalid coupling regions are rejected") {
    const Grid1D gx(-10.0, 10.0, 128), gq(-2.0, 2.0, 64);
    Hamiltonian2DConfig ham;
    CouplingSpec c;
    c.region_a = 3.0;
    c.region_b = 2.0;
    ham.coupling = c;
    CHECK_THROWS_AS(Evolver2D(gx, gq, ham), ValidationError);
    c.region_a = -11.0;
    c.region_b = 2.0;
    ham.coupling = c;
    CHECK_THROWS_AS(Evolver2D(gx, gq, ham), ValidationError);
}

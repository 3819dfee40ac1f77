#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bohm/eigenstates.hpp"
#include "bohm/errors.hpp"
#include "bohm/grid.hpp"
#include "bohm/packets.hpp"
#include "bohm/wavefunction.hpp"

using namespace bohm;
using std::numbers::pi;

TEST_CASE("grid validation") {
    CHECK_NOTHROW(Grid1D(-1.0, 1.0, 64));
    CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 100), ValidationError);  // not a power of two
    CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 32), ValidationError);   // too small
    CHECK_THROWS_AS(Grid1D(1.0, -1.0, 64), ValidationError);   // empty interval
}

TEST_CASE("grid geometry and wavenumbers") {
    const Grid1D g(-2.0, 6.0, 128);
    CHECK(g.dx() == doctest::Approx(8.0 / 128).epsilon(1e-15));
    CHECK(g.x(0) == -2.0);
    CHECK(g.x(64) == doctest::Approx(2.0).epsilon(1e-15));
    // FFT ordering: k(0) = 0, k(1) = dk, k(n/2) most negative... magnitude n/2 dk
    const double dk = 2.0 * pi / 8.0;
    CHECK(g.k(0) == 0.0);
    CHECK(g.k(1) == doctest::Approx(dk).epsilon(1e-15));
    CHECK(g.k(127) == doctest::Approx(-dk).epsilon(1e-15));
    CHECK(g.contains(-2.0));
    CHECK(!g.contains(6.5));
}

TEST_CASE("normalization is idempotent and exact") {
    const Grid1D g(-20.0, 20.0, 256);
    auto psi = build_packet(g, PacketSpec{PacketShape::gaussian, 1.0, 2.0, 3.0, 1.0, 0.0});
    CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    psi.normalize();
    CHECK(psi.norm2() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spectral derivative matches a trigonometric oracle") {
    // f = sin(3 pi x / L') on a periodic grid holds exactly in the k basis.
    const Grid1D g(0.0, 2.0, 128);
    const double k0 = 3.0 * pi;  // integer multiple of 2 pi / L
    std::vector<cplx> f(g.n);
    for (std::size_t i = 0; i < g.n; ++i) f[i] = std::sin(k0 * g.x(i));
    const auto df = spectral_derivative(g, f);
    for (std::size_t i = 0; i < g.n; ++i)
        CHECK(df[i].real() == doctest::Approx(k0 * std::cos(k0 * g.x(i))).epsilon(1e-10));
}

TEST_CASE("plane-wave packet carries current j = v rho") {
    const Grid1D g(-30.0, 30.0, 512);
    const double v = 4.0;
    const auto psi = build_packet(g, PacketSpec{PacketShape::gaussian, 0.0, 3.0, v, 1.0, 0.0});
    std::vector<double> rho, j;
    density_and_current(psi, rho, j);
    for (std::size_t i = 0; i < g.n; ++i) {
        if (rho[i] < 1e-8) continue;
        // j/rho = v + O(envelope gradient correction); the Gaussian envelope is
        // real so the correction vanishes identically.
        CHECK(j[i] / rho[i] == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("smoothed rectangular packet: plateau, ramps, support") {
    // Raised-cosine edges of width s centered on the nominal box edges.
    const double a = 0.0, b = 1.0, s = 0.1;
    CHECK(packet_detail::smoothed_box(0.5, a, b, s) == 1.0);
    CHECK(packet_detail::smoothed_box(a + 0.5 * s, a, b, s) == 1.0);  // inner edge of ramp
    CHECK(packet_detail::smoothed_box(a, a, b, s) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(packet_detail::smoothed_box(b, a, b, s) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(packet_detail::smoothed_box(a - 0.5 * s, a, b, s) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(packet_detail::smoothed_box(a - 0.6 * s, a, b, s) == 0.0);
    CHECK(packet_detail::smoothed_box(b + 0.6 * s, a, b, s) == 0.0);
}

TEST_CASE("default rectangular smoothing is four grid cells") {
    const Grid1D g(-2.0, 2.0, 256);
    auto psi = build_packet(g, PacketSpec{PacketShape::rectangular, 0.0, 1.0, 0.0, 1.0, 0.0});
    // With s = 4 dx the amplitude at the nominal edge is half the plateau.
    const double plateau = std::abs(psi.amp[g.n / 2]);
    const auto i_edge = g.index_of(0.5);
    CHECK(std::abs(psi.amp[i_edge]) == doctest::Approx(0.5 * plateau).epsilon(1e-2));
    // Explicit smoothing below two cells is rejected.
    CHECK_THROWS_AS(
        build_packet(g, PacketSpec{PacketShape::rectangular, 0.0, 1.0, 0.0, 1.0, 0.5 * g.dx()}),
        ValidationError);
}

TEST_CASE("packets outside the domain are rejected") {
    const Grid1D g(-10.0, 10.0, 128);
    CHECK_THROWS_AS(build_packet(g, PacketSpec{PacketShape::gaussian, 9.0, 2.0, 0.0, 1.0, 0.0}),
                    ValidationError);
    CHECK_THROWS_AS(
        build_packet(g, PacketSpec{PacketShape::rectangular, -10.0, 1.0, 0.0, 1.0, 0.0}),
        ValidationError);
}

TEST_CASE("superposition weights") {
    const Grid1D g(-40.0, 40.0, 1024);
    // Disjoint packets: probability on each side follows the weights.
    const auto psi = build_superposition(
        g, {PacketSpec{PacketShape::gaussian, -15.0, 2.0, 0.0, 1.0, 0.0},
            PacketSpec{PacketShape::gaussian, +15.0, 2.0, 0.0, 2.0, 0.0}});
    double left = 0.0, right = 0.0;
    const auto rho = psi.density();
    for (std::size_t i = 0; i < g.n; ++i) (g.x(i) < 0 ? left : right) += rho[i] * g.dx();
    CHECK(right / left == doctest::Approx(4.0).epsilon(1e-9));  // amplitude 2 -> weight 4
    CHECK(left + right == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("box eigenstates: values, energies, orthonormality") {
    const double L = 2.0;
    EnergyEigenstate e{PotentialKind::box, L, 1};
    CHECK(e.energy() == doctest::Approx(pi * pi / (2.0 * L * L)).epsilon(1e-15));
    CHECK(e.value(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.value(L / 2) == doctest::Approx(std::sqrt(2.0 / L)).epsilon(1e-12));

    EnergyEigenstate e3{PotentialKind::box, L, 3};
    CHECK(e3.energy() == doctest::Approx(9.0 * pi * pi / (2.0 * L * L)).epsilon(1e-15));
    // Orthonormality on the grid (trapezoid exact for sin products up to eps).
    const Grid1D g(0.0, L, 512);
    const auto p1 = eigenstate_field(e, g);
    const auto p3 = eigenstate_field(e3, g);
    CHECK(std::abs(inner(p1, p3)) < 1e-12);
    CHECK(p1.norm2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("box eigenstate energy from a finite-difference Hamiltonian") {
    // Independent check: <psi| -1/2 d2/dx2 |psi> via 4th-order central
    // differences on the analytic state.
    const double L = 1.0;
    const EnergyEigenstate e{PotentialKind::box, L, 2};
    const double h = 1e-4;
    const std::size_t m = 2000;
    double acc = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        const double x = L * static_cast<double>(i) / m;
        const double d2 = (-e.value(x - 2 * h) + 16 * e.value(x - h) - 30 * e.value(x) +
                           16 * e.value(x + h) - e.value(x + 2 * h)) /
                          (12.0 * h * h);
        acc += e.value(x) * (-0.5 * d2) * (L / m);
    }
    CHECK(acc == doctest::Approx(e.energy()).epsilon(1e-6));
}

TEST_CASE("harmonic eigenstates: values, energies, nodes") {
    EnergyEigenstate e0{PotentialKind::harmonic, 1.0, 0};
    CHECK(e0.energy() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e0.value(0.0) == doctest::Approx(std::pow(pi, -0.25)).epsilon(1e-12));
    EnergyEigenstate e2{PotentialKind::harmonic, 1.0, 2};
    CHECK(e2.energy() == doctest::Approx(2.5).epsilon(1e-15));
    // H2(u) = 4u^2 - 2 vanishes at u = 1/sqrt(2).
    CHECK(e2.value(1.0 / std::sqrt(2.0)) == doctest::Approx(0.0).epsilon(1e-12));
    // Normalization on a wide grid.
    const Grid1D g(-12.0, 12.0, 1024);
    CHECK(eigenstate_field(e2, g).norm2() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("high harmonic quantum numbers stay finite (log-space norms)") {
    EnergyEigenstate e{PotentialKind::harmonic, 1.0, 60};
    const double v = e.value(1.0);
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) > 0.0);
    const Grid1D g(-18.0, 18.0, 2048);
    CHECK(eigenstate_field(e, g).norm2() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("momentum representation of a boosted packet peaks at v") {
    const Grid1D g(-40.0, 40.0, 1024);
    const double v = 5.0;
    const auto psi = build_packet(g, PacketSpec{PacketShape::gaussian, 0.0, 3.0, v, 1.0, 0.0});
    const auto phik = to_momentum(psi);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < g.n; ++i)
        if (std::abs(phik[i]) > std::abs(phik[imax])) imax = i;
    CHECK(g.k(imax) == doctest::Approx(v).epsilon(0.05));
}

TEST_CASE("2D product state marginals factorize") {
    const Grid1D gx(-20.0, 20.0, 128), gq(-2.0, 2.0, 64);
    const auto a = build_packet(gx, PacketSpec{PacketShape::gaussian, 0.0, 2.0, 0.0, 1.0, 0.0});
    const auto b = build_packet(gq, PacketSpec{PacketShape::rectangular, 0.0, 1.0, 0.0, 1.0, 0.0});
    const auto Psi = product_state(a, b);
    CHECK(Psi.norm2() == doctest::Approx(1.0).epsilon(1e-12));
    const auto mx = Psi.marginal_x();
    const auto rho = a.density();
    for (std::size_t i = 0; i < gx.n; i += 7)
        CHECK(mx[i] == doctest::Approx(rho[i]).epsilon(1e-10));
}

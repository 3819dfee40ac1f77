#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "bohm/wavefunction.hpp"

namespace bohm {

enum class PacketShape { gaussian, rectangular };

// One travelling packet: envelope(x - center) * exp(i * velocity * x).
// width is sigma for gaussian, full width for rectangular. Rectangular
// envelopes get raised-cosine edges of length `smoothing` (>= 2 dx) because a
// hard step is not representable spectrally.
struct PacketSpec {
    PacketShape shape = PacketShape::gaussian;
    double center = 0.0;
    double width = 1.0;
    double velocity = 0.0;
    double weight = 1.0;
    double smoothing = 0.0;  // rectangular only; 0 -> default 4 dx
};

namespace packet_detail {

// Unit-height box on [a,b] with raised-cosine edges of half-width s/2 about
// each boundary; support a - s/2 .. b + s/2.
inline double smoothed_box(double x, double a, double b, double s) {
    const double lo = x - (a - 0.5 * s);
    const double hi = (b + 0.5 * s) - x;
    if (lo <= 0.0 || hi <= 0.0) return 0.0;
    double v = 1.0;
    if (lo < s) v *= 0.5 * (1.0 - std::cos(std::numbers::pi * lo / s));
    if (hi < s) v *= 0.5 * (1.0 - std::cos(std::numbers::pi * hi / s));
    return v;
}

inline double support_radius(const PacketSpec& p, double dx) {
    if (p.shape == PacketShape::gaussian) return 4.0 * p.width;
    const double s = p.smoothing > 0.0 ? p.smoothing : 4.0 * dx;
    return 0.5 * p.width + s;
}

}  // namespace packet_detail

// Unnormalized single-packet amplitudes added into an existing field; used to
// build superpositions by accumulation.
inline void add_packet(WaveFunction1D& psi, const PacketSpec& p) {
    const double dx = psi.grid.dx();
    if (p.width <= 0.0) throw ValidationError("packet: width must be positive");
    const double r = packet_detail::support_radius(p, dx);
    if (p.center - r < psi.grid.x_min || p.center + r > psi.grid.x_max)
        throw ValidationError("packet outside domain: center " + std::to_string(p.center) +
                              " +- " + std::to_string(r));
    const double s = p.smoothing > 0.0 ? p.smoothing : 4.0 * dx;
    if (p.shape == PacketShape::rectangular && s < 2.0 * dx)
        throw ValidationError("packet: edge smoothing under two grid cells");
    for (std::size_t i = 0; i < psi.grid.n; ++i) {
        const double x = psi.grid.x(i);
        double env;
        if (p.shape == PacketShape::gaussian) {
            const double u = (x - p.center) / p.width;
            env = std::exp(-0.5 * u * u);
        } else {
            env = packet_detail::smoothed_box(x, p.center - 0.5 * p.width,
                                              p.center + 0.5 * p.width, s);
        }
        psi.amp[i] += p.weight * env * std::polar(1.0, p.velocity * x);
    }
}

inline WaveFunction1D build_packet(const Grid1D& grid, const PacketSpec& spec,
                                   bool normalized = true) {
    WaveFunction1D psi(grid);
    add_packet(psi, spec);
    if (normalized) psi.normalize();
    return psi;
}

inline WaveFunction1D build_superposition(const Grid1D& grid, const std::vector<PacketSpec>& specs) {
    WaveFunction1D psi(grid);
    for (const auto& s : specs) add_packet(psi, s);
    psi.normalize();
    return psi;
}

// Product state particle(x) * pointer(q).
inline WaveFunction2D product_state(const WaveFunction1D& part, const WaveFunction1D& ptr) {
    WaveFunction2D Psi(part.grid, ptr.grid);
    for (std::size_t ix = 0; ix < part.grid.n; ++ix)
        for (std::size_t iq = 0; iq < ptr.grid.n; ++iq)
            Psi.at(ix, iq) = part.amp[ix] * ptr.amp[iq];
    Psi.normalize();
    return Psi;
}

}  // namespace bohm

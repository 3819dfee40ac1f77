#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "bohm/errors.hpp"

namespace bohm {

// Uniform periodic grid on [x_min, x_max). n must be a power of two (>= 64)
// so spectral transforms stay cheap.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n = 64;

    Grid1D() = default;
    Grid1D(double a, double b, std::size_t npts) : x_min(a), x_max(b), n(npts) {
        if (!(x_max > x_min)) throw ValidationError("grid: x_max must exceed x_min");
        if (n < 64 || (n & (n - 1)) != 0)
            throw ValidationError("grid: n must be a power of two >= 64");
    }

    double length() const { return x_max - x_min; }
    double dx() const { return length() / static_cast<double>(n); }
    double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }

    std::vector<double> points() const {
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = x(i);
        return xs;
    }

    // FFT wavenumber for bin i (standard order: 0..n/2-1, -n/2..-1).
    double k(std::size_t i) const {
        const double dk = 2.0 * std::numbers::pi / length();
        const auto half = n / 2;
        const double idx = (i < half) ? static_cast<double>(i)
                                      : static_cast<double>(i) - static_cast<double>(n);
        return dk * idx;
    }

    std::vector<double> wavenumbers() const {
        std::vector<double> ks(n);
        for (std::size_t i = 0; i < n; ++i) ks[i] = k(i);
        return ks;
    }

    // Nearest grid index, clamped.
    std::size_t index_of(double xq) const {
        double u = (xq - x_min) / dx();
        if (u < 0.0) u = 0.0;
        if (u > static_cast<double>(n - 1)) u = static_cast<double>(n - 1);
        return static_cast<std::size_t>(u + 0.5);
    }

    bool contains(double xq) const { return xq >= x_min && xq <= x_max; }

    bool operator==(const Grid1D& o) const {
        return x_min == o.x_min && x_max == o.x_max && n == o.n;
    }
};

}  // namespace bohm

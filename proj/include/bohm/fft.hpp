#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace bohm {

// Thin wrapper over FFTW with a process-wide plan cache. Plans are created
// with FFTW_ESTIMATE | FFTW_UNALIGNED so they work on any caller buffer.
// Transforms are unnormalized forward, 1/n on inverse.
namespace fft_detail {

struct PlanKey {
    std::size_t n;
    int sign;
    std::size_t howmany;
    std::size_t stride;
    std::size_t dist;
    bool operator<(const PlanKey& o) const {
        return std::tie(n, sign, howmany, stride, dist) <
               std::tie(o.n, o.sign, o.howmany, o.stride, o.dist);
    }
};

// Batched strided in-place plan; howmany = 1, stride = 1 is the plain 1D
// case. Large transforms are worth measured planning (2-3x faster executes
// for ~1 s of one-off planning); planning runs on a scratch buffer because
// FFTW_MEASURE clobbers its input. FFTW_UNALIGNED keeps the plan valid for
// any caller buffer.
inline fftw_plan plan_for(std::size_t n, int sign, std::complex<double>*, std::size_t howmany = 1,
                          std::size_t stride = 1, std::size_t dist = 0) {
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n, sign, howmany, stride, dist});
    if (it != cache.end()) return it->second;
    const std::size_t span = (n - 1) * stride + (howmany > 0 ? (howmany - 1) * dist : 0) + 1;
    std::vector<std::complex<double>> scratch(span);
    const int ni = static_cast<int>(n);
    auto* b = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned strategy = (n * howmany >= (1u << 16)) ? FFTW_MEASURE : FFTW_ESTIMATE;
    fftw_plan p = fftw_plan_many_dft(1, &ni, static_cast<int>(howmany), b, nullptr,
                                     static_cast<int>(stride), static_cast<int>(dist), b, nullptr,
                                     static_cast<int>(stride), static_cast<int>(dist), sign,
                                     strategy | FFTW_UNALIGNED);
    cache[{n, sign, howmany, stride, dist}] = p;
    return p;
}

inline std::mutex& exec_guard() {
    // fftw_execute_dft on distinct buffers is thread safe, but plan creation
    // is not; plan_for handles that. Nothing else shared.
    static std::mutex m;
    return m;
}

}  // namespace fft_detail

inline void fft_inplace(std::vector<std::complex<double>>& a) {
    fftw_plan p = fft_detail::plan_for(a.size(), FFTW_FORWARD, a.data());
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
}

inline void ifft_inplace(std::vector<std::complex<double>>& a) {
    fftw_plan p = fft_detail::plan_for(a.size(), FFTW_BACKWARD, a.data());
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z *= inv;
}

// Row-wise transforms of `nrows` contiguous rows of length ncols at `p`.
inline void fft_rows(std::complex<double>* p, std::size_t nrows, std::size_t ncols) {
    fftw_plan pl = fft_detail::plan_for(ncols, FFTW_FORWARD, p, nrows, 1, ncols);
    fftw_execute_dft(pl, reinterpret_cast<fftw_complex*>(p), reinterpret_cast<fftw_complex*>(p));
}

inline void ifft_rows(std::complex<double>* p, std::size_t nrows, std::size_t ncols) {
    fftw_plan pl = fft_detail::plan_for(ncols, FFTW_BACKWARD, p, nrows, 1, ncols);
    fftw_execute_dft(pl, reinterpret_cast<fftw_complex*>(p), reinterpret_cast<fftw_complex*>(p));
    const double inv = 1.0 / static_cast<double>(ncols);
    for (std::size_t i = 0; i < nrows * ncols; ++i) p[i] *= inv;
}

inline void fft_rows(std::vector<std::complex<double>>& a, std::size_t nrows, std::size_t ncols) {
    fft_rows(a.data(), nrows, ncols);
}

inline void ifft_rows(std::vector<std::complex<double>>& a, std::size_t nrows, std::size_t ncols) {
    ifft_rows(a.data(), nrows, ncols);
}

// Column-wise transforms of a row-major (nrows x ncols) matrix, batched over
// all columns in one strided plan.
inline void fft_cols(std::vector<std::complex<double>>& a, std::size_t nrows, std::size_t ncols) {
    fftw_plan p = fft_detail::plan_for(nrows, FFTW_FORWARD, a.data(), ncols, ncols, 1);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
}

inline void ifft_cols(std::vector<std::complex<double>>& a, std::size_t nrows, std::size_t ncols) {
    fftw_plan p = fft_detail::plan_for(nrows, FFTW_BACKWARD, a.data(), ncols, ncols, 1);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                     reinterpret_cast<fftw_complex*>(a.data()));
    const double inv = 1.0 / static_cast<double>(nrows);
    for (auto& z : a) z *= inv;
}

}  // namespace bohm

#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "bohm/errors.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Pre-selected |pre> and post-selected <post| (stored as a ket) pair between
// which weak values are evaluated (free Hamiltonian zero in between).
struct TwoStateVector {
    Vec pre;
    Vec post;

    TwoStateVector() = default;
    TwoStateVector(Vec pre_, Vec post_) : pre(std::move(pre_)), post(std::move(post_)) {
        if (pre.size() != post.size()) throw ValidationError("tsv: dimension mismatch");
        const double n1 = pre.norm(), n2 = post.norm();
        if (!(n1 > 0.0) || !(n2 > 0.0)) throw ValidationError("tsv: zero state");
        pre /= n1;
        post /= n2;
    }

    Eigen::Index dim() const { return pre.size(); }
    cplx overlap() const { return post.dot(pre); }  // <post|pre>
};

// Below this overlap modulus the weak value has no numerical meaning.
inline constexpr double kOverlapFloor = 1e-14;

struct WeakValueResult {
    cplx value{0.0, 0.0};
    double overlap_modulus = 0.0;
};

inline void check_hermitian(const Mat& A) {
    if (A.rows() != A.cols() || (A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("operator must be Hermitian");
}

// A_w = <post|A|pre> / <post|pre>.
inline WeakValueResult weak_value(const TwoStateVector& tsv, const Mat& A,
                                  double overlap_floor = kOverlapFloor) {
    check_hermitian(A);
    if (A.rows() != tsv.dim()) throw ValidationError("weak_value: dimension mismatch");
    const cplx ov = tsv.overlap();
    if (std::abs(ov) <= overlap_floor)
        throw ValidationError("weak value undefined: |<post|pre>| <= " +
                              std::to_string(overlap_floor));
    WeakValueResult r;
    r.overlap_modulus = std::abs(ov);
    r.value = tsv.post.dot(A * tsv.pre) / ov;
    return r;
}

// ---------------------------------------------------------------------------
// Spin operators and coherent states.

struct SpinOps {
    Mat jx, jy, jz;
};

// Angular momentum matrices for total spin j = two_j / 2 (dimension two_j+1),
// basis ordered m = j, j-1, ..., -j.
inline SpinOps spin_matrices(int two_j) {
    if (two_j < 1) throw ValidationError("spin_matrices: two_j >= 1");
    const int dim = two_j + 1;
    const double j = 0.5 * two_j;
    Mat jp = Mat::Zero(dim, dim);  // raising operator
    for (int r = 0; r + 1 < dim; ++r) {
        const double m = j - (r + 1);  // row r is m = j - r
        jp(r, r + 1) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    SpinOps ops;
    ops.jx = 0.5 * (jp + Mat(jp.adjoint()));
    ops.jy = cplx{0.0, -0.5} * (jp - Mat(jp.adjoint()));
    ops.jz = Mat::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) ops.jz(r, r) = j - r;
    return ops;
}

// e^{-i angle * G} for Hermitian G, by eigendecomposition.
inline Mat rotation(const Mat& G, double angle) {
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    const auto& U = es.eigenvectors();
    Vec phases(G.rows());
    for (Eigen::Index i = 0; i < G.rows(); ++i)
        phases(i) = std::polar(1.0, -angle * es.eigenvalues()(i));
    return U * phases.asDiagonal() * U.adjoint();
}

// Maximal spin coherent state along (polar, azimuth):
// e^{-i azimuth Jz} e^{-i polar Jy} |m = j>.
inline Vec coherent_state(const SpinOps& ops, double polar, double azimuth) {
    Vec top = Vec::Zero(ops.jz.rows());
    top(0) = 1.0;
    return rotation(ops.jz, azimuth) * (rotation(ops.jy, polar) * top);
}

// Spin component along the in-plane (x-y) direction at azimuth phi.
inline Mat spin_along(const SpinOps& ops, double azimuth) {
    return std::cos(azimuth) * ops.jx + std::sin(azimuth) * ops.jy;
}

// The symmetric-direction setup: pre and post are maximal coherent states in
// the x-y plane at angle theta either side of the measured axis (taken as
// the x-y bisector). theta = 45 deg reproduces the pre = x, post = y pair.
struct SymmetricSpinCase {
    TwoStateVector tsv;
    Mat s_axis;  // spin component along the bisector
};

inline SymmetricSpinCase symmetric_spin_case(int two_j, double theta) {
    const SpinOps ops = spin_matrices(two_j);
    const double bisector = std::numbers::pi / 4.0;
    SymmetricSpinCase c{TwoStateVector(coherent_state(ops, std::numbers::pi / 2.0, bisector + theta),
                                       coherent_state(ops, std::numbers::pi / 2.0, bisector - theta)),
                        spin_along(ops, bisector)};
    return c;
}

// ---------------------------------------------------------------------------
// Pointer model: initial Gaussian e^{-Q^2 / (2 Delta^2)} coupled through
// e^{-i P A}; the final pointer state is a coefficient-weighted sum of
// Gaussians displaced to the eigenvalues of A.

struct PointerModel {
    double Delta = 1.0;
    Grid1D grid;

    PointerModel(double D, const Grid1D& g) : Delta(D), grid(g) {
        if (!(Delta > 0.0)) throw ValidationError("pointer: Delta > 0");
    }
    // Auto-sized grid spanning all displaced Gaussians with >= 6 Delta slack.
    PointerModel(double D, double eig_min, double eig_max, std::size_t n = 4096)
        : Delta(D), grid(eig_min - 8.0 * D, eig_max + 8.0 * D, n) {
        if (!(Delta > 0.0)) throw ValidationError("pointer: Delta > 0");
    }
};

struct PointerState {
    WaveFunction1D normalized;
    double raw_norm2 = 0.0;  // norm^2 before normalization = post-selection probability
};

namespace tsvf_detail {

inline void check_clipping(const WaveFunction1D& psi, double Delta) {
    const auto rho = psi.density();
    const std::size_t pad =
        std::max<std::size_t>(1, static_cast<std::size_t>(3.0 * Delta / psi.grid.dx()));
    double edge = 0.0;
    for (std::size_t i = 0; i < pad && i < rho.size(); ++i) {
        edge = std::max(edge, rho[i] * psi.grid.dx());
        edge = std::max(edge, rho[rho.size() - 1 - i] * psi.grid.dx());
    }
    if (edge > 1e-8)
        throw ValidationError("pointer grid clips the state: widen the Q grid");
}

}  // namespace tsvf_detail

// Exact post-selected pointer state via eigendecomposition of A:
// Phi(Q) = sum_a <post|a><a|pre> G_Delta(Q - a), no weak approximation.
// The raw (unnormalized) norm^2 carries the post-selection probability; the
// e^{-iPA} convention makes the Gaussian weight prefactor (pi Delta^2)^-1/4.
inline PointerState pointer_final_state(const TwoStateVector& tsv, const Mat& A,
                                        const PointerModel& pm,
                                        double overlap_floor = kOverlapFloor) {
    weak_value(tsv, A, overlap_floor);  // validates A and the overlap
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    const auto& U = es.eigenvectors();
    const Vec coeff_post = U.adjoint() * tsv.post;  // <a|post>
    const Vec coeff_pre = U.adjoint() * tsv.pre;    // <a|pre>
    PointerState out;
    out.normalized = WaveFunction1D(pm.grid);
    const double gauss_norm = std::pow(std::numbers::pi * pm.Delta * pm.Delta, -0.25);
    for (Eigen::Index a = 0; a < A.rows(); ++a) {
        const cplx w = std::conj(coeff_post(a)) * coeff_pre(a);
        if (w == cplx{0.0, 0.0}) continue;
        const double ea = es.eigenvalues()(a);
        for (std::size_t i = 0; i < pm.grid.n; ++i) {
            const double u = (pm.grid.x(i) - ea) / pm.Delta;
            out.normalized.amp[i] += w * gauss_norm * std::exp(-0.5 * u * u);
        }
    }
    out.raw_norm2 = out.normalized.norm2();
    if (!(out.raw_norm2 > 0.0))
        throw NumericalGuardError("pointer_final_state: vanishing post-selected state");
    out.normalized.normalize();
    tsvf_detail::check_clipping(out.normalized, pm.Delta);
    return out;
}

// Moment corrections (A^k)_w - (A_w)^k for k = 2..n_max; all zero exactly
// when pre is an eigenvector of A.
inline std::vector<cplx> moment_expansion(const TwoStateVector& tsv, const Mat& A, int n_max,
                                          double overlap_floor = kOverlapFloor) {
    const cplx aw = weak_value(tsv, A, overlap_floor).value;
    std::vector<cplx> out;
    Mat Ak = A;
    cplx awk = aw;
    for (int k = 2; k <= n_max; ++k) {
        Ak = Ak * A;
        awk *= aw;
        const cplx mk = tsv.post.dot(Ak * tsv.pre) / tsv.overlap();
        out.push_back(mk - awk);
    }
    return out;
}

// Large-Delta limit: the pointer ends in a Gaussian centred on Re(A_w).
inline WaveFunction1D weak_limit_gaussian(double a_w, const PointerModel& pm) {
    WaveFunction1D psi(pm.grid);
    for (std::size_t i = 0; i < pm.grid.n; ++i) {
        const double u = (pm.grid.x(i) - a_w) / pm.Delta;
        psi.amp[i] = std::exp(-0.5 * u * u);
    }
    psi.normalize();
    return psi;
}

// L2 distance between the exact normalized pointer state and its weak-limit
// Gaussian; decreases as Delta grows (empirically like 1/Delta^2).
inline double limit_deviation(const TwoStateVector& tsv, const Mat& A, const PointerModel& pm,
                              double overlap_floor = kOverlapFloor) {
    const auto exact = pointer_final_state(tsv, A, pm, overlap_floor);
    const double aw = weak_value(tsv, A, overlap_floor).value.real();
    const auto gauss = weak_limit_gaussian(aw, pm);
    double s = 0.0;
    for (std::size_t i = 0; i < pm.grid.n; ++i)
        s += std::norm(exact.normalized.amp[i] - gauss.amp[i]);
    return std::sqrt(s * pm.grid.dx());
}

// ---------------------------------------------------------------------------
// Multiprecision path for coherent-state weak values. The overlap of the
// two coherent states is cos(theta)^N; at N = 20, theta = 75 deg it is
// ~2e-12, and the double-precision inner products keep only ~4 digits of
// the numerator/denominator ratio. The coefficients have the closed form
// sqrt(binom(N, k)) cos(polar/2)^{N-k} sin(polar/2)^k e^{-i azimuth (j-k)},
// so both inner products are evaluated in 100-digit floats instead.

using mpf = boost::multiprecision::cpp_bin_float_100;
using mpc = boost::multiprecision::cpp_complex_100;

namespace tsvf_detail {

inline std::vector<mpc> coherent_coeffs_mp(int two_j, double polar, double azimuth) {
    using boost::multiprecision::cos;
    using boost::multiprecision::pow;
    using boost::multiprecision::sin;
    using boost::multiprecision::sqrt;
    std::vector<mpc> v(two_j + 1);
    const mpf half = mpf(polar) / 2;
    const mpf c = cos(half), s = sin(half);
    mpf binom = 1;
    for (int k = 0; k <= two_j; ++k) {
        if (k > 0) binom = binom * (two_j - k + 1) / k;
        const mpf mag = sqrt(binom) * pow(c, two_j - k) * pow(s, k);
        const mpf phase = mpf(azimuth) * (mpf(two_j) / 2 - k) * -1;
        v[k] = mpc(mag * cos(phase), mag * sin(phase));
    }
    return v;
}

}  // namespace tsvf_detail

// Weak value of the Pauli-sum component 2 (cos b Jx + sin b Jy) between two
// maximal coherent states with polar = pi/2 (the x-y plane).
inline WeakValueResult planar_coherent_weak_value(int two_j, double pre_azimuth,
                                                  double post_azimuth, double axis_azimuth,
                                                  double overlap_floor = kOverlapFloor) {
    using boost::multiprecision::sqrt;
    if (two_j < 1) throw ValidationError("spin case: 2j >= 1");
    const double polar = std::numbers::pi / 2.0;
    const auto pre = tsvf_detail::coherent_coeffs_mp(two_j, polar, pre_azimuth);
    const auto post = tsvf_detail::coherent_coeffs_mp(two_j, polar, post_azimuth);
    // 2 (cos b Jx + sin b Jy) = e^{-ib} J+ + e^{ib} J-
    const mpc em(std::cos(axis_azimuth), -std::sin(axis_azimuth));
    const mpc ep = conj(em);
    mpc num = 0, den = 0;
    for (int k = 0; k <= two_j; ++k) {
        mpc a = 0;  // (A |pre>)_k via the ladder coefficients
        if (k + 1 <= two_j) a += em * sqrt(mpf(k + 1) * (two_j - k)) * pre[k + 1];
        if (k - 1 >= 0) a += ep * sqrt(mpf(k) * (two_j - k + 1)) * pre[k - 1];
        num += conj(post[k]) * a;
        den += conj(post[k]) * pre[k];
    }
    const double ov = static_cast<double>(abs(den));
    if (ov <= overlap_floor)
        throw ValidationError("weak value undefined: |<post|pre>| <= " +
                              std::to_string(overlap_floor));
    const mpc w = num / den;
    WeakValueResult r;
    r.overlap_modulus = ov;
    r.value = cplx(static_cast<double>(w.real()), static_cast<double>(w.imag()));
    return r;
}

// Symmetric setup (pre/post theta either side of the x-y bisector, operator
// along the bisector) evaluated in multiprecision.
inline WeakValueResult symmetric_spin_weak_value(int two_j, double theta,
                                                 double overlap_floor = kOverlapFloor) {
    const double b = std::numbers::pi / 4.0;
    return planar_coherent_weak_value(two_j, b + theta, b - theta, b, overlap_floor);
}

// ---------------------------------------------------------------------------
// Pre/post-selected superpositions of localized packets at x_i = (N - 2i)/N,
// i = 0..N: |pre> has equal weights, <post| carries
// c_i = (-tan^2(theta/2))^i / (i! (N-i)!). The alternating c_i cancel so
// violently (ratio ~ ((1+t)/(1-t))^N) that doubles are useless for large N;
// the weak value and pointer state are therefore evaluated in 100-digit
// floats and only the results are narrowed.

struct PositionCase {
    int N = 1;
    double theta = 0.0;
    std::vector<double> sites;       // x_i
    std::vector<double> post_coeff;  // c_i normalized to max |c_i| = 1
    double x_w = 0.0;                // weak value of X = diag(x_i)
    double overlap_modulus = 0.0;    // |<post|pre>| for the normalized states
};

namespace tsvf_detail {

inline std::vector<mpf> position_coeffs(int N, double theta) {
    // c_i = (-t)^i / (i! (N-i)!), t = tan^2(theta/2), via running ratios.
    const mpf t = boost::multiprecision::pow(mpf(boost::multiprecision::tan(mpf(theta) / 2)), 2);
    std::vector<mpf> c(N + 1);
    mpf fact_i = 1, fact_ni = 1;
    for (int k = 1; k <= N; ++k) fact_ni *= k;
    mpf pref = 1 / fact_ni;  // i = 0 term: 1 / (0! N!)
    c[0] = pref;
    mpf ti = 1;
    for (int i = 1; i <= N; ++i) {
        ti *= -t;
        fact_i *= i;
        fact_ni = 1;
        for (int k = 1; k <= N - i; ++k) fact_ni *= k;
        c[i] = ti / (fact_i * fact_ni);
    }
    return c;
}

}  // namespace tsvf_detail

inline PositionCase prepost_position_states(int N, double theta) {
    if (N < 1) throw ValidationError("position case: N >= 1");
    PositionCase pc;
    pc.N = N;
    pc.theta = theta;
    const auto c = tsvf_detail::position_coeffs(N, theta);
    mpf num = 0, den = 0, norm2 = 0;
    pc.sites.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        // The alternating sums cancel down ~((1+t)/(1-t))^N below the largest
        // term, so the sites must enter as exact rationals, not doubles.
        const mpf xi = mpf(N - 2 * i) / N;
        pc.sites[i] = static_cast<double>(xi);
        num += c[i] * xi;
        den += c[i];
        norm2 += c[i] * c[i];
    }
    if (den == 0) throw ValidationError("position case: vanishing overlap");
    pc.x_w = static_cast<double>(num / den);
    // |<post|pre>| with |pre> = (1/sqrt(N+1)) sum_i |x_i>, <post| normalized.
    const mpf ov = boost::multiprecision::abs(den) /
                   (boost::multiprecision::sqrt(norm2) * boost::multiprecision::sqrt(mpf(N + 1)));
    pc.overlap_modulus = static_cast<double>(ov);
    mpf cmax = 0;
    for (const auto& ci : c) cmax = std::max(cmax, mpf(boost::multiprecision::abs(ci)));
    pc.post_coeff.resize(N + 1);
    for (int i = 0; i <= N; ++i) pc.post_coeff[i] = static_cast<double>(c[i] / cmax);
    return pc;
}

// Exact pointer state for the position case, summed in multiprecision:
// Phi(Q) proportional to sum_i c_i G_Delta(Q - x_i).
inline WaveFunction1D position_pointer_state(const PositionCase& pc, const PointerModel& pm) {
    std::vector<mpf> phi(pm.grid.n, mpf(0));
    const auto c = tsvf_detail::position_coeffs(pc.N, pc.theta);
    for (int i = 0; i <= pc.N; ++i) {
        for (std::size_t g = 0; g < pm.grid.n; ++g) {
            const mpf u = (mpf(pm.grid.x(g)) - mpf(pc.N - 2 * i) / pc.N) / mpf(pm.Delta);
            phi[g] += c[i] * boost::multiprecision::exp(-u * u / 2);
        }
    }
    mpf peak = 0;
    for (const auto& v : phi) peak = std::max(peak, mpf(boost::multiprecision::abs(v)));
    if (peak == 0) throw NumericalGuardError("position pointer state vanished");
    WaveFunction1D psi(pm.grid);
    for (std::size_t g = 0; g < pm.grid.n; ++g)
        psi.amp[g] = static_cast<double>(phi[g] / peak);
    psi.normalize();
    return psi;
}

// ---------------------------------------------------------------------------
// Gaussian tail bookkeeping: where a shifted Gaussian dominates the original.

// exp(-(x-shift)^2/Delta^2) / exp(-x^2/Delta^2)
inline double tail_ratio(double shift, double Delta, double x) {
    if (!(shift > 0.0) || !(Delta > 0.0)) throw ValidationError("tail_ratio: shift, Delta > 0");
    return std::exp((2.0 * x * shift - shift * shift) / (Delta * Delta));
}

// Smallest x where tail_ratio reaches R.
inline double threshold_x(double shift, double Delta, double R) {
    if (!(R > 1.0)) throw ValidationError("threshold_x: R > 1");
    if (!(shift > 0.0) || !(Delta > 0.0)) throw ValidationError("threshold_x: shift, Delta > 0");
    return Delta * Delta * std::log(R) / (2.0 * shift) + 0.5 * shift;
}

}  // namespace bohm

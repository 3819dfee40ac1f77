#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "bohm/errors.hpp"
#include "bohm/tsvf.hpp"

using namespace bohm;
using std::numbers::pi;

namespace {

// Independent closed form for Gaussian-pointer moments: with final state
// sum_a c_a G(Q - a), G of width Delta, the overlaps obey
// <G_a|G_b> = exp(-(a-b)^2 / (4 Delta^2)) and <G_a|Q|G_b> = (a+b)/2 <G_a|G_b>.
double pointer_mean_oracle(const std::vector<cplx>& c, const std::vector<double>& a,
                           double Delta) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double d = a[i] - a[j];
            const double ov = std::exp(-d * d / (4.0 * Delta * Delta));
            const double w = (std::conj(c[i]) * c[j]).real() * ov;
            den += w;
            num += w * 0.5 * (a[i] + a[j]);
        }
    return num / den;
}

}  // namespace

TEST_CASE("weak value basics: eigenvector case and Hermiticity guard") {
    Mat sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    Vec up(2), dn(2);
    up << 1.0, 0.0;
    dn << 0.0, 1.0;
    CHECK(weak_value(TwoStateVector(up, up), sz).value.real() == doctest::Approx(1.0));
    CHECK(weak_value(TwoStateVector(dn, dn), sz).value.real() == doctest::Approx(-1.0));
    // Orthogonal pre/post: no weak value.
    CHECK_THROWS_AS(weak_value(TwoStateVector(up, dn), sz), ValidationError);
    Mat bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(weak_value(TwoStateVector(up, up), bad), ValidationError);
}

TEST_CASE("spin matrices: algebra and Casimir") {
    for (int two_j : {1, 2, 5}) {
        const auto ops = spin_matrices(two_j);
        const double j = two_j / 2.0;
        const Mat comm = ops.jx * ops.jy - ops.jy * ops.jx;
        CHECK((comm - cplx(0.0, 1.0) * ops.jz).cwiseAbs().maxCoeff() < 1e-12);
        const Mat cas = ops.jx * ops.jx + ops.jy * ops.jy + ops.jz * ops.jz;
        const Mat expect = j * (j + 1.0) * Mat::Identity(two_j + 1, two_j + 1);
        CHECK((cas - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("coherent state amplitudes match the binomial oracle") {
    // In the equatorial plane each half-spin contributes (|up> + e^{i..}|dn>)
    // with equal weight: |a_k| = sqrt(binom(2j, k)) / 2^j.
    const int two_j = 6;
    const auto v = coherent_state(spin_matrices(two_j), pi / 2.0, 0.3);
    double binom = 1.0;
    for (int k = 0; k <= two_j; ++k) {
        if (k > 0) binom *= static_cast<double>(two_j - k + 1) / k;
        CHECK(std::abs(v(k)) == doctest::Approx(std::sqrt(binom) / 8.0).epsilon(1e-10));
    }
    // Poles: polar 0 is the top state.
    const auto top = coherent_state(spin_matrices(two_j), 0.0, 0.0);
    CHECK(std::abs(top(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pauli component between x-up and y-up is sqrt(2)") {
    const auto c = symmetric_spin_case(1, pi / 4.0);
    const auto r = weak_value(c.tsv, 2.0 * c.s_axis);
    CHECK(r.value.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(r.value.imag()) < 1e-12);
    CHECK(r.overlap_modulus == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // The multiprecision path agrees to machine precision.
    const auto m = symmetric_spin_weak_value(1, pi / 4.0);
    CHECK(m.value.real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("symmetric spin-N weak value is N / cos(theta)") {
    for (int N : {2, 20}) {
        for (double deg : {0.0, 60.0, 75.0}) {
            const double th = deg * pi / 180.0;
            const auto r = symmetric_spin_weak_value(N, th);
            CHECK(r.value.real() ==
                  doctest::Approx(N / std::cos(th)).epsilon(1e-12));
            CHECK(std::abs(r.value.imag()) < 1e-9);
            CHECK(r.overlap_modulus ==
                  doctest::Approx(std::pow(std::cos(th), N)).epsilon(1e-10));
        }
    }
    // theta -> 90 deg: overlap underflows past the floor.
    CHECK_THROWS_AS(symmetric_spin_weak_value(20, 0.4999 * pi * 2.0 / 2.0), ValidationError);
}

TEST_CASE("double-precision matrix path loses the N=20 75-degree case") {
    // Documents why the multiprecision path exists: the same inner products
    // in doubles are ~9 orders short of the 1e-9 requirement.
    const double th = 75.0 * pi / 180.0;
    const auto c = symmetric_spin_case(20, th);
    const auto r = weak_value(c.tsv, 2.0 * c.s_axis);
    CHECK(std::abs(r.value.real() - 20.0 / std::cos(th)) > 1e-9);
}

TEST_CASE("pointer state: eigenvector case is a single Gaussian") {
    Mat sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    Vec up(2);
    up << 1.0, 0.0;
    const PointerModel pm(0.5, -1.0, 1.0);
    const auto st = pointer_final_state(TwoStateVector(up, up), sz, pm);
    CHECK(st.raw_norm2 == doctest::Approx(1.0).epsilon(1e-10));
    const auto ref = weak_limit_gaussian(1.0, pm);
    for (std::size_t i = 0; i < pm.grid.n; i += 17)
        CHECK(std::abs(st.normalized.amp[i] - ref.amp[i]) < 1e-10);
}

TEST_CASE("pointer mean matches the Gaussian-overlap oracle") {
    // sigma_z between x-up (pre) and a tilted post state: coefficients
    // c_a = <post|a><a|pre>. Mean of the exact pointer state on the grid vs
    // the closed-form double sum.
    Mat sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    Vec pre(2), post(2);
    pre << std::sqrt(0.5), std::sqrt(0.5);
    post << std::cos(0.3), std::sin(0.3) * cplx(0.0, 1.0);
    const TwoStateVector tsv(pre, post);
    for (double Delta : {0.7, 1.5, 4.0}) {
        const PointerModel pm(Delta, -1.0, 1.0);
        const auto st = pointer_final_state(tsv, sz, pm);
        double mean = 0.0;
        for (std::size_t i = 0; i < pm.grid.n; ++i)
            mean += pm.grid.x(i) * std::norm(st.normalized.amp[i]) * pm.grid.dx();
        const std::vector<cplx> c{std::conj(post(0)) * pre(0), std::conj(post(1)) * pre(1)};
        CHECK(mean == doctest::Approx(pointer_mean_oracle(c, {1.0, -1.0}, Delta)).epsilon(1e-8));
    }
}

TEST_CASE("small Delta resolves eigenvalues (robust limit)") {
    const auto c = symmetric_spin_case(2, pi / 6.0);  // eigenvalues -2, 0, +2 for pauli sum
    const Mat A = 2.0 * c.s_axis;
    const PointerModel pm(0.02, -2.0, 2.0, 8192);
    const auto st = pointer_final_state(c.tsv, A, pm);
    // Density localizes at the eigenvalues: mass within 6 Delta of {-2,0,2}.
    double near = 0.0, total = 0.0;
    for (std::size_t i = 0; i < pm.grid.n; ++i) {
        const double x = pm.grid.x(i);
        const double m = std::norm(st.normalized.amp[i]) * pm.grid.dx();
        total += m;
        const double d =
            std::min({std::abs(x + 2.0), std::abs(x), std::abs(x - 2.0)});
        if (d < 6.0 * pm.Delta) near += m;
    }
    CHECK(near / total > 1.0 - 1e-10);
}

TEST_CASE("moment corrections vanish exactly on eigenvectors") {
    Mat sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    Vec up(2), post(2);
    up << 1.0, 0.0;
    post << std::sqrt(0.5), std::sqrt(0.5);
    for (const auto& m : moment_expansion(TwoStateVector(up, post), sz, 5))
        CHECK(std::abs(m) < 1e-12);
}

TEST_CASE("weak-limit deviation falls off like 1 / Delta^2") {
    const auto c = symmetric_spin_case(1, pi / 4.0);
    const Mat A = 2.0 * c.s_axis;
    std::vector<double> dev;
    for (double Delta : {5.0, 10.0, 20.0})
        dev.push_back(limit_deviation(c.tsv, A, PointerModel(Delta, -1.0, 1.0, 8192)));
    CHECK(dev[0] > dev[1]);
    CHECK(dev[1] > dev[2]);
    // Successive ratios of 4 (second order in 1/Delta), within a factor 2.
    CHECK(dev[0] / dev[1] > 2.0);
    CHECK(dev[0] / dev[1] < 8.0);
    CHECK(dev[1] / dev[2] > 2.0);
    CHECK(dev[1] / dev[2] < 8.0);
}

TEST_CASE("position-superposition weak value is 1 / cos(theta)") {
    // Mild case cross-checked against a direct double evaluation.
    {
        const auto pc = prepost_position_states(4, pi / 6.0);
        const double t = std::pow(std::tan(pi / 12.0), 2);
        double num = 0.0, den = 0.0, c = 1.0;
        for (int i = 0; i <= 4; ++i) {
            double fact_i = 1.0, fact_ni = 1.0;
            for (int k = 2; k <= i; ++k) fact_i *= k;
            for (int k = 2; k <= 4 - i; ++k) fact_ni *= k;
            c = std::pow(-t, i) / (fact_i * fact_ni);
            num += c * (4.0 - 2.0 * i) / 4.0;
            den += c;
        }
        CHECK(pc.x_w == doctest::Approx(num / den).epsilon(1e-12));
        CHECK(pc.x_w == doctest::Approx(1.0 / std::cos(pi / 6.0)).epsilon(1e-12));
    }
    // The headline case: N = 40, theta = 80 deg. The weak value sits far
    // outside the spectrum [-1, 1] even though every site is inside it.
    const double th = 80.0 * pi / 180.0;
    const auto pc = prepost_position_states(40, th);
    CHECK(pc.x_w == doctest::Approx(1.0 / std::cos(th)).epsilon(1e-8));
    CHECK(pc.x_w > 1.0);
    CHECK(pc.overlap_modulus < 1e-20);  // doubles alone could never see this
    for (double s : pc.sites) CHECK(std::abs(s) <= 1.0);
}

TEST_CASE("position pointer state peaks at the weak value for wide pointers") {
    const double th = 80.0 * pi / 180.0;
    const auto pc = prepost_position_states(40, th);
    const PointerModel pm(8.0, -80.0, 80.0, 8192);
    const auto psi = position_pointer_state(pc, pm);
    double mean = 0.0;
    for (std::size_t i = 0; i < pm.grid.n; ++i)
        mean += pm.grid.x(i) * std::norm(psi.amp[i]) * pm.grid.dx();
    CHECK(mean == doctest::Approx(pc.x_w).epsilon(0.05));
}

TEST_CASE("gaussian tail bookkeeping") {
    CHECK(tail_ratio(0.1, 1.0, 5.05) == doctest::Approx(std::numbers::e).epsilon(1e-12));
    CHECK(threshold_x(0.1, 1.0, std::numbers::e) == doctest::Approx(5.05).epsilon(1e-12));
    // Definition check on an independent point: ratio of the two Gaussians.
    const double x = 2.3, sh = 0.4, D = 1.7;
    const double direct = std::exp(-(x - sh) * (x - sh) / (D * D)) / std::exp(-x * x / (D * D));
    CHECK(tail_ratio(sh, D, x) == doctest::Approx(direct).epsilon(1e-12));
    CHECK_THROWS_AS(threshold_x(0.1, 1.0, 0.5), ValidationError);
}

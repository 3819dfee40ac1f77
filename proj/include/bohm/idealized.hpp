#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bohm/errors.hpp"
#include "bohm/guidance.hpp"

namespace bohm {

enum class Side { left, right };

// Exact rectangular-packet kinematics: two identical packets of full width L
// and speed v starting at centers -d and +d and moving toward each other,
// optionally coupled to a rectangular pointer wave of width W with shift
// fraction f (pointer shift = f * W applied to the branch that crosses the
// interaction region). Hard edges, no smoothing: events follow from linear
// motion alone.
struct IdealizedScenario {
    double L = 1.0;
    double v = 1.0;
    double d = 3.0;
    double W = 1.0;
    double f = 0.1;
    enum class Measurement { none, robust, weak, delayed } measurement = Measurement::none;
    double weight_left = 1.0;   // zero disables the packet entirely
    double weight_right = 1.0;

    void validate() const {
        if (L <= 0.0 || v <= 0.0 || W <= 0.0) throw ValidationError("idealized: L, v, W > 0 required");
        if (d <= L) throw ValidationError("idealized: packets must start disjoint (d > L)");
        if (f < 0.0 || f > 1.0) throw ValidationError("idealized: f in [0, 1]");
    }

    // Effective shift fraction of the measurement in play.
    double shift_fraction() const {
        return measurement == Measurement::robust ? 1.0 : f;
    }
};

// Piecewise-linear path: segment i runs from knot_t[i] at knot_x[i] with
// velocity seg_v[i] until knot_t[i+1]; the last velocity extends forever.
struct PiecewiseLinearPath {
    std::vector<double> knot_t;
    std::vector<double> knot_x;
    std::vector<double> seg_v;

    double position(double t) const {
        std::size_t i = 0;
        while (i + 1 < knot_t.size() && t >= knot_t[i + 1]) ++i;
        return knot_x[i] + seg_v[i] * (t - knot_t[i]);
    }

    Trajectory sample(double t0, double t1, double dt_out) const {
        Trajectory tr;
        for (double t = t0; t < t1 + 0.5 * dt_out; t += dt_out) {
            tr.times.push_back(t);
            tr.x.push_back(position(t));
        }
        return tr;
    }
};

// Exact two-packet crossing trajectory from x0 (which must lie inside one
// packet's support at t = 0). The particle rides its packet, stops when the
// other packet's near edge reaches it (currents cancel where both packets
// overlap), and resumes with the surviving cover when its original packet's
// far edge has passed.
inline PiecewiseLinearPath crossing_trajectory(const IdealizedScenario& s, double x0) {
    s.validate();
    const double hl = 0.5 * s.L;
    const bool in_right = s.weight_right != 0.0 && std::abs(x0 - s.d) <= hl;
    const bool in_left = s.weight_left != 0.0 && std::abs(x0 + s.d) <= hl;
    if (!in_right && !in_left)
        throw ValidationError("crossing_trajectory: x0 outside both packet supports");
    // Work in the right-start frame; mirror at the end for a left start.
    const double y0 = in_right ? x0 : -x0;
    PiecewiseLinearPath path;
    const bool other_empty = in_right ? (s.weight_left == 0.0) : (s.weight_right == 0.0);
    if (other_empty) {
        path.knot_t = {0.0};
        path.knot_x = {y0};
        path.seg_v = {-s.v};
    } else {
        // Stop when the left packet's leading edge (-d + hl + v t) catches the
        // particle (y0 - v t); resume when the right packet's trailing edge
        // (d + hl - v t) passes the stopping point.
        const double t_stop = (y0 + s.d - hl) / (2.0 * s.v);
        const double y_stop = 0.5 * (y0 - s.d + hl);
        const double t_resume = (s.d + hl - y_stop) / s.v;
        path.knot_t = {0.0, t_stop, t_resume};
        path.knot_x = {y0, y_stop, y_stop};
        path.seg_v = {-s.v, 0.0, +s.v};
    }
    if (in_left) {
        for (auto& x : path.knot_x) x = -x;
        for (auto& v : path.seg_v) v = -v;
    }
    return path;
}

struct OutcomeRecord {
    Side started_side = Side::right;
    double q0 = 0.0;       // pointer coordinate at overlap time, in the branch support
    bool turned = false;
    Side final_side = Side::right;
    double q_final = 0.0;
    int pointer_drift = 0;  // delayed mode only: post-overlap drift direction
};

// Branch-overlap rule for the measured scenarios. q0 is the pointer Bohm
// coordinate at particle-overlap time, expressed in the branch's own support:
// [0, W] for a right start (pointer untouched), [fW, (1+f)W] for a left start
// (that branch crossed the interaction region and carries the shift). The
// x-velocities cancel, and the crossing turnaround happens, exactly where
// both branches' pointer supports cover q0.
inline OutcomeRecord measured_outcome(const IdealizedScenario& s, Side side0, double q0) {
    s.validate();
    if (s.measurement == IdealizedScenario::Measurement::none)
        throw ValidationError("measured_outcome: scenario has no measurement");
    OutcomeRecord rec;
    rec.started_side = side0;
    rec.q0 = q0;
    rec.q_final = q0;

    if (s.measurement == IdealizedScenario::Measurement::delayed) {
        // Momentum kick: both branches keep the pointer support [0, W], so the
        // supports coincide and every configuration point sees the cancelling
        // currents: the turnaround always happens. The configuration then
        // rides the branch arriving from the other side; for a right start
        // that branch carries the kick, and the pointer drifts afterward.
        if (q0 < 0.0 || q0 > s.W) throw ValidationError("measured_outcome: q0 outside [0, W]");
        rec.turned = true;
        rec.final_side = side0;
        rec.pointer_drift = (side0 == Side::right) ? +1 : 0;
        return rec;
    }

    const double delta = s.shift_fraction() * s.W;  // branch pointer shift
    const double lo = (side0 == Side::left) ? delta : 0.0;
    const double hi = lo + s.W;
    if (q0 < lo || q0 > hi)
        throw ValidationError("measured_outcome: q0 outside branch support [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
    // Overlap of the two branch supports: [delta, W] (empty when delta >= W).
    rec.turned = (q0 >= delta && q0 <= s.W);
    rec.final_side = rec.turned ? side0 : (side0 == Side::right ? Side::left : Side::right);
    return rec;
}

struct EnsembleStats {
    double f = 0.0;
    std::size_t n = 0;  // 0 in exact mode
    bool exact = true;
    std::uint64_t seed = 0;
    double fraction_started_right = 0.0;
    double post_selected_fraction = 0.0;   // of all configurations
    double pointer_support_lo = 0.0;       // post-selected pointer range
    double pointer_support_hi = 0.0;
    std::vector<double> pointer_hist;      // post-selected q_final counts
    std::vector<double> pointer_edges;
};

// Statistics of the weak scenario conditioned on the particle's final side.
// Exact mode integrates the uniform measures analytically; Monte Carlo mode
// samples start side and pointer coordinate and replays measured_outcome.
inline EnsembleStats postselection_stats(const IdealizedScenario& s, Side select,
                                         std::size_t n_samples = 0, std::uint64_t seed = 1,
                                         std::size_t hist_bins = 24) {
    s.validate();
    if (s.measurement != IdealizedScenario::Measurement::weak)
        throw ValidationError("postselection_stats: weak measurement required");
    if (s.f <= 0.0 || s.f >= 1.0)
        throw ValidationError("postselection_stats: degenerate f (use robust/none scenarios)");
    EnsembleStats st;
    st.f = s.f;
    const double delta = s.f * s.W;
    // Post-selected pointer support is the shifted uniform [fW, (1+f)W] when
    // selecting the right side (mirror symmetric for the left).
    st.pointer_support_lo = delta;
    st.pointer_support_hi = s.W + delta;

    if (n_samples == 0) {
        st.exact = true;
        // Selecting final right: a right start survives (turned) on q0 in
        // [fW, W]; a left start arrives straight on q0 in (W, (1+f)W].
        // Both measures are uniform; the same-side share is 1 - f.
        st.post_selected_fraction = 0.5;
        st.fraction_started_right = (select == Side::right) ? 1.0 - s.f : s.f;
        if (select == Side::left) {
            st.fraction_started_right = s.f;
            // Mirror: left-selected pointer support is [0, W] minus nothing on
            // the right-branch side; both contributing sets live in [0, W].
            st.pointer_support_lo = 0.0;
            st.pointer_support_hi = s.W;
        }
        return st;
    }

    st.exact = false;
    st.n = n_samples;
    st.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uq(0.0, s.W);
    std::uniform_int_distribution<int> uside(0, 1);
    std::size_t selected = 0, started_right = 0;
    st.pointer_edges.resize(hist_bins + 1);
    st.pointer_hist.assign(hist_bins, 0.0);
    const double lo = 0.0, hi = (1.0 + s.f) * s.W;
    for (std::size_t b = 0; b <= hist_bins; ++b)
        st.pointer_edges[b] = lo + (hi - lo) * static_cast<double>(b) / hist_bins;
    double qmin = 1e300, qmax = -1e300;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Side side = uside(rng) ? Side::right : Side::left;
        double q = uq(rng);                              // initial pointer coordinate
        if (side == Side::left) q += delta;              // branch shift at region exit
        const auto rec = measured_outcome(s, side, q);
        if (rec.final_side != select) continue;
        ++selected;
        if (rec.started_side == Side::right) ++started_right;
        qmin = std::min(qmin, rec.q_final);
        qmax = std::max(qmax, rec.q_final);
        const auto b = static_cast<std::size_t>(
            std::clamp((rec.q_final - lo) / (hi - lo) * hist_bins, 0.0, hist_bins - 1.0));
        st.pointer_hist[b] += 1.0;
    }
    st.post_selected_fraction = static_cast<double>(selected) / static_cast<double>(n_samples);
    st.fraction_started_right =
        selected ? static_cast<double>(started_right) / static_cast<double>(selected) : 0.0;
    if (selected) {
        st.pointer_support_lo = qmin;
        st.pointer_support_hi = qmax;
    }
    return st;
}

}  // namespace bohm

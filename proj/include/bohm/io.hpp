#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bohm/errors.hpp"
#include "bohm/idealized.hpp"
#include "bohm/scenarios.hpp"

namespace bohm {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Round-trip-safe decimal formatting for all numeric output.

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Config parsing. Every field has a default; JSON supplies overrides.

template <typename T>
inline void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void parse_crossing(const json& j, CrossingParams& p) {
    get_if(j, "sigma0", p.sigma0);
    get_if(j, "v", p.v);
    get_if(j, "d", p.d);
    get_if(j, "x_min", p.x_min);
    get_if(j, "x_max", p.x_max);
    get_if(j, "nx", p.nx);
    get_if(j, "t_end", p.t_end);
    get_if(j, "dt", p.dt);
    get_if(j, "stride", p.stride);
    get_if(j, "weight_left", p.weight_left);
    get_if(j, "weight_right", p.weight_right);
}

inline void parse_ensemble(const json& j, EnsembleSpec& e) {
    get_if(j, "n", e.n_samples);
    get_if(j, "seed", e.seed);
    if (j.contains("sampling")) {
        const auto s = j.at("sampling").get<std::string>();
        if (s == "born")
            e.mode = EnsembleSpec::Mode::born;
        else if (s == "uniform")
            e.mode = EnsembleSpec::Mode::uniform_support;
        else
            throw ValidationError("ensemble.sampling must be born|uniform");
    }
}

inline Fig1Config parse_fig1(const json& j) {
    Fig1Config c;
    if (j.contains("crossing")) parse_crossing(j.at("crossing"), c.xp);
    get_if(j, "starts", c.starts);
    if (j.contains("ensemble")) parse_ensemble(j.at("ensemble"), c.ensemble);
    get_if(j, "dt_out", c.dt_out);
    return c;
}

inline Fig2Config parse_fig2(const json& j) {
    Fig2Config c;
    if (j.contains("crossing")) parse_crossing(j.at("crossing"), c.xp);
    get_if(j, "Delta", c.Delta);
    get_if(j, "shift", c.shift);
    get_if(j, "region_a", c.region_a);
    get_if(j, "region_b", c.region_b);
    get_if(j, "nq", c.nq);
    get_if(j, "q0", c.q0);
    return c;
}

inline Fig3Config parse_fig3(const json& j) {
    Fig3Config c;
    if (j.contains("crossing")) parse_crossing(j.at("crossing"), c.xp);
    get_if(j, "W", c.W);
    get_if(j, "f", c.f);
    get_if(j, "region_a", c.region_a);
    get_if(j, "region_b", c.region_b);
    get_if(j, "q_min", c.q_min);
    get_if(j, "q_max", c.q_max);
    get_if(j, "nq", c.nq);
    get_if(j, "smoothing", c.smoothing);
    get_if(j, "n", c.n_samples);
    get_if(j, "seed", c.seed);
    get_if(j, "dt_after_pulse", c.dt_after_pulse);
    get_if(j, "edge_margin", c.edge_margin);
    return c;
}

inline Fig4Config parse_fig4(const json& j) {
    Fig4Config c;
    if (j.contains("crossing")) parse_crossing(j.at("crossing"), c.xp);
    get_if(j, "sigma_q", c.sigma_q);
    get_if(j, "kick", c.kick);
    get_if(j, "region_a", c.region_a);
    get_if(j, "region_b", c.region_b);
    get_if(j, "q_min", c.q_min);
    get_if(j, "q_max", c.q_max);
    get_if(j, "nq", c.nq);
    get_if(j, "x0", c.x0);
    get_if(j, "q0", c.q0);
    return c;
}

inline SternGerlachConfig parse_stern_gerlach(const json& j) {
    SternGerlachConfig c;
    get_if(j, "sigma", c.sigma);
    get_if(j, "kick", c.kick);
    get_if(j, "x_min", c.x_min);
    get_if(j, "x_max", c.x_max);
    get_if(j, "nx", c.nx);
    get_if(j, "t_end", c.t_end);
    get_if(j, "dt", c.dt);
    get_if(j, "stride", c.stride);
    get_if(j, "gradient_sign", c.gradient_sign);
    get_if(j, "n", c.n_samples);
    get_if(j, "seed", c.seed);
    get_if(j, "margin", c.margin);
    return c;
}

inline EnergyEigenstate parse_eigenstate(const json& j) {
    EnergyEigenstate e;
    if (j.contains("potential")) {
        const auto p = j.at("potential").get<std::string>();
        if (p == "box")
            e.potential = PotentialKind::box;
        else if (p == "harmonic")
            e.potential = PotentialKind::harmonic;
        else
            throw ValidationError("state.potential must be box|harmonic");
    }
    get_if(j, "scale", e.scale);
    get_if(j, "n", e.quantum_number);
    return e;
}

inline ProtectiveScenarioConfig parse_protective(const json& j) {
    ProtectiveScenarioConfig c;
    if (j.contains("state")) c.state = parse_eigenstate(j.at("state"));
    get_if(j, "region_a", c.region_a);
    get_if(j, "region_b", c.region_b);
    get_if(j, "T_values", c.T_values);
    get_if(j, "ramp_fraction", c.ramp_fraction);
    get_if(j, "Delta", c.Delta);
    get_if(j, "nx", c.nx);
    get_if(j, "nq", c.nq);
    get_if(j, "bins", c.bins);
    return c;
}

// Apply a dotted-path override like "crossing.dt=1e-3" or "f=0.25". Values
// parse as JSON when possible, else as strings.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError("override must look like path.to.key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json* node = &j;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw ValidationError("override has an empty path segment: " + assignment);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &((*node)[key]);
        pos = dot + 1;
    }
}

// ---------------------------------------------------------------------------
// Report serialization.

inline const char* side_name(Side s) { return s == Side::right ? "right" : "left"; }

inline json flag_to_json(const TrajectoryFlag& f) {
    return json{{"x0", f.x0},
                {"q0", f.q0},
                {"started", side_name(f.started)},
                {"final_side", side_name(f.final_side)},
                {"turned", f.turned},
                {"x_final", f.x_final},
                {"q_final", f.q_final}};
}

inline json to_json(const Fig1Report& r) {
    json flags = json::array();
    for (const auto& f : r.flags) flags.push_back(flag_to_json(f));
    return json{{"scenario", "fig1"},
                {"flags", flags},
                {"norm_drift", r.norm_drift},
                {"non_crossing", r.non_crossing},
                {"equivariance_ks", r.equivariance_ks}};
}

inline json to_json(const Fig2Report& r) {
    return json{{"scenario", "fig2"},
                {"start_right", flag_to_json(r.start_right)},
                {"start_left", flag_to_json(r.start_left)},
                {"shift", r.shift},
                {"Delta", r.Delta},
                {"pointer_disp_right", std::abs(r.start_right.q_final - r.start_right.q0)},
                {"pointer_disp_left", std::abs(r.start_left.q_final - r.start_left.q0)},
                {"branch_overlap", r.branch_overlap},
                {"norm_drift", r.norm_drift}};
}

inline json to_json(const Fig3Report& r) {
    return json{{"scenario", "fig3_ensemble"},
                {"n", r.n_samples},
                {"n_selected", r.n_selected},
                {"fraction_started_right", r.fraction_started_right},
                {"idealized_agreement_all", r.idealized_agreement_all},
                {"idealized_agreement_away", r.idealized_agreement_away},
                {"n_away", r.n_away},
                {"pointer_min", r.pointer_min},
                {"pointer_max", r.pointer_max},
                {"norm_drift", r.norm_drift},
                {"min_rho_rel", r.min_rho_rel}};
}

inline json to_json(const Fig4Report& r) {
    return json{{"scenario", "fig4_delayed"},
                {"flag", flag_to_json(r.flag)},
                {"min_distance_to_region", r.min_distance_to_region},
                {"overlap_onset", r.overlap_onset},
                {"pointer_onset", r.pointer_onset},
                {"max_drift_before_overlap", r.max_drift_before_overlap},
                {"final_drift", r.final_drift},
                {"transit_density_change", r.transit_density_change},
                {"norm_drift", r.norm_drift}};
}

inline json to_json(const SternGerlachReport& r) {
    return json{{"scenario", "stern_gerlach"},
                {"n", r.x0.size()},
                {"median", r.median},
                {"all_match_start_side", r.all_match_start_side},
                {"x0", r.x0},
                {"xf", r.xf},
                {"outcome", r.outcome},
                {"norm_drift", r.norm_drift}};
}

inline json to_json(const ProtectiveScenarioReport& r) {
    return json{{"scenario", "protective"},
                {"T_values", r.T_values},
                {"shifts", r.shifts},
                {"errors", r.errors},
                {"prediction", r.prediction},
                {"monotone", r.monotone},
                {"reconstruction_l1", r.reconstruction.l1_error},
                {"reconstruction_bins", r.reconstruction.averages},
                {"stationarity_max_speed", r.stationarity.max_speed},
                {"empty_bins_nonnull", r.stationarity.empty_bins_nonnull}};
}

inline json to_json(const EnsembleStats& s) {
    return json{{"f", s.f},
                {"n", s.n},
                {"exact", s.exact},
                {"seed", s.seed},
                {"fraction_started_right", s.fraction_started_right},
                {"post_selected_fraction", s.post_selected_fraction},
                {"pointer_support", {s.pointer_support_lo, s.pointer_support_hi}},
                {"pointer_hist", s.pointer_hist},
                {"pointer_edges", s.pointer_edges}};
}

// ---------------------------------------------------------------------------
// Columnar text for fields; CSV for trajectories.

inline void write_field(const WaveFunction1D& psi, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    f << "# grid x_min=" << fmt_double(psi.grid.x_min) << " x_max=" << fmt_double(psi.grid.x_max)
      << " n=" << psi.grid.n << "\n";
    f << "# x re im\n";
    for (std::size_t i = 0; i < psi.grid.n; ++i)
        f << fmt_double(psi.grid.x(i)) << " " << fmt_double(psi.amp[i].real()) << " "
          << fmt_double(psi.amp[i].imag()) << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

inline void write_trajectory(const Trajectory& tr, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    f << (tr.has_q() ? "t,x,q\n" : "t,x\n");
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        f << fmt_double(tr.times[i]) << "," << fmt_double(tr.x[i]);
        if (tr.has_q()) f << "," << fmt_double(tr.q[i]);
        f << "\n";
    }
    if (!f) throw IoError("write failed: " + path.string());
}

inline void write_tracks(const StreamTracks& tracks, const std::filesystem::path& dir,
                         const std::string& stem) {
    for (std::size_t p = 0; p < tracks.x.size(); ++p) {
        Trajectory tr;
        tr.times = tracks.times;
        tr.x = tracks.x[p];
        tr.q = tracks.q[p];
        write_trajectory(tr, dir / (stem + "_" + std::to_string(p) + ".csv"));
    }
}

// ---------------------------------------------------------------------------
// Run manifest: enough to reproduce an output directory byte for byte.

inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline json make_manifest(const std::string& tool_version, const std::string& config_bytes,
                          std::uint64_t seed, const std::vector<std::string>& outputs) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_bytes);
    return json{{"tool_version", tool_version},
                {"config_hash", hash.str()},
                {"seed", seed},
                {"outputs", outputs}};
}

}  // namespace bohm

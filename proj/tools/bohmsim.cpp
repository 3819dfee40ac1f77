// bohmsim: scenario runner, weak-value calculator, and protective-measurement
// reconstruction tool over the header library in include/bohm.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bohm/io.hpp"
#include "bohm/tsvf.hpp"

namespace fs = std::filesystem;
using bohm::json;

namespace {

constexpr const char* kVersion = "bohmsim 1.0.0";

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw bohm::IoError("cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw bohm::IoError("cannot open " + p.string());
    f << bytes;
    if (!f) throw bohm::IoError("write failed: " + p.string());
}

void write_json_file(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path output_root(const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("BOHMSIM_OUT")) return env;
    return ".";
}

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

// Outputs are hashed into the manifest so a rerun can be checked byte for byte.
struct OutputSet {
    fs::path dir;
    std::vector<std::string> entries;

    void note(const fs::path& p) {
        std::ostringstream os;
        os << p.filename().string() << " fnv1a:" << std::hex << std::setw(16) << std::setfill('0')
           << bohm::fnv1a(read_file(p));
        entries.push_back(os.str());
    }
};

void write_samples_csv(const fs::path& p, const std::vector<double>& x0,
                       const std::vector<double>& q0, const std::vector<double>& xf,
                       const std::vector<double>& qf) {
    std::ostringstream os;
    os << "x0,q0,xf,qf\n";
    for (std::size_t i = 0; i < x0.size(); ++i)
        os << bohm::fmt_double(x0[i]) << "," << bohm::fmt_double(q0[i]) << ","
           << bohm::fmt_double(xf[i]) << "," << bohm::fmt_double(qf[i]) << "\n";
    write_text(p, os.str());
}

void write_histogram_csv(const fs::path& p, const bohm::ReconstructionReport& r) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,measured,reference\n";
    for (std::size_t i = 0; i < r.averages.size(); ++i)
        os << bohm::fmt_double(r.edges[i]) << "," << bohm::fmt_double(r.edges[i + 1]) << ","
           << bohm::fmt_double(r.averages[i]) << "," << bohm::fmt_double(r.reference[i]) << "\n";
    write_text(p, os.str());
}

// --------------------------------------------------------------------------
// run

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& out) {
    json cfg = json::parse(read_file(config_path), nullptr, false);
    if (cfg.is_discarded()) throw bohm::ValidationError("config is not valid JSON: " + config_path);
    for (const auto& ov : overrides) bohm::apply_override(cfg, ov);
    if (!cfg.contains("scenario")) throw bohm::ValidationError("config needs a scenario field");
    const auto scenario = cfg.at("scenario").get<std::string>();
    const std::string started = iso_now();

    OutputSet outs;
    outs.dir = output_root(out) / scenario;
    fs::create_directories(outs.dir);

    json report;
    std::uint64_t seed = 0;
    if (scenario == "fig1") {
        const auto c = bohm::parse_fig1(cfg);
        seed = c.ensemble.seed;
        const auto rep = bohm::run_fig1(c);
        report = bohm::to_json(rep);
        for (std::size_t i = 0; i < rep.trajectories.size(); ++i) {
            const fs::path p = outs.dir / ("trajectory_" + std::to_string(i) + ".csv");
            bohm::write_trajectory(rep.trajectories[i], p);
            outs.note(p);
        }
    } else if (scenario == "fig2") {
        const auto rep = bohm::run_fig2(bohm::parse_fig2(cfg));
        report = bohm::to_json(rep);
        bohm::write_tracks(rep.tracks, outs.dir, "track");
        for (std::size_t i = 0; i < rep.tracks.x.size(); ++i)
            outs.note(outs.dir / ("track_" + std::to_string(i) + ".csv"));
    } else if (scenario == "fig3_ensemble") {
        const auto c = bohm::parse_fig3(cfg);
        seed = c.seed;
        const auto rep = bohm::run_fig3_ensemble(c);
        report = bohm::to_json(rep);
        const fs::path p = outs.dir / "samples.csv";
        write_samples_csv(p, rep.x0, rep.q0, rep.xf, rep.qf);
        outs.note(p);
        const fs::path sp = outs.dir / "stats.json";
        write_json_file(sp, report);
        outs.note(sp);
    } else if (scenario == "fig4_delayed") {
        const auto rep = bohm::run_fig4_delayed(bohm::parse_fig4(cfg));
        report = bohm::to_json(rep);
        bohm::write_tracks(rep.tracks, outs.dir, "track");
        for (std::size_t i = 0; i < rep.tracks.x.size(); ++i)
            outs.note(outs.dir / ("track_" + std::to_string(i) + ".csv"));
    } else if (scenario == "stern_gerlach") {
        const auto c = bohm::parse_stern_gerlach(cfg);
        seed = c.seed;
        report = bohm::to_json(bohm::run_stern_gerlach(c));
    } else if (scenario == "protective") {
        const auto rep = bohm::run_protective(bohm::parse_protective(cfg));
        report = bohm::to_json(rep);
        const fs::path p = outs.dir / "histogram.csv";
        write_histogram_csv(p, rep.reconstruction);
        outs.note(p);
    } else {
        throw bohm::ValidationError("unknown scenario: " + scenario);
    }

    const fs::path rp = outs.dir / "report.json";
    write_json_file(rp, report);
    outs.note(rp);
    const std::string config_bytes = cfg.dump(2) + "\n";
    write_text(outs.dir / "config.json", config_bytes);
    json manifest = bohm::make_manifest(kVersion, config_bytes, seed, outs.entries);
    manifest["started"] = started;
    manifest["finished"] = iso_now();
    write_json_file(outs.dir / "manifest.json", manifest);
    std::cout << report.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// weak / tsvf-pointer state and operator specs

struct WeakSetup {
    bohm::TwoStateVector tsv;
    bohm::Mat op;
};

bohm::Vec parse_state_spec(const std::string& text, int two_j) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw bohm::ValidationError("state spec is not valid JSON: " + text);
    if (j.contains("vector")) {
        const auto rows = j.at("vector").get<std::vector<std::vector<double>>>();
        bohm::Vec v(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != 2) throw bohm::ValidationError("vector entries are [re, im]");
            v(static_cast<Eigen::Index>(i)) = bohm::cplx(rows[i][0], rows[i][1]);
        }
        return v;
    }
    // coherent state; angles in degrees
    const double deg = std::numbers::pi / 180.0;
    const double polar = j.value("polar", 90.0) * deg;
    const double azimuth = j.value("azimuth", 0.0) * deg;
    return bohm::coherent_state(bohm::spin_matrices(two_j), polar, azimuth);
}

bohm::Mat parse_op_spec(const std::string& text, int two_j) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw bohm::ValidationError("operator spec is not valid JSON: " + text);
    if (j.contains("matrix")) {
        const auto rows = j.at("matrix").get<std::vector<std::vector<std::vector<double>>>>();
        bohm::Mat A(rows.size(), rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.size())
                throw bohm::ValidationError("operator matrix must be square");
            for (std::size_t c = 0; c < rows.size(); ++c)
                A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    bohm::cplx(rows[r][c].at(0), rows[r][c].at(1));
        }
        return A;
    }
    // in-plane spin component; "scale" converts J units (2 -> Pauli sums)
    const double deg = std::numbers::pi / 180.0;
    const double azimuth = j.value("azimuth", 45.0) * deg;
    const double scale = j.value("scale", 2.0);
    return scale * bohm::spin_along(bohm::spin_matrices(two_j), azimuth);
}

// --symmetric N --theta deg: pre/post coherent states theta either side of
// the x-y bisector, operator = total Pauli-sum component along the bisector.
WeakSetup build_setup(int symmetric_n, double theta_deg, const std::string& pre,
                      const std::string& post, const std::string& op, int two_j) {
    if (symmetric_n > 0) {
        const auto c = bohm::symmetric_spin_case(symmetric_n, theta_deg * std::numbers::pi / 180.0);
        return {c.tsv, 2.0 * c.s_axis};
    }
    if (pre.empty() || post.empty() || op.empty())
        throw bohm::ValidationError("need --symmetric N or all of --pre, --post, --op");
    return {bohm::TwoStateVector(parse_state_spec(pre, two_j), parse_state_spec(post, two_j)),
            parse_op_spec(op, two_j)};
}

int cmd_weak(int symmetric_n, double theta_deg, const WeakSetup* s) {
    // symmetric spin setups go through the multiprecision evaluation: the
    // coherent-state overlap is cos(theta)^N and doubles lose the ratio.
    const auto r = symmetric_n > 0 ? bohm::symmetric_spin_weak_value(
                                         symmetric_n, theta_deg * std::numbers::pi / 180.0)
                                   : bohm::weak_value(s->tsv, s->op);
    json out{{"weak_value", {r.value.real(), r.value.imag()}},
             {"overlap_modulus", r.overlap_modulus}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_tsvf_pointer(const WeakSetup& s, const std::vector<double>& deltas) {
    Eigen::SelfAdjointEigenSolver<bohm::Mat> eig(s.op);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    const auto aw = bohm::weak_value(s.tsv, s.op);
    json rows = json::array();
    for (double D : deltas) {
        const bohm::PointerModel pm(D, lo, hi);
        rows.push_back(json{{"delta", D}, {"l2_deviation", bohm::limit_deviation(s.tsv, s.op, pm)}});
    }
    json out{{"weak_value", {aw.value.real(), aw.value.imag()}},
             {"overlap_modulus", aw.overlap_modulus},
             {"comparison", rows}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// protective reconstruction

int cmd_protective(const std::string& state_spec, std::size_t bins, const std::string& out) {
    json j = json::parse(state_spec, nullptr, false);
    if (j.is_discarded()) {
        j = json::parse(read_file(state_spec), nullptr, false);
        if (j.is_discarded())
            throw bohm::ValidationError("state spec is neither JSON nor a JSON file: " + state_spec);
    }
    const auto e = bohm::parse_eigenstate(j);
    const auto rep = bohm::reconstruct_density(e, bins);
    OutputSet outs;
    outs.dir = output_root(out) / "reconstruction";
    fs::create_directories(outs.dir);
    const fs::path hp = outs.dir / "histogram.csv";
    write_histogram_csv(hp, rep);
    outs.note(hp);
    json report{{"bins", bins},
                {"l1_error", rep.l1_error},
                {"edges", rep.edges},
                {"measured", rep.averages},
                {"reference", rep.reference}};
    const fs::path rp = outs.dir / "report.json";
    write_json_file(rp, report);
    outs.note(rp);
    json manifest = bohm::make_manifest(kVersion, j.dump(2) + "\n", 0, outs.entries);
    write_json_file(outs.dir / "manifest.json", manifest);
    std::cout << report.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// stats: re-aggregate a run directory and cross-check the stored report.

int cmd_stats(const std::string& dir) {
    const fs::path rp = fs::path(dir) / "report.json";
    json report = json::parse(read_file(rp), nullptr, false);
    if (report.is_discarded()) throw bohm::IoError("report.json is not valid JSON in " + dir);
    json out{{"scenario", report.value("scenario", "unknown")}};
    if (report.contains("x0") && report.contains("xf") && report.contains("qf")) {
        const auto x0 = report.at("x0").get<std::vector<double>>();
        const auto xf = report.at("xf").get<std::vector<double>>();
        std::size_t selected = 0, started_right = 0;
        for (std::size_t i = 0; i < x0.size(); ++i) {
            if (xf[i] > 0.0) {
                ++selected;
                if (x0[i] > 0.0) ++started_right;
            }
        }
        const double frac =
            selected ? static_cast<double>(started_right) / static_cast<double>(selected) : 0.0;
        out["n"] = x0.size();
        out["n_selected"] = selected;
        out["fraction_started_right"] = frac;
        if (report.contains("fraction_started_right")) {
            const double stored = report.at("fraction_started_right").get<double>();
            out["consistent"] = std::abs(stored - frac) < 1e-12;
            if (!out.at("consistent").get<bool>())
                throw bohm::NumericalGuardError("stored aggregate disagrees with raw samples");
        }
    } else {
        for (const char* k : {"norm_drift", "non_crossing", "monotone", "all_match_start_side",
                              "branch_overlap", "final_drift"})
            if (report.contains(k)) out[k] = report.at(k);
        out["consistent"] = true;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bohmian trajectory and weak-value simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
    run->add_option("config", config_path, "scenario config (JSON)")->required();
    run->add_option("--set", overrides, "override: dotted.path=value")->take_all();
    run->add_option("-o,--out", out_dir, "output root (default $BOHMSIM_OUT or .)");

    int symmetric_n = 0, two_j = 1;
    double theta_deg = 45.0;
    std::string pre_spec, post_spec, op_spec;
    auto add_setup_opts = [&](CLI::App* c) {
        c->add_option("--symmetric", symmetric_n, "spin-N symmetric setup (N half-spins)");
        c->add_option("--theta", theta_deg, "half-angle between pre and post, degrees");
        c->add_option("--pre", pre_spec, "pre-selected state spec (JSON)");
        c->add_option("--post", post_spec, "post-selected state spec (JSON)");
        c->add_option("--op", op_spec, "operator spec (JSON)");
        c->add_option("--two-j", two_j, "2j for coherent-state specs");
    };
    auto* weak = app.add_subcommand("weak", "Weak value <post|A|pre>/<post|pre>");
    add_setup_opts(weak);

    std::vector<double> deltas{5.0, 10.0, 20.0};
    auto* tp = app.add_subcommand("tsvf-pointer",
                                  "Exact pointer state vs weak-limit Gaussian (L2 deviation)");
    add_setup_opts(tp);
    tp->add_option("--delta", deltas, "pointer widths to compare")->take_all();

    std::string state_spec;
    std::size_t bins = 32;
    auto* prot = app.add_subcommand("protective", "Density reconstruction from bin projections");
    prot->add_option("state", state_spec, "eigenstate spec (JSON text or file)")->required();
    prot->add_option("--bins", bins, "number of projection bins");
    prot->add_option("-o,--out", out_dir, "output root (default $BOHMSIM_OUT or .)");

    std::string stats_dir;
    auto* stats = app.add_subcommand("stats", "Re-aggregate and cross-check a run directory");
    stats->add_option("dir", stats_dir, "run directory containing report.json")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, overrides, out_dir);
        if (weak->parsed()) {
            if (symmetric_n > 0) return cmd_weak(symmetric_n, theta_deg, nullptr);
            const auto s = build_setup(0, theta_deg, pre_spec, post_spec, op_spec, two_j);
            return cmd_weak(0, theta_deg, &s);
        }
        if (tp->parsed())
            return cmd_tsvf_pointer(
                build_setup(symmetric_n, theta_deg, pre_spec, post_spec, op_spec, two_j), deltas);
        if (prot->parsed()) return cmd_protective(state_spec, bins, out_dir);
        if (stats->parsed()) return cmd_stats(stats_dir);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const bohm::ValidationError& e) {
        std::cerr << json{{"error", {{"kind", "validation"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    } catch (const bohm::NumericalGuardError& e) {
        std::cerr << json{{"error", {{"kind", "numerical_guard"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 3;
    } catch (const bohm::IoError& e) {
        std::cerr << json{{"error", {{"kind", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 4;
    }
    return 0;
}

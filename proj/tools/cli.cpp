#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "jamset/error.hpp"
#include "jamset/experiments.hpp"
#include "jamset/greedy_sim.hpp"
#include "jamset/theory.hpp"
#include "jamset/trajectory.hpp"
#include "jamset/version.hpp"

namespace jamset::cli {

using nlohmann::json;
namespace fs = std::filesystem;
namespace ex = experiments;

nlohmann::json load_spec(const std::string& text) {
    std::string body = text;
    if (!text.empty() && text.front() == '@') {
        std::ifstream in(text.substr(1), std::ios::binary);
        if (!in) throw ConfigError("cannot read spec file '" + text.substr(1) + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        body = ss.str();
    }
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
    }
}

namespace {

const char* kFooter = R"(Exit codes:
  0  success
  2  invalid configuration or spec (including odd degree sums)
  3  numerical failure (quadrature or root finding did not converge)
  4  simple-graph rejection sampling exhausted its attempts

Specs are inline JSON or @file.json. Threads default to $JAMSET_THREADS,
else the hardware concurrency; results do not depend on the thread count.)";

struct Common {
    std::uint64_t seed = 1;
    std::string out_dir = "results";
    std::string format = "both";
    int threads = 0;
    std::string name;
};

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("JAMSET_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("JAMSET_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

json header(const std::string& kind, std::uint64_t seed, const json& config) {
    return {{"tool", "jamset"}, {"version", kVersion}, {"kind", kind}, {"seed", seed}, {"config", config}};
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    return os;
}

// Wall-clock time lives beside the data so the data files stay reproducible.
void write_sidecar(const fs::path& dir, const std::string& stem, double seconds, const std::vector<fs::path>& files) {
    json names = json::array();
    for (const auto& f : files) names.push_back(f.filename().string());
    auto os = open_out(dir / (stem + ".meta.json"));
    os << json{{"version", kVersion}, {"wall_seconds", seconds}, {"files", names}}.dump(2) << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_or_inf(double x) {
    if (std::isinf(x)) return "inf";
    std::ostringstream ss;
    ss << std::setprecision(12) << x;
    return ss.str();
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
    Common common;
    std::string model;
    double tol = theory::kDefaultTol;
    bool track = false;
    double t_max = 12.0;
    std::size_t points = 512;
    std::size_t k_track = 50;
};

int cmd_theory(const TheoryArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(a.tol > 0.0)) throw ConfigError("--tol must be positive");
    const json spec = load_spec(a.model);
    const LimitModel model = limit_model_from_json(spec);
    const auto r = theory::jamming_constant(model, a.tol);

    out << "tau_inf = " << fmt_or_inf(r.tau_inf) << '\n';
    out << "s_inf   = " << fmt_or_inf(r.s_inf) << '\n';
    std::vector<std::pair<Degree, double>> top(r.s_inf_by_degree.begin(), r.s_inf_by_degree.end());
    std::stable_sort(top.begin(), top.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    if (top.size() > 10) top.resize(10);
    out << "largest s_inf(k):\n";
    for (const auto& [k, v] : top) out << "  k=" << k << "  " << fmt_or_inf(v) << '\n';

    const fs::path dir = a.common.out_dir;
    fs::create_directories(dir);
    const std::string stem = (a.common.name.empty() ? "theory" : a.common.name) + "_theory_seed" +
                             std::to_string(a.common.seed);
    json config{{"model", spec}, {"tol", a.tol}};
    if (a.track) config["track"] = {{"t_max", a.t_max}, {"points", a.points}, {"k_track", a.k_track}};
    json j = header("theory", a.common.seed, config);
    j["result"] = theory::to_json(r);
    std::vector<fs::path> files{dir / (stem + ".json")};
    open_out(files.back()) << j.dump(2) << '\n';
    if (a.track) {
        const auto grid = uniform_grid(a.t_max, a.points);
        const auto fluid = theory::limit_trajectory(model, grid, a.tol, a.k_track);
        files.push_back(dir / (stem + "_fluid.csv"));
        auto os = open_out(files.back());
        write_trajectory_csv(os, fluid.rows, a.k_track,
                             {{"tool", "jamset"}, {"version", kVersion}, {"seed", std::to_string(a.common.seed)},
                              {"config", config.dump()}});
    }
    write_sidecar(dir, stem, seconds_since(t0), files);
    return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string seq;
    std::optional<Count> n;
    int replicas = 1;
    std::string graph = "multigraph";
    std::string mode = "dynamic";
    std::string loops = "include";
    bool track = false;
    double t_max = 12.0;
    std::size_t points = 512;
    std::size_t k_track = 50;
    long max_attempts = 1000;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.replicas < 1) throw ConfigError("--replicas must be at least 1");
    const json spec_json = load_spec(a.seq);
    ReplicaScenario sc;
    sc.seq = sequence_spec_from_json(spec_json);
    if (a.n) sc.seq = with_n(sc.seq, *a.n);
    sc.graph_mode = parse_graph_mode(a.graph);
    sc.sim_mode = parse_sim_mode(a.mode);
    sc.loops_policy = parse_loops_policy(a.loops);
    sc.max_attempts = a.max_attempts;
    if (a.track && (sc.graph_mode != GraphMode::multigraph || sc.sim_mode != SimMode::dynamic))
        throw ConfigError("--track needs --graph multigraph --mode dynamic");

    const auto agg = run_replicas(sc, a.replicas, a.common.seed, resolve_threads(a.common.threads));

    json config{{"seq", to_json(sc.seq)},     {"replicas", a.replicas},       {"graph", to_string(sc.graph_mode)},
                {"mode", to_string(sc.sim_mode)}, {"loops", to_string(sc.loops_policy)},
                {"max_attempts", a.max_attempts}};
    if (a.track) config["track"] = {{"t_max", a.t_max}, {"points", a.points}, {"k_track", a.k_track}};
    json reps = json::array();
    for (const auto& o : agg.replicas) {
        json by_degree = json::object();
        for (const auto& [k, c] : o.S_by_degree) by_degree[std::to_string(k)] = c;
        reps.push_back({{"stream", o.stream}, {"n", o.n}, {"S", o.S}, {"S_by_degree", by_degree},
                        {"attempts", o.attempts}});
    }
    json per_degree = json::object();
    for (const auto& [k, v] : agg.per_degree_means) per_degree[std::to_string(k)] = v;
    json j = header("simulate", a.common.seed, config);
    j["result"] = {{"aggregate", {{"mean", agg.mean}, {"stddev", agg.stddev}, {"per_degree_means", per_degree}}},
                   {"replicas", reps}};

    const fs::path dir = a.common.out_dir;
    fs::create_directories(dir);
    const std::string stem = (a.common.name.empty() ? "simulate" : a.common.name) + "_simulate_seed" +
                             std::to_string(a.common.seed);
    const auto format = ex::parse_format(a.common.format);
    std::vector<fs::path> files;
    if (format != ex::Format::csv) {
        files.push_back(dir / (stem + ".json"));
        open_out(files.back()) << j.dump(2) << '\n';
    }
    if (format != ex::Format::json) {
        files.push_back(dir / (stem + ".csv"));
        auto os = open_out(files.back());
        os << "# tool=jamset\n# version=" << kVersion << "\n# seed=" << a.common.seed << "\n# config=" << config.dump()
           << "\nstream,n,S,S_over_n,attempts\n";
        for (const auto& o : agg.replicas)
            os << o.stream << ',' << o.n << ',' << o.S << ','
               << format_number(static_cast<double>(o.S) / static_cast<double>(o.n)) << ',' << o.attempts << '\n';
    }
    if (a.track) {
        // replica 0 again, with the trajectory recorded; same stream, same run
        Rng rng(a.common.seed, 0);
        const DegreeSequence seq = build_sequence(sc.seq, rng);
        TrackConfig track{.enabled = true, .t_max = a.t_max, .points = a.points, .k_track = a.k_track,
                          .record_graph = false};
        auto traj = run_dynamic(seq, rng, track).second;
        if (traj.terminal) traj.samples.push_back(*traj.terminal);
        files.push_back(dir / (stem + "_trajectory.csv"));
        auto os = open_out(files.back());
        write_trajectory_csv(os, traj.samples, a.k_track,
                             {{"tool", "jamset"}, {"version", kVersion}, {"seed", std::to_string(a.common.seed)},
                              {"stream", "0"}, {"config", config.dump()}, {"last_row", "terminal state"}});
    }
    write_sidecar(dir, stem, seconds_since(t0), files);

    out << "replicas = " << a.replicas << "\nmean S/n = " << std::setprecision(10) << agg.mean
        << "\nstddev   = " << agg.stddev << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct StudyArgs {
    Common common;
    std::string preset;
    std::string scenario;
    std::string kind = "converge";
    std::optional<Count> n;
    std::optional<int> replicas;
    std::optional<std::uint64_t> seed;
    double t_max = 12.0;
    std::size_t points = 512;
    std::size_t k_track = 10;
};

int cmd_study(const StudyArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.preset.empty() == a.scenario.empty()) throw ConfigError("give exactly one of --preset and --scenario");
    ex::Scenario s = a.preset.empty() ? ex::scenario_from_json(load_spec(a.scenario)) : ex::preset(a.preset);
    if (a.replicas) s.replicas = *a.replicas;
    if (a.seed) s.seed = *a.seed;
    ex::validate(s);
    const int threads = resolve_threads(a.common.threads);
    const auto format = ex::parse_format(a.common.format);
    const fs::path dir = a.common.out_dir;
    const Count n = a.n.value_or(s.n_list.back());

    std::vector<fs::path> files;
    std::string stem;
    out << std::setprecision(8);
    if (a.kind == "converge") {
        if (a.n) s.n_list = {*a.n};
        const auto r = ex::convergence_study(s, threads);
        files = ex::write_report(dir, r, format);
        stem = ex::report_stem(s, "converge");
        if (r.theory) out << "s_inf = " << r.theory->s_inf << '\n';
        for (const auto& row : r.rows) {
            out << to_string(row.graph_mode) << " n=" << row.n << " mean=" << row.mean << " sd=" << row.stddev;
            if (row.gap) out << " gap=" << *row.gap << (row.theory_applies ? "" : " (limit not asserted)");
            out << '\n';
        }
    } else if (a.kind == "trajectory") {
        ex::TrajectoryOptions opt{a.t_max, a.points, a.k_track};
        const auto r = ex::trajectory_compare(s, n, opt, threads);
        files = ex::write_report(dir, r, format);
        stem = ex::report_stem(s, "trajectory");
        out << "n=" << n << " replicas=" << s.replicas << " sup_u=" << r.sup_u << " sup_s=" << r.sup_s << '\n';
    } else if (a.kind == "coverage") {
        const auto r = ex::coverage_study(s, n, threads);
        files = ex::write_report(dir, r, format);
        stem = ex::report_stem(s, "coverage");
        out << "n=" << n << " above " << r.threshold << ": " << r.above_threshold << '/' << r.replicas.size() << '\n';
        for (std::size_t i = 0; i < r.replicas.size(); ++i) {
            const auto& c = r.replicas[i];
            out << "  stream " << i << ": r_n=" << c.r_n;
            if (c.applicable)
                out << " covered_fraction=" << c.covered_fraction;
            else
                out << " not applicable";
            out << '\n';
        }
    } else {
        throw ConfigError("unknown --kind '" + a.kind + "' (converge, trajectory, coverage)");
    }
    write_sidecar(dir, stem, seconds_since(t0), files);
    return kOk;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "64-bit seed (default 1)");
    sub->add_option("--out", c.out_dir, "output directory (default results)");
    sub->add_option("--format", c.format, "json, csv or both (default both)");
    sub->add_option("--threads", c.threads, "worker threads");
    sub->add_option("--name", c.name, "output file prefix");
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Greedy independent sets on random graphs with given degrees", "jamset"};
    app.set_version_flag("--version", kVersion);
    app.footer(kFooter);
    app.require_subcommand(1);

    TheoryArgs ta;
    auto* th = app.add_subcommand("theory", "limit jamming constant of a degree law");
    th->add_option("--model", ta.model, "limit-model spec (regular, poisson, star, counts-limit)")->required();
    th->add_option("--tol", ta.tol, "absolute tolerance (default 1e-10)");
    th->add_flag("--track", ta.track, "also write the fluid trajectory");
    th->add_option("--t-max", ta.t_max, "trajectory horizon");
    th->add_option("--points", ta.points, "trajectory grid points");
    th->add_option("--k-track", ta.k_track, "degrees tracked individually");
    add_common(th, ta.common);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "run the greedy process on sampled graphs");
    sim->add_option("--seq", sa.seq, "degree-sequence spec")->required();
    sim->add_option("--n", sa.n, "override the sequence size");
    sim->add_option("--replicas", sa.replicas, "independent replicas (default 1)");
    sim->add_option("--graph", sa.graph, "multigraph or simple");
    sim->add_option("--mode", sa.mode, "dynamic or static");
    sim->add_option("--loops", sa.loops, "include or exclude (static mode)");
    sim->add_option("--max-attempts", sa.max_attempts, "simple-graph rejection budget");
    sim->add_flag("--track", sa.track, "record the trajectory of replica 0");
    sim->add_option("--t-max", sa.t_max, "trajectory horizon");
    sim->add_option("--points", sa.points, "trajectory grid points");
    sim->add_option("--k-track", sa.k_track, "degrees tracked individually");
    add_common(sim, sa.common);

    StudyArgs sta;
    auto* st = app.add_subcommand("study", "compare simulation with the limit theory");
    st->add_option("--preset", sta.preset, "regular-d2, regular-d3, poisson-c1, poisson-c2, star, "
                                           "twoblock-alpha-gamma, extreme-bimodal");
    st->add_option("--scenario", sta.scenario, "scenario spec");
    st->add_option("--kind", sta.kind, "converge, trajectory or coverage");
    st->add_option("--n", sta.n, "single size (default: largest of the scenario)");
    st->add_option("--replicas", sta.replicas, "override replicas");
    st->add_option("--t-max", sta.t_max, "trajectory horizon");
    st->add_option("--points", sta.points, "trajectory grid points");
    st->add_option("--k-track", sta.k_track, "degrees compared individually");
    add_common(st, sta.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (th->parsed()) return cmd_theory(ta, out);
        if (sim->parsed()) return cmd_simulate(sa, out);
        if (st->count("--seed") > 0) sta.seed = sta.common.seed;
        return cmd_study(sta, out);
    } catch (const RejectionExhausted& e) {
        err << "error: " << e.what() << '\n';
        return kRejectionExhausted;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

} // namespace jamset::cli

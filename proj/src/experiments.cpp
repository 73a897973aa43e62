#include "jamset/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <variant>

#include "jamset/error.hpp"
#include "jamset/trajectory.hpp"
#include "jamset/version.hpp"

namespace jamset::experiments {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxTrackedDegrees = 12;

bool has_size_parameter(const SequenceSpec& spec) {
    return !std::holds_alternative<CountsSpec>(spec) && !std::holds_alternative<TwoBlockSpec>(spec);
}

// The scenario's sequence family at size n. Fixed-count specs only run at
// their own size, so they admit a single-entry n_list.
SequenceSpec sized(const Scenario& s, Count n) {
    if (has_size_parameter(s.seq)) return with_n(s.seq, n);
    if (s.n_list.size() > 1) throw ConfigError("scenario '" + s.name + "': a fixed degree list runs at one size only");
    return s.seq;
}

ReplicaScenario replica_scenario(const Scenario& s, Count n, GraphMode mode) {
    ReplicaScenario rs;
    rs.seq = sized(s, n);
    rs.graph_mode = mode;
    rs.sim_mode = s.sim_mode;
    rs.loops_policy = s.loops_policy;
    return rs;
}

std::optional<LimitModel> model_of(const Scenario& s) {
    if (!s.model) return std::nullopt;
    return limit_model_from_json(*s.model);
}

json degree_map(const std::map<Degree, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[std::to_string(k)] = v;
    return out;
}

json header(const Scenario& s, const std::string& kind) {
    return {{"tool", "jamset"}, {"version", kVersion}, {"kind", kind}, {"seed", s.seed}, {"config", to_json(s)}};
}

void write_csv_header(std::ostream& os, const Scenario& s, const std::string& kind) {
    os << "# tool=jamset\n# version=" << kVersion << "\n# kind=" << kind << "\n# seed=" << s.seed
       << "\n# config=" << to_json(s).dump() << '\n';
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    return os;
}

template <class Report, class CsvWriter>
std::vector<std::filesystem::path> write_pair(const std::filesystem::path& dir, const Report& r,
                                              const std::string& kind, Format format, CsvWriter csv) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    const std::string stem = report_stem(r.scenario, kind);
    if (format != Format::csv) {
        json j = header(r.scenario, kind);
        j["result"] = to_json(r);
        const auto p = dir / (stem + ".json");
        auto os = open_out(p);
        os << j.dump(2) << '\n';
        out.push_back(p);
    }
    if (format != Format::json) {
        const auto p = dir / (stem + ".csv");
        auto os = open_out(p);
        write_csv_header(os, r.scenario, kind);
        csv(os);
        out.push_back(p);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

void validate(const Scenario& s) {
    if (s.name.empty()) throw ConfigError("scenario needs a name");
    if (s.replicas < 1) throw ConfigError("replicas must be at least 1");
    if (s.graph_modes.empty()) throw ConfigError("scenario needs at least one graph mode");
    if (s.n_list.empty()) throw ConfigError("n_list must not be empty");
    for (std::size_t i = 1; i < s.n_list.size(); ++i)
        if (s.n_list[i] <= s.n_list[i - 1]) throw ConfigError("n_list must be strictly increasing");
    if (s.model) (void)limit_model_from_json(*s.model);
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    try {
        Scenario s;
        s.name = j.at("name").get<std::string>();
        s.seq = sequence_spec_from_json(j.at("seq"));
        if (j.contains("model") && !j.at("model").is_null()) s.model = j.at("model");
        if (j.contains("graph_modes")) {
            s.graph_modes.clear();
            for (const auto& m : j.at("graph_modes")) s.graph_modes.push_back(parse_graph_mode(m.get<std::string>()));
        }
        if (j.contains("mode")) s.sim_mode = parse_sim_mode(j.at("mode").get<std::string>());
        if (j.contains("loops")) s.loops_policy = parse_loops_policy(j.at("loops").get<std::string>());
        if (j.contains("n_list")) {
            s.n_list = j.at("n_list").get<std::vector<Count>>();
        } else {
            Rng probe(0);
            if (consumes_rng(s.seq)) throw ConfigError("scenario with a sampled sequence needs n_list");
            s.n_list = {build_sequence(s.seq, probe).n()};
        }
        s.replicas = j.value("replicas", 20);
        s.seed = j.value("seed", std::uint64_t{1});
        s.second_moment_bounded = j.value("second_moment_bounded", true);
        s.qualitative_only = j.value("qualitative_only", false);
        s.notes = j.value("notes", std::string{});
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
}

json to_json(const Scenario& s) {
    json modes = json::array();
    for (auto m : s.graph_modes) modes.push_back(to_string(m));
    return {{"name", s.name},
            {"seq", to_json(s.seq)},
            {"model", s.model ? *s.model : json(nullptr)},
            {"graph_modes", modes},
            {"mode", to_string(s.sim_mode)},
            {"loops", to_string(s.loops_policy)},
            {"n_list", s.n_list},
            {"replicas", s.replicas},
            {"seed", s.seed},
            {"second_moment_bounded", s.second_moment_bounded},
            {"qualitative_only", s.qualitative_only},
            {"notes", s.notes}};
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"regular-d2", "regular-d3", "poisson-c1", "poisson-c2",
                                                "star",       "twoblock-alpha-gamma", "extreme-bimodal"};
    return names;
}

Scenario preset(const std::string& name) {
    const std::vector<Count> sizes{1000, 10000, 100000};
    Scenario s;
    s.name = name;
    s.n_list = sizes;
    s.graph_modes = {GraphMode::multigraph, GraphMode::simple};
    if (name == "regular-d2" || name == "regular-d3") {
        const Degree d = name == "regular-d2" ? 2 : 3;
        s.seq = RegularSpec{d, sizes.back()};
        s.model = json{{"kind", "regular"}, {"d", d}};
    } else if (name == "poisson-c1" || name == "poisson-c2") {
        const double c = name == "poisson-c1" ? 1.0 : 2.0;
        s.seq = PoissonSpec{c, sizes.back()};
        s.model = json{{"kind", "poisson"}, {"c", c}};
    } else if (name == "star") {
        s.seq = StarSpec{sizes.back()};
        s.model = json{{"kind", "star"}};
        s.second_moment_bounded = false;
        s.notes = "lambda = 2 exceeds the limiting mean 1; the limit applies to the multigraph only, "
                  "the simple graph keeps all n-1 leaves";
    } else if (name == "twoblock-alpha-gamma") {
        // A: n^0.6 vertices of degree n^0.6; B: the rest, degree n^0.05 (= 1 at these sizes)
        PowerTwoBlockSpec t;
        t.n = sizes.back();
        t.size_a_exp = 0.6;
        t.deg_a_exp = 0.6;
        t.deg_b_exp = 0.05;
        s.seq = t;
        s.graph_modes = {GraphMode::multigraph};
        s.replicas = 10;
        s.second_moment_bounded = false;
        s.notes = "alpha = 0.6, gamma = 0.05; lambda_n = n^0.2 + O(1) diverges, no limit law";
    } else if (name == "extreme-bimodal") {
        // half the vertices of degree n^1.1, half of degree n^3.5
        PowerTwoBlockSpec t;
        t.n = 32;
        t.size_a_frac = 0.5;
        t.deg_a_exp = 1.1;
        t.deg_b_exp = 3.5;
        s.seq = t;
        s.n_list = {16, 32};
        s.graph_modes = {GraphMode::multigraph};
        s.replicas = 40;
        s.second_moment_bounded = false;
        s.qualitative_only = true;
        s.notes = "exponents scaled down to desk size; shows non-concentration (S = 1 or about n/2), "
                  "not the asymptotic regime";
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    validate(s);
    return s;
}

// ---------------------------------------------------------------------------
// Convergence in n
// ---------------------------------------------------------------------------

ConvergenceReport convergence_study(const Scenario& scenario, int threads) {
    validate(scenario);
    ConvergenceReport rep;
    rep.scenario = scenario;
    if (const auto model = model_of(scenario)) rep.theory = theory::jamming_constant(*model);

    for (const GraphMode mode : scenario.graph_modes) {
        std::optional<double> prev_gap;
        bool decreasing = true;
        for (const Count n : scenario.n_list) {
            const auto agg = run_replicas(replica_scenario(scenario, n, mode), scenario.replicas, scenario.seed, threads);
            ConvergenceRow row;
            row.graph_mode = mode;
            row.n = n;
            row.replicas = scenario.replicas;
            row.mean = agg.mean;
            row.stddev = agg.stddev;
            row.degree_means = agg.per_degree_means;
            for (const auto& o : agg.replicas) row.max_attempts = std::max(row.max_attempts, o.attempts);
            if (rep.theory) {
                row.gap = std::abs(agg.mean - rep.theory->s_inf);
                row.theory_applies = mode == GraphMode::multigraph || scenario.second_moment_bounded;
                for (const auto& [k, sk] : rep.theory->s_inf_by_degree) {
                    const auto it = agg.per_degree_means.find(k);
                    row.degree_gaps[k] = std::abs((it == agg.per_degree_means.end() ? 0.0 : it->second) - sk);
                }
                if (prev_gap && *row.gap > *prev_gap) decreasing = false;
                prev_gap = row.gap;
            }
            rep.rows.push_back(std::move(row));
        }
        rep.gaps_weakly_decrease[mode] = rep.theory.has_value() && decreasing;
    }
    return rep;
}

json to_json(const ConvergenceReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"graph_mode", to_string(row.graph_mode)},
                        {"n", row.n},
                        {"replicas", row.replicas},
                        {"mean", row.mean},
                        {"stddev", row.stddev},
                        {"gap", row.gap ? json(*row.gap) : json(nullptr)},
                        {"theory_applies", row.theory_applies},
                        {"degree_means", degree_map(row.degree_means)},
                        {"degree_gaps", degree_map(row.degree_gaps)},
                        {"max_attempts", row.max_attempts}});
    }
    json decrease = json::object();
    for (const auto& [m, v] : r.gaps_weakly_decrease) decrease[to_string(m)] = v;
    return {{"theory", r.theory ? theory::to_json(*r.theory) : json(nullptr)},
            {"rows", rows},
            {"gaps_weakly_decrease", decrease}};
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

TrajectoryReport trajectory_compare(const Scenario& scenario, Count n, const TrajectoryOptions& options, int threads) {
    validate(scenario);
    const auto model = model_of(scenario);
    if (!model) throw ConfigError("trajectory comparison needs a limit model");
    if (scenario.sim_mode != SimMode::dynamic || scenario.loops_policy != LoopsPolicy::include)
        throw ConfigError("trajectory comparison needs the dynamic process with loops included");
    if (std::find(scenario.graph_modes.begin(), scenario.graph_modes.end(), GraphMode::multigraph) ==
        scenario.graph_modes.end())
        throw ConfigError("trajectory comparison runs on the multigraph");

    TrajectoryReport rep;
    rep.scenario = scenario;
    rep.n = n;
    rep.options = options;
    const auto grid = uniform_grid(options.t_max, options.points);
    rep.fluid = theory::limit_trajectory(*model, grid, theory::kDefaultTol, options.k_track);

    const SequenceSpec spec = sized(scenario, n);
    const auto R = static_cast<std::size_t>(scenario.replicas);
    std::vector<std::vector<TrajectoryRow>> samples(R);
    parallel_for(R, threads, [&](std::size_t r) {
        Rng rng(scenario.seed, r);
        const DegreeSequence seq = build_sequence(spec, rng);
        TrackConfig track;
        track.enabled = true;
        track.t_max = options.t_max;
        track.points = options.points;
        track.k_track = options.k_track;
        track.record_graph = false;
        samples[r] = run_dynamic(seq, rng, track).second.samples;
    });

    const double m = static_cast<double>(R);
    const std::size_t K = options.k_track;
    rep.mean_rows.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& mr = rep.mean_rows[i];
        mr.t = grid[i];
        mr.e.assign(K + 1, 0.0);
        mr.s_k.assign(K + 1, 0.0);
    }
    for (std::size_t k = 0; k <= K; ++k) {
        rep.sup_e_k[k] = 0.0;
        rep.initial_e_k[k] = 0.0;
    }
    for (const auto& rows : samples) {
        double su = 0.0, ss = 0.0;
        std::vector<double> se(K + 1, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& sim = rows[i];
            const auto& fl = rep.fluid.rows[i];
            su = std::max(su, std::abs(sim.u - fl.u));
            ss = std::max(ss, std::abs(sim.s - fl.s));
            for (std::size_t k = 0; k <= K; ++k) se[k] = std::max(se[k], std::abs(sim.e[k] - fl.e[k]));
            auto& mr = rep.mean_rows[i];
            mr.u += sim.u / m;
            mr.s += sim.s / m;
            mr.e_over += sim.e_over / m;
            mr.s_over += sim.s_over / m;
            for (std::size_t k = 0; k <= K; ++k) {
                mr.e[k] += sim.e[k] / m;
                mr.s_k[k] += sim.s_k[k] / m;
            }
        }
        rep.replica_sup_u.push_back(su);
        rep.replica_sup_s.push_back(ss);
        rep.sup_u += su / m;
        rep.sup_s += ss / m;
        for (std::size_t k = 0; k <= K; ++k) rep.sup_e_k[k] += se[k] / m;
        rep.initial_u += std::abs(rows.front().u - rep.fluid.rows.front().u) / m;
        rep.initial_s += std::abs(rows.front().s - rep.fluid.rows.front().s) / m;
        for (std::size_t k = 0; k <= K; ++k)
            rep.initial_e_k[k] += std::abs(rows.front().e[k] - rep.fluid.rows.front().e[k]) / m;
    }
    return rep;
}

json to_json(const TrajectoryReport& r) {
    return {{"n", r.n},
            {"replicas", r.scenario.replicas},
            {"t_max", r.options.t_max},
            {"points", r.options.points},
            {"k_track", r.options.k_track},
            {"sup_u", r.sup_u},
            {"sup_s", r.sup_s},
            {"sup_e_k", degree_map(r.sup_e_k)},
            {"initial", {{"u", r.initial_u}, {"s", r.initial_s}, {"e_k", degree_map(r.initial_e_k)}}},
            {"replica_sup_u", r.replica_sup_u},
            {"replica_sup_s", r.replica_sup_s}};
}

// ---------------------------------------------------------------------------
// Low-degree coverage
// ---------------------------------------------------------------------------

Coverage low_degree_coverage(const DegreeSequence& seq, const SimResult& result) {
    const auto degrees = seq.degrees();
    if (result.partition.size() != degrees.size())
        throw ConfigError("coverage needs the vertex partition of a run on this sequence");
    Coverage c;
    c.lambda_n = empirical(seq).lambda_n;
    c.cutoff = std::min(std::pow(c.lambda_n, 1.0 / 8.0), std::pow(static_cast<double>(seq.n()), 1.0 / 6.0));
    for (std::size_t v = 0; v < degrees.size(); ++v) {
        if (static_cast<double>(degrees[v]) > c.cutoff) continue;
        ++c.r_n;
        if (result.partition[v] == VertexStatus::selected) ++c.covered;
    }
    c.applicable = c.r_n > 0;
    if (c.applicable) c.covered_fraction = static_cast<double>(c.covered) / static_cast<double>(c.r_n);
    return c;
}

json to_json(const Coverage& c) {
    return {{"r_n", c.r_n},
            {"covered", c.covered},
            {"covered_fraction", c.applicable ? json(c.covered_fraction) : json(nullptr)},
            {"cutoff", c.cutoff},
            {"lambda_n", c.lambda_n},
            {"applicable", c.applicable}};
}

CoverageReport coverage_study(const Scenario& scenario, Count n, int threads, double threshold) {
    validate(scenario);
    CoverageReport rep;
    rep.scenario = scenario;
    rep.n = n;
    rep.graph_mode = scenario.graph_modes.front();
    rep.threshold = threshold;
    const ReplicaScenario rs = replica_scenario(scenario, n, rep.graph_mode);
    rep.replicas.resize(static_cast<std::size_t>(scenario.replicas));
    parallel_for(rep.replicas.size(), threads, [&](std::size_t r) {
        const ReplicaRun run = simulate_replica(rs, scenario.seed, r);
        rep.replicas[r] = low_degree_coverage(run.seq, run.result);
    });
    for (const auto& c : rep.replicas)
        if (c.applicable && c.covered_fraction > threshold) ++rep.above_threshold;
    return rep;
}

json to_json(const CoverageReport& r) {
    json reps = json::array();
    for (const auto& c : r.replicas) reps.push_back(to_json(c));
    return {{"n", r.n},
            {"graph_mode", to_string(r.graph_mode)},
            {"threshold", r.threshold},
            {"threshold_note", "engineering choice; the coverage statement is asymptotic with no rate"},
            {"above_threshold", r.above_threshold},
            {"replicas", reps}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    if (s == "both") return Format::both;
    throw ConfigError("unknown format '" + s + "' (json, csv, both)");
}

std::string report_stem(const Scenario& s, const std::string& kind) {
    return s.name + "_" + kind + "_seed" + std::to_string(s.seed);
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
    std::set<Degree> tracked;
    if (r.theory) {
        for (const auto& [k, v] : r.theory->s_inf_by_degree)
            if (tracked.size() < kMaxTrackedDegrees) tracked.insert(k);
    } else {
        for (const auto& row : r.rows)
            for (const auto& [k, v] : row.degree_means) tracked.insert(k);
        while (tracked.size() > kMaxTrackedDegrees) tracked.erase(std::prev(tracked.end()));
    }
    os << "graph_mode,n,replicas,mean,stddev,gap,theory_applies,max_attempts";
    for (Degree k : tracked) os << ",mean_" << k;
    if (r.theory)
        for (Degree k : tracked) os << ",gap_" << k;
    os << '\n';
    for (const auto& row : r.rows) {
        os << to_string(row.graph_mode) << ',' << row.n << ',' << row.replicas << ',' << format_number(row.mean) << ','
           << format_number(row.stddev) << ',' << (row.gap ? format_number(*row.gap) : "") << ','
           << (row.theory_applies ? 1 : 0) << ',' << row.max_attempts;
        for (Degree k : tracked) {
            const auto it = row.degree_means.find(k);
            os << ',' << format_number(it == row.degree_means.end() ? 0.0 : it->second);
        }
        if (r.theory)
            for (Degree k : tracked) os << ',' << format_number(row.degree_gaps.at(k));
        os << '\n';
    }
}

void write_trajectory_columns(std::ostream& os, const TrajectoryReport& r, char sep) {
    if (sep != ',') os << "# ";
    os << "t" << sep << "u_sim" << sep << "u_fluid" << sep << "s_sim" << sep << "s_fluid" << '\n';
    for (std::size_t i = 0; i < r.mean_rows.size(); ++i) {
        const auto& a = r.mean_rows[i];
        const auto& b = r.fluid.rows[i];
        os << format_number(a.t) << sep << format_number(a.u) << sep << format_number(b.u) << sep
           << format_number(a.s) << sep << format_number(b.s) << '\n';
    }
}

void write_coverage_csv(std::ostream& os, const CoverageReport& r) {
    os << "stream,r_n,covered,covered_fraction,cutoff,lambda_n,applicable\n";
    for (std::size_t i = 0; i < r.replicas.size(); ++i) {
        const auto& c = r.replicas[i];
        os << i << ',' << c.r_n << ',' << c.covered << ',' << (c.applicable ? format_number(c.covered_fraction) : "")
           << ',' << format_number(c.cutoff) << ',' << format_number(c.lambda_n) << ',' << (c.applicable ? 1 : 0)
           << '\n';
    }
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ConvergenceReport& r,
                                                Format format) {
    return write_pair(dir, r, "converge", format, [&](std::ostream& os) { write_convergence_csv(os, r); });
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const TrajectoryReport& r,
                                                Format format) {
    auto out = write_pair(dir, r, "trajectory", format, [&](std::ostream& os) { write_trajectory_columns(os, r, ','); });
    const auto p = dir / (report_stem(r.scenario, "trajectory") + ".dat");
    auto os = open_out(p);
    os << "# jamset " << kVersion << " seed=" << r.scenario.seed << " n=" << r.n << '\n';
    write_trajectory_columns(os, r, ' ');
    out.push_back(p);
    return out;
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const CoverageReport& r,
                                                Format format) {
    return write_pair(dir, r, "coverage", format, [&](std::ostream& os) { write_coverage_csv(os, r); });
}

} // namespace jamset::experiments

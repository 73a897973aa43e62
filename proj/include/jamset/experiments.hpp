#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jamset/degree_model.hpp"
#include "jamset/greedy_sim.hpp"
#include "jamset/theory.hpp"

namespace jamset::experiments {

struct Scenario {
    std::string name;
    SequenceSpec seq;
    std::optional<nlohmann::json> model; // limit-model spec; absent when no limit law exists
    std::vector<GraphMode> graph_modes{GraphMode::multigraph};
    SimMode sim_mode = SimMode::dynamic;
    LoopsPolicy loops_policy = LoopsPolicy::include;
    std::vector<Count> n_list;
    int replicas = 20;
    std::uint64_t seed = 1;
    // sum_k k^2 n_k / n stays bounded, so the simple-graph variant shares the limit
    bool second_moment_bounded = true;
    bool qualitative_only = false;
    std::string notes;
};

// Throws ConfigError on an empty or non-increasing n_list, replicas < 1, or
// an empty graph_modes list.
void validate(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

const std::vector<std::string>& preset_names();
Scenario preset(const std::string& name);

// ---------------------------------------------------------------------------

struct ConvergenceRow {
    GraphMode graph_mode = GraphMode::multigraph;
    Count n = 0;
    int replicas = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::optional<double> gap; // |mean - s_inf|
    bool theory_applies = false;
    std::map<Degree, double> degree_means;
    std::map<Degree, double> degree_gaps;
    long max_attempts = 0; // simple-graph draws, worst replica
};

struct ConvergenceReport {
    Scenario scenario;
    std::optional<theory::TheoryResult> theory;
    std::vector<ConvergenceRow> rows; // grouped by graph mode, n ascending
    std::map<GraphMode, bool> gaps_weakly_decrease;
};

ConvergenceReport convergence_study(const Scenario& scenario, int threads = 1);

nlohmann::json to_json(const ConvergenceReport& r);

// ---------------------------------------------------------------------------

struct TrajectoryOptions {
    double t_max = 12.0;
    std::size_t points = 512;
    std::size_t k_track = 10;
};

struct TrajectoryReport {
    Scenario scenario;
    Count n = 0;
    TrajectoryOptions options;
    // sup over the grid, averaged over replicas
    double sup_u = 0.0;
    double sup_s = 0.0;
    std::map<Degree, double> sup_e_k;
    // the same distances at the first grid point
    double initial_u = 0.0;
    double initial_s = 0.0;
    std::map<Degree, double> initial_e_k;
    std::vector<double> replica_sup_u;
    std::vector<double> replica_sup_s;
    std::vector<TrajectoryRow> mean_rows; // simulation averaged over replicas
    theory::FluidTrajectory fluid;
};

// Requires a limit model and the dynamic multigraph process.
TrajectoryReport trajectory_compare(const Scenario& scenario, Count n, const TrajectoryOptions& options = {},
                                    int threads = 1);

nlohmann::json to_json(const TrajectoryReport& r);

// ---------------------------------------------------------------------------

struct Coverage {
    Count r_n = 0; // vertices of degree <= cutoff
    Count covered = 0;
    double covered_fraction = 0.0;
    double cutoff = 0.0; // min(lambda_n^{1/8}, n^{1/6})
    double lambda_n = 0.0;
    bool applicable = false; // false when r_n = 0
};

// result must carry the partition of the run on seq.
Coverage low_degree_coverage(const DegreeSequence& seq, const SimResult& result);

nlohmann::json to_json(const Coverage& c);

struct CoverageReport {
    Scenario scenario;
    Count n = 0;
    GraphMode graph_mode = GraphMode::multigraph;
    double threshold = 0.9; // engineering choice; the underlying statement has no rate
    std::vector<Coverage> replicas;
    int above_threshold = 0;
};

CoverageReport coverage_study(const Scenario& scenario, Count n, int threads = 1, double threshold = 0.9);

nlohmann::json to_json(const CoverageReport& r);

// ---------------------------------------------------------------------------
// Report files: <scenario>_<kind>_seed<seed>.{json,csv}; the trajectory study
// also writes a whitespace-separated .dat file for gnuplot.

enum class Format { json, csv, both };
Format parse_format(const std::string& s);

// Prepends version, config and seed. Returns the paths written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ConvergenceReport& r,
                                                Format format);
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const TrajectoryReport& r,
                                                Format format);
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const CoverageReport& r,
                                                Format format);

void write_convergence_csv(std::ostream& os, const ConvergenceReport& r);
void write_trajectory_columns(std::ostream& os, const TrajectoryReport& r, char sep);
void write_coverage_csv(std::ostream& os, const CoverageReport& r);

std::string report_stem(const Scenario& s, const std::string& kind);

} // namespace jamset::experiments

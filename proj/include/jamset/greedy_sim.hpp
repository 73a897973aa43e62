#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jamset/config_model.hpp"
#include "jamset/degree_model.hpp"
#include "jamset/rng.hpp"
#include "jamset/trajectory.hpp"

namespace jamset {

enum class LoopsPolicy { include, exclude };
enum class GraphMode { multigraph, simple };
enum class SimMode { static_order, dynamic };
enum class VertexStatus : std::uint8_t { empty, blocked, selected };

const char* to_string(LoopsPolicy p);
const char* to_string(GraphMode m);
const char* to_string(SimMode m);
LoopsPolicy parse_loops_policy(const std::string& s);
GraphMode parse_graph_mode(const std::string& s);
SimMode parse_sim_mode(const std::string& s);

// Markov state of the clock-driven process: unpaired half-edges U, empty
// vertices by degree E, selected count S.
struct SimState {
    double t = 0.0;
    std::uint64_t U = 0;
    std::map<Degree, Count> E;
    Count S = 0;
    std::map<Degree, Count> S_by_degree;
    std::vector<VertexStatus> partition;
};

// Throws std::logic_error naming the first violated invariant.
void check_state(const SimState& s);

struct Trajectory {
    std::size_t k_track = 0;
    std::vector<TrajectoryRow> samples;
    std::optional<TrajectoryRow> terminal;
};

struct TrackConfig {
    bool enabled = false;
    double t_max = 12.0;
    std::size_t points = 512;
    std::size_t k_track = 50;
    // pair the leftover half-edges after termination and keep the graph
    bool record_graph = true;
};

struct SimResult {
    Count n = 0;
    Count S_final = 0;
    std::map<Degree, Count> S_by_degree;
    std::optional<Multigraph> final_graph;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    LoopsPolicy loops_policy = LoopsPolicy::include;
    std::vector<VertexStatus> partition;
};

nlohmann::json to_json(const SimResult& r);

// ===========================================================================
// Lazy pairing process
// ===========================================================================

// Vertices with their half-edges, a pool of unpaired half-edges, and the
// empty/blocked/selected partition. Firing an empty vertex selects it and
// pairs each of its still-unpaired half-edges with a uniformly chosen other
// unpaired half-edge; empty vertices hit by those pairings become blocked.
class PairingProcess {
public:
    explicit PairingProcess(std::vector<std::uint32_t> degrees, bool record_mates = true);

    // Frozen state for drift checks: empties[k] empty vertices of degree k and
    // blocked_half_edges further unpaired half-edges, each on its own blocked
    // vertex of degree 1.
    static PairingProcess from_state(const std::map<Degree, Count>& empties, std::uint64_t blocked_half_edges);

    struct Firing {
        std::uint64_t half_edges_removed = 0;
        std::uint32_t loops = 0;
        std::uint32_t blocked = 0;
    };

    // v must be empty. Degrees of newly blocked vertices are appended to
    // blocked_degrees when given.
    Firing fire(Vertex v, Rng& rng, std::vector<std::uint32_t>* blocked_degrees = nullptr);

    // Pairs all leftover half-edges uniformly.
    void complete(Rng& rng);

    const HalfEdgeLayout& layout() const noexcept { return layout_; }
    std::size_t n() const noexcept { return status_.size(); }
    VertexStatus status(Vertex v) const { return status_[v]; }
    std::uint64_t unpaired() const noexcept { return pool_.size(); }
    std::uint64_t empty_count() const noexcept { return empty_count_; }
    // sum_k k E(k)
    std::uint64_t empty_half_edges() const noexcept { return empty_half_edges_; }
    Count empties(Degree k) const { return k < empty_by_degree_.size() ? empty_by_degree_[k] : 0; }
    Count selected() const noexcept { return selected_; }
    Count selected(Degree k) const { return k < selected_by_degree_.size() ? selected_by_degree_[k] : 0; }
    const std::vector<VertexStatus>& partition() const noexcept { return status_; }

    SimState snapshot(double t, bool with_partition = false) const;
    TrajectoryRow row(double t, std::size_t k_track) const;

    // Requires complete() and record_mates.
    Multigraph graph() const;

private:
    static constexpr std::uint32_t kPaired = 0xFFFFFFFFu;

    void remove_from_pool(HalfEdge h);
    void pair(HalfEdge a, HalfEdge b);

    HalfEdgeLayout layout_;
    bool record_mates_;
    std::vector<VertexStatus> status_;
    std::vector<HalfEdge> pool_;
    std::vector<std::uint32_t> pos_;
    std::vector<HalfEdge> mate_;
    std::vector<Count> empty_by_degree_;
    std::vector<Count> selected_by_degree_;
    std::uint64_t empty_count_ = 0;
    std::uint64_t empty_half_edges_ = 0;
    Count selected_ = 0;
};

SimResult run_static(const Multigraph& g, Rng& rng, LoopsPolicy loops_policy);

// Exp(1) clocks drawn per vertex in index order, then the remaining stream
// drives the pairings. Always includes looped vertices.
std::pair<SimResult, Trajectory> run_dynamic(const DegreeSequence& seq, Rng& rng, const TrackConfig& track = {});

// ===========================================================================
// Replicas
// ===========================================================================

struct ReplicaScenario {
    SequenceSpec seq;
    GraphMode graph_mode = GraphMode::multigraph;
    SimMode sim_mode = SimMode::dynamic;
    LoopsPolicy loops_policy = LoopsPolicy::include;
    long max_attempts = 1000;
};

struct ReplicaOutcome {
    std::uint64_t stream = 0;
    Count n = 0;
    Count S = 0;
    std::map<Degree, Count> S_by_degree;
    long attempts = 0; // simple-graph draws; 0 for multigraphs
};

struct ReplicaAggregate {
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation; 0 for one replica
    std::vector<double> values; // S/n per replica
    std::map<Degree, double> per_degree_means; // mean S(k)/n
    std::vector<ReplicaOutcome> replicas;
};

// Replica r draws from Rng(seed, r). Result is independent of thread count.
ReplicaAggregate run_replicas(const ReplicaScenario& scenario, int replicas, std::uint64_t seed, int threads = 1);

struct ReplicaRun {
    DegreeSequence seq;
    SimResult result;
    long attempts = 0;
};

// Replica `stream` in full: the sequence is built and the graph drawn from Rng(seed, stream).
ReplicaRun simulate_replica(const ReplicaScenario& scenario, std::uint64_t seed, std::uint64_t stream);

// Single replica, as run by run_replicas.
ReplicaOutcome run_replica(const ReplicaScenario& scenario, std::uint64_t seed, std::uint64_t stream);

ReplicaAggregate aggregate(std::vector<ReplicaOutcome> outcomes);

// Calls body(i) for i < count on up to `threads` workers. Exceptions are
// rethrown after all work finishes, lowest index first.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

} // namespace jamset

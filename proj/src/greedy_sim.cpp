#include "jamset/greedy_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "jamset/error.hpp"

namespace jamset {

const char* to_string(LoopsPolicy p) { return p == LoopsPolicy::include ? "include" : "exclude"; }
const char* to_string(GraphMode m) { return m == GraphMode::multigraph ? "multigraph" : "simple"; }
const char* to_string(SimMode m) { return m == SimMode::dynamic ? "dynamic" : "static"; }

LoopsPolicy parse_loops_policy(const std::string& s) {
    if (s == "include") return LoopsPolicy::include;
    if (s == "exclude") return LoopsPolicy::exclude;
    throw ConfigError("loops policy must be include|exclude, got '" + s + "'");
}

GraphMode parse_graph_mode(const std::string& s) {
    if (s == "multigraph") return GraphMode::multigraph;
    if (s == "simple") return GraphMode::simple;
    throw ConfigError("graph mode must be multigraph|simple, got '" + s + "'");
}

SimMode parse_sim_mode(const std::string& s) {
    if (s == "dynamic") return SimMode::dynamic;
    if (s == "static") return SimMode::static_order;
    throw ConfigError("sim mode must be static|dynamic, got '" + s + "'");
}

void check_state(const SimState& s) {
    std::uint64_t empty_half_edges = 0;
    for (const auto& [k, c] : s.E) empty_half_edges += k * c;
    if (empty_half_edges > s.U) throw std::logic_error("sum_k k E(k) exceeds U");
    if (s.U % 2 != 0) throw std::logic_error("U is odd");
    Count total = 0;
    for (const auto& [k, c] : s.S_by_degree) total += c;
    if (total != s.S) throw std::logic_error("S differs from sum_k S(k)");
}

nlohmann::json to_json(const SimResult& r) {
    nlohmann::json by_degree = nlohmann::json::object();
    for (const auto& [k, c] : r.S_by_degree) by_degree[std::to_string(k)] = c;
    nlohmann::json out{{"n", r.n},
                       {"S", r.S_final},
                       {"S_by_degree", by_degree},
                       {"seed", r.seed},
                       {"stream", r.stream},
                       {"loops_policy", to_string(r.loops_policy)}};
    if (r.final_graph) {
        out["loops"] = r.final_graph->loop_count();
        out["multi_edges"] = r.final_graph->multi_edge_count();
    }
    return out;
}

// ===========================================================================
// PairingProcess
// ===========================================================================

PairingProcess::PairingProcess(std::vector<std::uint32_t> degrees, bool record_mates)
    : layout_(std::move(degrees)), record_mates_(record_mates) {
    const std::size_t n = layout_.vertices();
    const std::size_t h = layout_.half_edges();
    status_.assign(n, VertexStatus::empty);
    pool_.resize(h);
    std::iota(pool_.begin(), pool_.end(), HalfEdge{0});
    pos_.resize(h);
    std::iota(pos_.begin(), pos_.end(), 0u);
    if (record_mates_) mate_.assign(h, kPaired);
    std::uint32_t max_degree = 0;
    for (auto d : layout_.degrees()) max_degree = std::max(max_degree, d);
    empty_by_degree_.assign(std::size_t{max_degree} + 1, 0);
    selected_by_degree_.assign(std::size_t{max_degree} + 1, 0);
    for (auto d : layout_.degrees()) {
        ++empty_by_degree_[d];
        empty_half_edges_ += d;
    }
    empty_count_ = n;
    if (h % 2 != 0) throw ParityError("odd number of half-edges");
}

PairingProcess PairingProcess::from_state(const std::map<Degree, Count>& empties, std::uint64_t blocked_half_edges) {
    std::vector<std::uint32_t> degrees;
    for (const auto& [k, c] : empties) degrees.insert(degrees.end(), c, static_cast<std::uint32_t>(k));
    const std::size_t first_blocked = degrees.size();
    degrees.insert(degrees.end(), blocked_half_edges, 1u);
    PairingProcess p(std::move(degrees), false);
    for (std::size_t v = first_blocked; v < p.status_.size(); ++v) {
        p.status_[v] = VertexStatus::blocked;
        --p.empty_by_degree_[1];
        --p.empty_count_;
        --p.empty_half_edges_;
    }
    return p;
}

void PairingProcess::remove_from_pool(HalfEdge h) {
    const std::uint32_t idx = pos_[h];
    const HalfEdge last = pool_.back();
    pool_[idx] = last;
    pos_[last] = idx;
    pool_.pop_back();
    pos_[h] = kPaired;
}

void PairingProcess::pair(HalfEdge a, HalfEdge b) {
    if (record_mates_) {
        mate_[a] = b;
        mate_[b] = a;
    }
}

PairingProcess::Firing PairingProcess::fire(Vertex v, Rng& rng, std::vector<std::uint32_t>* blocked_degrees) {
    if (status_[v] != VertexStatus::empty) throw std::logic_error("fire() on a non-empty vertex");
    const std::uint32_t d = layout_.degree(v);
    status_[v] = VertexStatus::selected;
    --empty_by_degree_[d];
    --empty_count_;
    empty_half_edges_ -= d;
    ++selected_by_degree_[d];
    ++selected_;

    Firing out;
    const std::uint64_t before = pool_.size();
    const HalfEdge first = layout_.first(v);
    for (HalfEdge h = first; h < first + d; ++h) {
        if (pos_[h] == kPaired) continue; // taken by an earlier half-edge of v
        remove_from_pool(h);
        const HalfEdge other = pool_[static_cast<std::size_t>(rng.below(pool_.size()))];
        remove_from_pool(other);
        pair(h, other);
        const Vertex w = layout_.owner(other);
        if (w == v) {
            ++out.loops;
        } else if (status_[w] == VertexStatus::empty) {
            status_[w] = VertexStatus::blocked;
            const std::uint32_t dw = layout_.degree(w);
            --empty_by_degree_[dw];
            --empty_count_;
            empty_half_edges_ -= dw;
            ++out.blocked;
            if (blocked_degrees) blocked_degrees->push_back(dw);
        }
    }
    out.half_edges_removed = before - pool_.size();
    if (pool_.size() % 2 != 0 || empty_half_edges_ > pool_.size())
        throw std::logic_error("pairing process invariant violated");
    return out;
}

void PairingProcess::complete(Rng& rng) {
    while (!pool_.empty()) {
        const HalfEdge h = pool_.back();
        remove_from_pool(h);
        const HalfEdge other = pool_[static_cast<std::size_t>(rng.below(pool_.size()))];
        remove_from_pool(other);
        pair(h, other);
    }
}

SimState PairingProcess::snapshot(double t, bool with_partition) const {
    SimState s;
    s.t = t;
    s.U = pool_.size();
    for (std::size_t k = 0; k < empty_by_degree_.size(); ++k) {
        if (empty_by_degree_[k]) s.E[k] = empty_by_degree_[k];
        if (selected_by_degree_[k]) s.S_by_degree[k] = selected_by_degree_[k];
    }
    s.S = selected_;
    if (with_partition) s.partition = status_;
    return s;
}

TrajectoryRow PairingProcess::row(double t, std::size_t k_track) const {
    const double n = static_cast<double>(status_.size());
    TrajectoryRow r;
    r.t = t;
    r.u = static_cast<double>(pool_.size()) / n;
    r.s = static_cast<double>(selected_) / n;
    r.e.assign(k_track + 1, 0.0);
    r.s_k.assign(k_track + 1, 0.0);
    Count e_tracked = 0;
    Count s_tracked = 0;
    for (std::size_t k = 0; k <= k_track && k < empty_by_degree_.size(); ++k) {
        r.e[k] = static_cast<double>(empty_by_degree_[k]) / n;
        r.s_k[k] = static_cast<double>(selected_by_degree_[k]) / n;
        e_tracked += empty_by_degree_[k];
        s_tracked += selected_by_degree_[k];
    }
    r.e_over = static_cast<double>(empty_count_ - e_tracked) / n;
    r.s_over = static_cast<double>(selected_ - s_tracked) / n;
    return r;
}

Multigraph PairingProcess::graph() const {
    if (!record_mates_ || !pool_.empty()) throw std::logic_error("graph() needs a completed, recorded pairing");
    return collapse(layout_, mate_);
}

// ===========================================================================
// Static and dynamic runs
// ===========================================================================

SimResult run_static(const Multigraph& g, Rng& rng, LoopsPolicy loops_policy) {
    const std::size_t n = g.n();
    std::vector<std::uint32_t> start(n + 1, 0);
    std::vector<bool> looped(n, false);
    for (const auto& e : g.edges()) {
        if (e.u == e.v) {
            looped[e.u] = true;
            continue;
        }
        ++start[e.u + 1];
        ++start[e.v + 1];
    }
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<Vertex> adj(start.back());
    {
        std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
        for (const auto& e : g.edges()) {
            if (e.u == e.v) continue;
            adj[fill[e.u]++] = e.v;
            adj[fill[e.v]++] = e.u;
        }
    }

    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);

    SimResult result;
    result.n = n;
    result.seed = rng.seed();
    result.stream = rng.stream();
    result.loops_policy = loops_policy;
    result.partition.assign(n, VertexStatus::empty);
    for (Vertex v : order) {
        if (result.partition[v] != VertexStatus::empty) continue;
        if (loops_policy == LoopsPolicy::exclude && looped[v]) {
            result.partition[v] = VertexStatus::blocked;
            continue;
        }
        result.partition[v] = VertexStatus::selected;
        ++result.S_final;
        ++result.S_by_degree[g.degrees()[v]];
        for (std::uint32_t i = start[v]; i < start[v + 1]; ++i)
            if (result.partition[adj[i]] == VertexStatus::empty) result.partition[adj[i]] = VertexStatus::blocked;
    }
    result.final_graph = g;
    return result;
}

std::pair<SimResult, Trajectory> run_dynamic(const DegreeSequence& seq, Rng& rng, const TrackConfig& track) {
    PairingProcess proc(seq.degrees(), track.record_graph);
    const std::size_t n = proc.n();

    std::vector<double> clock(n);
    for (auto& c : clock) c = rng.exponential();
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    std::sort(order.begin(), order.end(),
              [&](Vertex a, Vertex b) { return clock[a] < clock[b] || (clock[a] == clock[b] && a < b); });

    Trajectory traj;
    traj.k_track = track.k_track;
    std::vector<double> grid;
    if (track.enabled) grid = uniform_grid(track.t_max, track.points);
    std::size_t next = 0;

    double t_end = 0.0;
    for (Vertex v : order) {
        const double t = clock[v];
        while (next < grid.size() && grid[next] < t) traj.samples.push_back(proc.row(grid[next++], track.k_track));
        if (proc.empty_count() == 0) break;
        if (proc.status(v) != VertexStatus::empty) continue; // blocked clocks are ignored
        proc.fire(v, rng);
        t_end = t;
    }
    while (next < grid.size()) traj.samples.push_back(proc.row(grid[next++], track.k_track));
    if (track.enabled) traj.terminal = proc.row(t_end, track.k_track);

    SimResult result;
    result.n = n;
    result.S_final = proc.selected();
    for (std::size_t k = 0; k <= seq.max_degree(); ++k)
        if (proc.selected(k)) result.S_by_degree[k] = proc.selected(k);
    result.seed = rng.seed();
    result.stream = rng.stream();
    result.loops_policy = LoopsPolicy::include;
    result.partition = proc.partition();
    if (track.record_graph) {
        proc.complete(rng);
        result.final_graph = proc.graph();
    }
    return {std::move(result), std::move(traj)};
}

// ===========================================================================
// Replicas
// ===========================================================================

ReplicaRun simulate_replica(const ReplicaScenario& scenario, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    DegreeSequence seq = build_sequence(scenario.seq, rng);
    long attempts = 0;
    SimResult r;
    if (scenario.graph_mode == GraphMode::simple) {
        // Uniform order over the fixed simple graph; clock order would give the same law.
        auto sample = sample_simple(seq, rng, scenario.max_attempts);
        attempts = sample.attempts;
        r = run_static(sample.graph, rng, scenario.loops_policy);
    } else if (scenario.sim_mode == SimMode::dynamic) {
        if (scenario.loops_policy == LoopsPolicy::exclude)
            throw ConfigError("the dynamic process admits looped vertices; use --mode static with --loops exclude");
        r = run_dynamic(seq, rng, TrackConfig{.enabled = false, .record_graph = false}).first;
    } else {
        r = run_static(sample_matching(seq, rng), rng, scenario.loops_policy);
    }
    r.seed = seed;
    r.stream = stream;
    return {std::move(seq), std::move(r), attempts};
}

ReplicaOutcome run_replica(const ReplicaScenario& scenario, std::uint64_t seed, std::uint64_t stream) {
    ReplicaRun run = simulate_replica(scenario, seed, stream);
    ReplicaOutcome out;
    out.stream = stream;
    out.n = run.seq.n();
    out.attempts = run.attempts;
    out.S = run.result.S_final;
    out.S_by_degree = std::move(run.result.S_by_degree);
    return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const auto workers = static_cast<std::size_t>(std::max(threads, 1));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1 || count == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < std::min(workers, count); ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ReplicaAggregate aggregate(std::vector<ReplicaOutcome> outcomes) {
    ReplicaAggregate agg;
    const auto m = static_cast<double>(outcomes.size());
    for (const auto& o : outcomes) {
        const double n = static_cast<double>(o.n);
        agg.values.push_back(static_cast<double>(o.S) / n);
        for (const auto& [k, c] : o.S_by_degree) agg.per_degree_means[k] += static_cast<double>(c) / n / m;
    }
    agg.mean = std::accumulate(agg.values.begin(), agg.values.end(), 0.0) / m;
    if (outcomes.size() > 1) {
        double ss = 0.0;
        for (double v : agg.values) ss += (v - agg.mean) * (v - agg.mean);
        agg.stddev = std::sqrt(ss / (m - 1.0));
    }
    agg.replicas = std::move(outcomes);
    return agg;
}

ReplicaAggregate run_replicas(const ReplicaScenario& scenario, int replicas, std::uint64_t seed, int threads) {
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    std::vector<ReplicaOutcome> outcomes(static_cast<std::size_t>(replicas));
    parallel_for(outcomes.size(), threads,
                 [&](std::size_t r) { outcomes[r] = run_replica(scenario, seed, static_cast<std::uint64_t>(r)); });
    return aggregate(std::move(outcomes));
}

} // namespace jamset

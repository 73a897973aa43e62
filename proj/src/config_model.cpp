#include "jamset/config_model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "jamset/error.hpp"

namespace jamset {

HalfEdgeLayout::HalfEdgeLayout(std::vector<std::uint32_t> degrees) : degrees_(std::move(degrees)) {
    std::uint64_t total = 0;
    offset_.resize(degrees_.size());
    for (std::size_t v = 0; v < degrees_.size(); ++v) {
        offset_[v] = static_cast<HalfEdge>(total);
        total += degrees_[v];
        if (total >= std::numeric_limits<HalfEdge>::max())
            throw ConfigError("too many half-edges for 32-bit ids");
    }
    owner_.resize(total);
    for (std::size_t v = 0; v < degrees_.size(); ++v)
        std::fill_n(owner_.begin() + offset_[v], degrees_[v], static_cast<Vertex>(v));
}

Multigraph Multigraph::from_edges(std::vector<std::uint32_t> degrees, std::vector<Edge> edges) {
    Multigraph g;
    std::vector<std::uint64_t> seen(degrees.size(), 0);
    for (auto& e : edges) {
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.v >= degrees.size()) throw ConfigError("edge endpoint out of range");
        seen[e.u] += 1;
        seen[e.v] += 1;
    }
    for (std::size_t v = 0; v < degrees.size(); ++v)
        if (seen[v] != degrees[v])
            throw ConfigError("handshake violated at vertex " + std::to_string(v + 1));
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].u == edges[i].v)
            ++g.loops_;
        else if (i > 0 && edges[i] == edges[i - 1])
            ++g.multi_;
    }
    g.degrees_ = std::move(degrees);
    g.edges_ = std::move(edges);
    return g;
}

bool is_simple(const Multigraph& g) noexcept { return g.loop_count() == 0 && g.multi_edge_count() == 0; }

std::vector<HalfEdge> sample_pairing(const HalfEdgeLayout& layout, Rng& rng) {
    std::vector<HalfEdge> pool(layout.half_edges());
    std::iota(pool.begin(), pool.end(), HalfEdge{0});
    std::vector<HalfEdge> mate(layout.half_edges());
    while (!pool.empty()) {
        const HalfEdge h = pool.back();
        pool.pop_back();
        const auto r = static_cast<std::size_t>(rng.below(pool.size()));
        const HalfEdge other = pool[r];
        pool[r] = pool.back();
        pool.pop_back();
        mate[h] = other;
        mate[other] = h;
    }
    return mate;
}

Multigraph collapse(const HalfEdgeLayout& layout, std::span<const HalfEdge> mate) {
    std::vector<Edge> edges;
    edges.reserve(mate.size() / 2);
    for (HalfEdge h = 0; h < mate.size(); ++h)
        if (h < mate[h]) edges.push_back({layout.owner(h), layout.owner(mate[h])});
    return Multigraph::from_edges(layout.degrees(), std::move(edges));
}

Multigraph sample_matching(const DegreeSequence& seq, Rng& rng) {
    const HalfEdgeLayout layout(seq.degrees());
    const auto mate = sample_pairing(layout, rng);
    return collapse(layout, mate);
}

std::optional<Multigraph> unique_realization(const DegreeSequence& seq) {
    const auto degrees = seq.degrees(); // ascending
    std::vector<Edge> edges;
    std::size_t lo = 0;
    std::size_t hi = degrees.size() - 1;
    std::uint64_t removed_dominating = 0;
    while (lo <= hi && hi < degrees.size()) {
        const std::uint64_t remaining = hi - lo + 1;
        if (degrees[lo] < removed_dominating) return std::nullopt;
        if (degrees[lo] - removed_dominating == 0) {
            ++lo;
            continue;
        }
        if (degrees[hi] - removed_dominating == remaining - 1) {
            for (std::size_t w = lo; w < hi; ++w)
                edges.push_back({static_cast<Vertex>(w), static_cast<Vertex>(hi)});
            ++removed_dominating;
            if (hi == 0) break;
            --hi;
            continue;
        }
        return std::nullopt;
    }
    return Multigraph::from_edges(degrees, std::move(edges));
}

SimpleSample sample_simple(const DegreeSequence& seq, Rng& rng, long max_attempts, SimpleMethod method) {
    if (max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
    if (method == SimpleMethod::automatic) {
        if (auto g = unique_realization(seq)) return {std::move(*g), 1, true};
    }
    const HalfEdgeLayout layout(seq.degrees());
    for (long attempt = 1; attempt <= max_attempts; ++attempt) {
        const auto mate = sample_pairing(layout, rng);
        auto g = collapse(layout, mate);
        if (is_simple(g)) return {std::move(g), attempt, false};
    }
    throw RejectionExhausted("no simple graph after " + std::to_string(max_attempts) +
                                 " configuration-model draws; the simple-graph probability vanishes "
                                 "unless sum_k k^2 n_k = O(n) (here sum_k k^2 n_k / n = " +
                                 std::to_string(static_cast<double>(seq.m2() + seq.half_edges()) /
                                                static_cast<double>(seq.n())) +
                                 ")",
                             max_attempts);
}

std::uint64_t pairing_count(std::uint64_t half_edges) {
    std::uint64_t out = 1;
    for (std::uint64_t k = 1; k + 1 <= half_edges; k += 2) out *= k;
    return out;
}

namespace {

void enumerate(std::vector<HalfEdge>& mate, std::vector<bool>& used, std::vector<std::vector<HalfEdge>>& out) {
    const auto first = std::find(used.begin(), used.end(), false);
    if (first == used.end()) {
        out.push_back(mate);
        return;
    }
    const auto h = static_cast<HalfEdge>(first - used.begin());
    used[h] = true;
    for (HalfEdge other = h + 1; other < used.size(); ++other) {
        if (used[other]) continue;
        used[other] = true;
        mate[h] = other;
        mate[other] = h;
        enumerate(mate, used, out);
        used[other] = false;
    }
    used[h] = false;
}

} // namespace

MatchingOracle enumerate_matchings(const DegreeSequence& seq) {
    if (seq.half_edges() > kMaxEnumeratedHalfEdges)
        throw ConfigError("enumeration limited to " + std::to_string(kMaxEnumeratedHalfEdges) + " half-edges");
    MatchingOracle oracle;
    std::vector<HalfEdge> mate(seq.half_edges());
    std::vector<bool> used(seq.half_edges(), false);
    enumerate(mate, used, oracle.all_matchings);
    oracle.count = oracle.all_matchings.size();
    return oracle;
}

void write_edge_list(std::ostream& os, const Multigraph& g) {
    for (const auto& e : g.edges()) os << (e.u + 1) << ' ' << (e.v + 1) << '\n';
}

} // namespace jamset

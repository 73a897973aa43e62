#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "jamset/degree_model.hpp"
#include "jamset/rng.hpp"

namespace jamset {

using Vertex = std::uint32_t;
using HalfEdge = std::uint32_t;

struct Edge {
    Vertex u = 0;
    Vertex v = 0; // u <= v; a loop has u == v
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Half-edges of vertex v are offset[v] .. offset[v] + degree[v] - 1.
class HalfEdgeLayout {
public:
    explicit HalfEdgeLayout(std::vector<std::uint32_t> degrees);

    std::size_t vertices() const noexcept { return degrees_.size(); }
    std::size_t half_edges() const noexcept { return owner_.size(); }
    const std::vector<std::uint32_t>& degrees() const noexcept { return degrees_; }
    std::uint32_t degree(Vertex v) const { return degrees_[v]; }
    HalfEdge first(Vertex v) const { return offset_[v]; }
    Vertex owner(HalfEdge h) const { return owner_[h]; }

private:
    std::vector<std::uint32_t> degrees_;
    std::vector<HalfEdge> offset_;
    std::vector<Vertex> owner_;
};

class Multigraph {
public:
    Multigraph() = default;
    // Edges are canonicalized (u <= v) and sorted. Throws ConfigError if the
    // handshake sum_v deg(v) = 2|E| (a loop counting 2) is violated per vertex.
    static Multigraph from_edges(std::vector<std::uint32_t> degrees, std::vector<Edge> edges);

    std::size_t n() const noexcept { return degrees_.size(); }
    const std::vector<std::uint32_t>& degrees() const noexcept { return degrees_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::uint64_t loop_count() const noexcept { return loops_; }
    // Extra copies of non-loop edges: sum over distinct pairs of (multiplicity - 1).
    std::uint64_t multi_edge_count() const noexcept { return multi_; }

    friend bool operator==(const Multigraph&, const Multigraph&) = default;

private:
    std::vector<std::uint32_t> degrees_;
    std::vector<Edge> edges_;
    std::uint64_t loops_ = 0;
    std::uint64_t multi_ = 0;
};

bool is_simple(const Multigraph& g) noexcept;

// mate[h] for every half-edge, uniform over all complete pairings.
std::vector<HalfEdge> sample_pairing(const HalfEdgeLayout& layout, Rng& rng);
Multigraph collapse(const HalfEdgeLayout& layout, std::span<const HalfEdge> mate);

Multigraph sample_matching(const DegreeSequence& seq, Rng& rng);

enum class SimpleMethod { automatic, rejection_only };

struct SimpleSample {
    Multigraph graph;
    long attempts = 0;
    // True when the sequence has exactly one labeled realization (threshold
    // sequence) and it was built directly instead of by rejection.
    bool unique_realization = false;
};

// Uniform simple graph with the given degrees. Rejection from the
// configuration model; sequences with a single realization short-circuit.
SimpleSample sample_simple(const DegreeSequence& seq, Rng& rng, long max_attempts,
                           SimpleMethod method = SimpleMethod::automatic);

// Builds the unique simple realization if the sequence is a threshold
// sequence (peel isolated or dominating vertices until none remain).
std::optional<Multigraph> unique_realization(const DegreeSequence& seq);

inline constexpr std::uint64_t kMaxEnumeratedHalfEdges = 12;

struct MatchingOracle {
    // one mate array per complete pairing, over the layout of seq.degrees()
    std::vector<std::vector<HalfEdge>> all_matchings;
    std::uint64_t count = 0;
};

MatchingOracle enumerate_matchings(const DegreeSequence& seq);

// (2m - 1)!! for half_edges = 2m; 1 when half_edges = 0.
std::uint64_t pairing_count(std::uint64_t half_edges);

// "u v" per line, 1-based, sorted; loops as "v v".
void write_edge_list(std::ostream& os, const Multigraph& g);

} // namespace jamset

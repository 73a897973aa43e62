#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jamset/rng.hpp"

namespace jamset {

using Degree = std::uint64_t;
using Count = std::uint64_t;

// Degree data of a finite graph, held as counts n_k rather than per-vertex
// degrees. Invariants: n >= 1 and the half-edge total sum_k k n_k is even.
class DegreeSequence {
public:
    static DegreeSequence from_counts(std::map<Degree, Count> counts);
    static DegreeSequence from_degrees(std::span<const Degree> degrees);

    const std::map<Degree, Count>& counts() const noexcept { return counts_; }
    Count count(Degree k) const;
    Count n() const noexcept { return n_; }
    Count half_edges() const noexcept { return half_edges_; }
    // sum_i d_i (d_i - 1)
    Count m2() const noexcept { return m2_; }
    Degree max_degree() const;

    // Per-vertex degrees in ascending order. Vertex i of every simulation
    // built from this sequence has degree degrees()[i].
    std::vector<std::uint32_t> degrees() const;

    friend bool operator==(const DegreeSequence&, const DegreeSequence&) = default;

private:
    explicit DegreeSequence(std::map<Degree, Count> counts);

    std::map<Degree, Count> counts_;
    Count n_ = 0;
    Count half_edges_ = 0;
    Count m2_ = 0;
};

// ---------------------------------------------------------------------------
// Sequence specs
// ---------------------------------------------------------------------------

struct CountsSpec {
    std::map<Degree, Count> counts;
};
struct RegularSpec {
    Degree d = 0;
    Count n = 0;
};
// One vertex of degree n-1, n-1 vertices of degree 1.
struct StarSpec {
    Count n = 0;
};
struct TwoBlockSpec {
    std::array<Count, 2> sizes{};
    std::array<Degree, 2> degrees{};
};
// Block A has floor(n^size_a_exp) vertices (or round(size_a_frac * n) when
// size_a_frac is set) of degree floor(n^deg_a_exp); block B holds the rest,
// each of degree floor(n^deg_b_exp). Odd totals are repaired by bumping one
// block-A vertex.
struct PowerTwoBlockSpec {
    Count n = 0;
    std::optional<double> size_a_exp;
    std::optional<double> size_a_frac;
    double deg_a_exp = 0.0;
    double deg_b_exp = 0.0;
};
// i.i.d. degrees from p, parity repaired by bumping one uniform vertex.
struct SampledSpec {
    std::map<Degree, double> p;
    Count n = 0;
};
struct PoissonSpec {
    double c = 0.0;
    Count n = 0;
};

using SequenceSpec = std::variant<CountsSpec, RegularSpec, StarSpec, TwoBlockSpec,
                                  PowerTwoBlockSpec, SampledSpec, PoissonSpec>;

SequenceSpec sequence_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SequenceSpec& spec);

// Same family at a different size. CountsSpec and TwoBlockSpec have no size
// parameter and are rejected.
SequenceSpec with_n(const SequenceSpec& spec, Count n);
bool consumes_rng(const SequenceSpec& spec);

// rng is only consumed by the sampled kinds.
DegreeSequence build_sequence(const SequenceSpec& spec, Rng& rng);

struct Empirical {
    std::map<Degree, double> phat;
    double lambda_n = 0.0;
};

Empirical empirical(const DegreeSequence& seq);

// ---------------------------------------------------------------------------
// Limit models
// ---------------------------------------------------------------------------

inline constexpr double kDefaultTailTol = 1e-12;

// Limiting degree law (p_k) together with the mean-degree parameter lambda,
// which may exceed sum_k k p_k when the degrees are not uniformly summable.
// lambda = +infinity is representable; the theory layer rejects it.
class LimitModel {
public:
    LimitModel(std::map<Degree, double> p, std::optional<double> lambda,
               double tail_tol = kDefaultTailTol);

    const std::map<Degree, double>& p() const noexcept { return p_; }
    double p(Degree k) const;
    double lambda() const noexcept { return lambda_; }
    double tail_tol() const noexcept { return tail_tol_; }
    // sum_k k p_k
    double mean() const noexcept { return mean_; }

    friend bool operator==(const LimitModel&, const LimitModel&) = default;

private:
    std::map<Degree, double> p_;
    double lambda_ = 0.0;
    double tail_tol_ = kDefaultTailTol;
    double mean_ = 0.0;
};

LimitModel limit_model(std::map<Degree, double> p, std::optional<double> lambda = std::nullopt,
                       double tail_tol = kDefaultTailTol);
LimitModel regular_limit(Degree d);
// Poisson(c) truncated where the remaining tail mass drops below tail_tol,
// then renormalized.
LimitModel poisson_limit(double c, double tail_tol = kDefaultTailTol);

LimitModel limit_model_from_json(const nlohmann::json& j);

} // namespace jamset

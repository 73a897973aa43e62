#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "jamset/config_model.hpp"
#include "jamset/error.hpp"
#include "oracles.hpp"

using namespace jamset;

namespace {

std::vector<std::uint32_t> degree_of(const Multigraph& g) {
    std::vector<std::uint32_t> d(g.n(), 0);
    for (const auto& e : g.edges()) {
        ++d[e.u];
        ++d[e.v];
    }
    return d;
}

std::vector<unsigned> as_unsigned(const std::vector<std::uint32_t>& d) { return {d.begin(), d.end()}; }

} // namespace

TEST_SUITE("config_model") {

TEST_CASE("half-edge layout") {
    const HalfEdgeLayout l({2, 0, 3});
    CHECK(l.vertices() == 3);
    CHECK(l.half_edges() == 5);
    CHECK(l.first(0) == 0);
    CHECK(l.first(2) == 2);
    CHECK(l.owner(1) == 0);
    CHECK(l.owner(4) == 2);
}

TEST_CASE("multigraph bookkeeping") {
    const auto g = Multigraph::from_edges({4, 3, 1}, {{1, 0}, {0, 1}, {0, 0}, {1, 2}});
    CHECK(g.loop_count() == 1);
    CHECK(g.multi_edge_count() == 1);
    CHECK(g.edges().front() == Edge{0, 0});
    CHECK_FALSE(is_simple(g));
    CHECK(is_simple(Multigraph::from_edges({1, 1}, {{0, 1}})));
    CHECK_THROWS_AS(Multigraph::from_edges({1, 2}, {{0, 1}}), ConfigError);
}

TEST_CASE("pairings are uniform") {
    // 6 half-edges: 15 pairings, each with probability 1/15
    const std::vector<std::uint32_t> deg{2, 1, 1, 2};
    const HalfEdgeLayout layout(deg);
    std::map<std::vector<int>, int> index;
    oracle::for_each_pairing(6, [&](const std::vector<int>& m) { index.emplace(m, static_cast<int>(index.size())); });
    REQUIRE(index.size() == 15);
    std::map<int, double> law;
    for (int i = 0; i < 15; ++i) law[i] = 1.0 / 15.0;
    std::map<int, std::uint64_t> seen;
    Rng rng(17);
    for (int t = 0; t < 150000; ++t) {
        const auto mate = sample_pairing(layout, rng);
        ++seen[index.at(std::vector<int>(mate.begin(), mate.end()))];
    }
    CHECK(oracle::chi_square_p(seen, law) > 1e-3);
}

TEST_CASE("enumeration agrees with the double factorial") {
    CHECK(pairing_count(0) == 1);
    CHECK(pairing_count(2) == 1);
    CHECK(pairing_count(12) == 10395);
    const auto seq = DegreeSequence::from_counts({{3, 4}});
    const auto all = enumerate_matchings(seq);
    CHECK(all.count == 10395);
    CHECK(all.all_matchings.size() == 10395);
    std::set<std::vector<HalfEdge>> distinct(all.all_matchings.begin(), all.all_matchings.end());
    CHECK(distinct.size() == 10395);
    CHECK_THROWS_AS(enumerate_matchings(DegreeSequence::from_counts({{2, 7}})), ConfigError);
}

TEST_CASE("sampled multigraphs keep their degrees") {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto seq = build_sequence(PoissonSpec{3.0, 200}, rng);
        const auto g = sample_matching(seq, rng);
        CHECK(degree_of(g) == seq.degrees());
        CHECK(g.edges().size() * 2 == seq.half_edges());
    }
}

TEST_CASE("simple-graph acceptance rate") {
    // 3-regular on 4 vertices: only K4 is simple, hit by 6^4 of 11!! pairings
    const auto seq = DegreeSequence::from_counts({{3, 4}});
    std::uint64_t simple = 0;
    {
        std::uint64_t total = 0;
        const auto own = oracle::owners({3, 3, 3, 3});
        oracle::for_each_pairing(12, [&](const std::vector<int>& m) {
            std::set<std::pair<int, int>> seen;
            bool ok = true;
            for (int h = 0; h < 12; ++h) {
                const int a = own[h], b = own[m[h]];
                if (a == b) ok = false;
                if (a < b && !seen.insert({a, b}).second) ok = false;
            }
            simple += ok;
            ++total;
        });
        CHECK(total == 10395);
        CHECK(simple == 1296);
    }
    Rng rng(4);
    const int trials = 20000;
    long draws = 0;
    for (int t = 0; t < trials; ++t) {
        const auto s = sample_simple(seq, rng, 100000, SimpleMethod::rejection_only);
        CHECK(s.graph.edges().size() == 6);
        draws += s.attempts;
    }
    // draws are geometric with success probability q
    const double q = 1296.0 / 10395.0;
    const double mean = static_cast<double>(draws) / trials;
    const double se = std::sqrt((1 - q) / (q * q) / trials);
    CHECK(std::abs(mean - 1 / q) < 4 * se);
}

TEST_CASE("simple graphs are uniform over realizations") {
    // degrees (2,2,1,1): two labeled paths; (1,1,1,1): three perfect matchings
    for (const std::vector<Degree>& d : {std::vector<Degree>{1, 1, 2, 2}, std::vector<Degree>{1, 1, 1, 1}}) {
        const auto seq = DegreeSequence::from_degrees(d);
        std::map<std::vector<Edge>, int> index;
        std::map<int, std::uint64_t> seen;
        Rng rng(8);
        for (int t = 0; t < 30000; ++t) {
            const auto s = sample_simple(seq, rng, 1000);
            REQUIRE(is_simple(s.graph));
            const auto [it, fresh] = index.emplace(s.graph.edges(), static_cast<int>(index.size()));
            ++seen[it->second];
        }
        const int classes = d[3] == 2 ? 2 : 3;
        CHECK(index.size() == static_cast<std::size_t>(classes));
        std::map<int, double> law;
        for (int i = 0; i < classes; ++i) law[i] = 1.0 / classes;
        CHECK(oracle::chi_square_p(seen, law) > 1e-3);
    }
}

TEST_CASE("threshold sequences are built directly") {
    const auto star = DegreeSequence::from_counts({{1, 999}, {999, 1}});
    Rng rng(1);
    const auto s = sample_simple(star, rng, 10);
    CHECK(s.unique_realization);
    CHECK(s.attempts == 1);
    CHECK(is_simple(s.graph));
    CHECK(degree_of(s.graph) == star.degrees());
    CHECK(unique_realization(DegreeSequence::from_counts({{3, 4}})).has_value()); // K4
    CHECK_FALSE(unique_realization(DegreeSequence::from_counts({{2, 5}})).has_value());
    CHECK_FALSE(unique_realization(DegreeSequence::from_counts({{3, 2}})).has_value());
}

TEST_CASE("rejection exhaustion") {
    Rng rng(1);
    const auto seq = DegreeSequence::from_counts({{3, 2}}); // no simple realization
    try {
        (void)sample_simple(seq, rng, 25);
        FAIL("expected exhaustion");
    } catch (const RejectionExhausted& e) {
        CHECK(e.attempts() == 25);
        CHECK(std::string(e.what()).find("k^2") != std::string::npos);
    }
}

TEST_CASE("edge list output") {
    const auto g = Multigraph::from_edges({1, 2, 1}, {{1, 0}, {2, 1}});
    std::ostringstream os;
    write_edge_list(os, g);
    CHECK(os.str() == "1 2\n2 3\n");
}

}

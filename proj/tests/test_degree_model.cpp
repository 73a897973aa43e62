#include <doctest.h>

#include <cmath>
#include <limits>

#include "jamset/degree_model.hpp"
#include "jamset/error.hpp"

using namespace jamset;
using nlohmann::json;

TEST_SUITE("degree_model") {

TEST_CASE("sequence from counts") {
    const auto s = DegreeSequence::from_counts({{0, 2}, {1, 2}, {3, 2}, {5, 0}});
    CHECK(s.n() == 6);
    CHECK(s.half_edges() == 8);
    CHECK(s.m2() == 12);
    CHECK(s.max_degree() == 3);
    CHECK(s.count(5) == 0);
    CHECK(s.counts().size() == 3);
    CHECK(s.degrees() == std::vector<std::uint32_t>{0, 0, 1, 1, 3, 3});
}

TEST_CASE("sequence from degrees tallies") {
    const std::vector<Degree> d{2, 1, 2, 1};
    const auto s = DegreeSequence::from_degrees(d);
    CHECK(s.count(1) == 2);
    CHECK(s.count(2) == 2);
    CHECK(s.degrees() == std::vector<std::uint32_t>{1, 1, 2, 2});
}

TEST_CASE("odd or empty sequences are rejected") {
    CHECK_THROWS_AS(DegreeSequence::from_counts({{1, 3}}), ParityError);
    CHECK_THROWS_AS(DegreeSequence::from_counts({}), ConfigError);
    CHECK_THROWS_AS(DegreeSequence::from_counts({{2, 0}}), ConfigError);
    Rng rng(1);
    CHECK_THROWS_AS(build_sequence(RegularSpec{3, 5}, rng), ParityError);
    CHECK_THROWS_AS(build_sequence(TwoBlockSpec{{1, 2}, {3, 1}}, rng), ParityError);
}

TEST_CASE("regular and star") {
    Rng rng(1);
    const auto r = build_sequence(RegularSpec{3, 10}, rng);
    CHECK(r.count(3) == 10);
    const auto s = build_sequence(StarSpec{10}, rng);
    CHECK(s.count(1) == 9);
    CHECK(s.count(9) == 1);
    CHECK(s.half_edges() == 18);
    CHECK_THROWS_AS(build_sequence(StarSpec{1}, rng), ConfigError);
}

TEST_CASE("power two-block sizes") {
    Rng rng(1);
    PowerTwoBlockSpec t;
    t.n = 100000;
    t.size_a_exp = 0.6;
    t.deg_a_exp = 0.6;
    t.deg_b_exp = 0.05;
    const auto s = build_sequence(t, rng);
    CHECK(s.n() == 100000);
    CHECK(s.count(1) == 99000); // floor(10^0.25) = 1
    CHECK(s.count(1000) == 1000);

    // odd total: one block-A vertex is bumped
    PowerTwoBlockSpec u;
    u.n = 9;
    u.size_a_frac = 1.0 / 3.0;
    u.deg_a_exp = 0.5;
    u.deg_b_exp = 0.0;
    const auto v = build_sequence(u, rng);
    CHECK(v.n() == 9);
    CHECK(v.count(1) == 6);
    CHECK(v.count(3) == 2);
    CHECK(v.count(4) == 1);
}

TEST_CASE("sampled sequences: parity and moments") {
    Rng rng(11);
    const auto s = build_sequence(PoissonSpec{2.0, 100000}, rng);
    CHECK(s.n() == 100000);
    CHECK(s.half_edges() % 2 == 0);
    CHECK(empirical(s).lambda_n == doctest::Approx(2.0).epsilon(0.02));
    CHECK(static_cast<double>(s.count(0)) / 1e5 == doctest::Approx(std::exp(-2.0)).epsilon(0.05));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng r(seed);
        const auto t = build_sequence(SampledSpec{{{1, 0.5}, {2, 0.5}}, 7}, r);
        CHECK(t.n() == 7);
        CHECK(t.half_edges() % 2 == 0);
    }
}

TEST_CASE("sampled sequences are reproducible") {
    Rng a(3, 1), b(3, 1);
    const auto x = build_sequence(PoissonSpec{1.5, 1000}, a);
    const auto y = build_sequence(PoissonSpec{1.5, 1000}, b);
    CHECK(x.counts() == y.counts());
}

TEST_CASE("spec json round trip") {
    const std::vector<json> specs{
        {{"kind", "counts"}, {"counts", {{"1", 2}, {"3", 4}}}},
        {{"kind", "regular"}, {"d", 3}, {"n", 100}},
        {{"kind", "star"}, {"n", 50}},
        {{"kind", "twoblock"}, {"sizes", {2, 4}}, {"degrees", {3, 1}}},
        {{"kind", "twoblock"}, {"n", 1000}, {"size_a_exp", 0.6}, {"deg_a_exp", 0.6}, {"deg_b_exp", 0.05}},
        {{"kind", "sampled"}, {"p", {{"1", 0.25}, {"2", 0.75}}}, {"n", 10}},
        {{"kind", "poisson"}, {"c", 1.0}, {"n", 10}},
    };
    for (const auto& j : specs) {
        CAPTURE(j.dump());
        const auto spec = sequence_spec_from_json(j);
        CHECK(to_json(sequence_spec_from_json(to_json(spec))) == to_json(spec));
    }
    const auto d = sequence_spec_from_json({{"kind", "degrees"}, {"degrees", {3, 1, 1, 1}}});
    Rng rng(1);
    CHECK(build_sequence(d, rng).count(1) == 3);
    CHECK(std::get<RegularSpec>(sequence_spec_from_json(json::parse(R"({"kind":"regular","d":2,"n":1e5})"))).n ==
          100000);
}

TEST_CASE("malformed specs") {
    CHECK_THROWS_AS(sequence_spec_from_json(json::parse("[1]")), ConfigError);
    CHECK_THROWS_AS(sequence_spec_from_json({{"kind", "nope"}}), ConfigError);
    CHECK_THROWS_AS(sequence_spec_from_json({{"kind", "regular"}, {"d", 3}}), ConfigError);
    CHECK_THROWS_AS(sequence_spec_from_json({{"kind", "regular"}, {"d", -3}, {"n", 4}}), ConfigError);
    CHECK_THROWS_AS(sequence_spec_from_json({{"kind", "counts"}, {"counts", {{"x", 1}}}}), ConfigError);
    CHECK_THROWS_AS(sequence_spec_from_json({{"kind", "counts"}, {"counts", {{"1", 1.5}}}}), ConfigError);
}

TEST_CASE("with_n") {
    CHECK(std::get<RegularSpec>(with_n(RegularSpec{3, 10}, 20)).n == 20);
    CHECK(std::get<PoissonSpec>(with_n(PoissonSpec{1.0, 10}, 20)).n == 20);
    CHECK_THROWS_AS(with_n(CountsSpec{{{1, 2}}}, 4), ConfigError);
    CHECK(consumes_rng(PoissonSpec{1.0, 10}));
    CHECK_FALSE(consumes_rng(StarSpec{10}));
}

TEST_CASE("empirical law") {
    const auto e = empirical(DegreeSequence::from_counts({{1, 2}, {2, 2}}));
    CHECK(e.phat.at(1) == 0.5);
    CHECK(e.lambda_n == 1.5);
}

TEST_CASE("limit model validation") {
    const auto m = limit_model({{1, 0.5}, {3, 0.5}, {4, 0.0}});
    CHECK(m.mean() == 2.0);
    CHECK(m.lambda() == 2.0);
    CHECK(m.p().size() == 2);
    CHECK(m.p(4) == 0.0);
    CHECK(limit_model({{1, 1.0}}, 2.0).lambda() == 2.0);
    CHECK(std::isinf(limit_model({{1, 1.0}}, std::numeric_limits<double>::infinity()).lambda()));
    CHECK_THROWS_AS(limit_model({{1, 0.5}}), ConfigError);
    CHECK_THROWS_AS(limit_model({{1, 1.2}, {2, -0.2}}), ConfigError);
    CHECK_THROWS_AS(limit_model({{2, 1.0}}, 1.0), ConfigError);
    CHECK_THROWS_AS(limit_model({{0, 1.0}}), ConfigError);
}

TEST_CASE("poisson limit truncation") {
    for (double c : {0.5, 1.0, 4.0}) {
        const auto m = poisson_limit(c);
        double total = 0.0;
        for (const auto& [k, p] : m.p()) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m.mean() == doctest::Approx(c).epsilon(1e-10));
        CHECK(m.p(0) == doctest::Approx(std::exp(-c)).epsilon(1e-11));
    }
}

TEST_CASE("limit model json") {
    CHECK(limit_model_from_json({{"kind", "regular"}, {"d", 3}}) == regular_limit(3));
    const auto star = limit_model_from_json({{"kind", "star"}});
    CHECK(star.p(1) == 1.0);
    CHECK(star.lambda() == 2.0);
    const auto inf = limit_model_from_json({{"kind", "counts-limit"}, {"p", {{"1", 1.0}}}, {"lambda", "inf"}});
    CHECK(std::isinf(inf.lambda()));
    const auto cl = limit_model_from_json({{"kind", "counts-limit"}, {"p", {{"0", 0.4}, {"1", 0.6}}}});
    CHECK(cl.lambda() == doctest::Approx(0.6));
    CHECK_THROWS_AS(limit_model_from_json({{"kind", "poisson"}}), ConfigError);
    CHECK_THROWS_AS(limit_model_from_json({{"kind", "counts-limit"}, {"p", {{"1", 1.0}}}, {"lambda", "big"}}),
                    ConfigError);
}

}

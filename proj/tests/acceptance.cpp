// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "jamset/experiments.hpp"
#include "jamset/greedy_sim.hpp"
#include "jamset/theory.hpp"
#include "oracles.hpp"

using namespace jamset;
namespace ex = jamset::experiments;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
    }
};

std::string num(double x, int prec = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double dynamic_mean(const SequenceSpec& seq, GraphMode mode, int replicas, std::uint64_t seed) {
    ReplicaScenario sc;
    sc.seq = seq;
    sc.graph_mode = mode;
    return run_replicas(sc, replicas, seed, threads()).mean;
}

// ---------------------------------------------------------------------------

Outcome regular_two() {
    Outcome o;
    const double exact = 0.4323323584; // (1 - e^{-2}) / 2, ten digits
    const auto th = theory::jamming_constant(regular_limit(2));
    o.require(std::abs(th.s_inf - exact) < 1e-8, "theory s_inf=" + num(th.s_inf));
    const double mean = dynamic_mean(RegularSpec{2, 100000}, GraphMode::multigraph, 20, 1);
    o.require(std::abs(mean - th.s_inf) < 0.005, "sim mean=" + num(mean, 6) + " (n=1e5, 20 replicas)");
    return o;
}

Outcome regular_three() {
    Outcome o;
    const double closed = 0.5 * (1.0 - std::pow(2.0, -2.0));
    const auto th = theory::jamming_constant(regular_limit(3));
    o.require(std::abs(th.s_inf - closed) < 1e-8 && std::abs(closed - 0.375) < 1e-15,
              "theory s_inf=" + num(th.s_inf));
    const double mean = dynamic_mean(RegularSpec{3, 100000}, GraphMode::multigraph, 20, 1);
    o.require(std::abs(mean - th.s_inf) < 0.005, "sim mean=" + num(mean, 6));
    return o;
}

Outcome poisson_one() {
    Outcome o;
    const auto th = theory::jamming_constant(poisson_limit(1.0));
    o.require(std::abs(th.s_inf - std::log(2.0)) < 1e-8, "theory s_inf=" + num(th.s_inf));
    // (1/c) integral_{c - log(1+c)}^{c} e^{-x} dx at c = 1 equals e^{-1}
    const double s0 = th.s_inf_by_degree.at(0);
    o.require(std::abs(s0 - std::exp(-1.0)) < 1e-6, "s_inf(0)=" + num(s0));
    double total = 0.0;
    for (const auto& [k, v] : th.s_inf_by_degree) total += v;
    o.require(std::abs(total - th.s_inf) < 1e-6, "sum_k s_inf(k)=" + num(total));
    const double mean = dynamic_mean(PoissonSpec{1.0, 100000}, GraphMode::multigraph, 20, 1);
    o.require(std::abs(mean - th.s_inf) < 0.01, "sim mean=" + num(mean, 6));
    return o;
}

Outcome star() {
    Outcome o;
    const auto th = theory::jamming_constant(limit_model({{1, 1.0}}, 2.0));
    o.require(std::abs(th.tau_inf - std::log(2.0)) < 1e-8, "tau_inf=" + num(th.tau_inf));
    o.require(std::abs(th.s_inf - 0.75) < 1e-8, "s_inf=" + num(th.s_inf));
    const double mean = dynamic_mean(StarSpec{100000}, GraphMode::multigraph, 20, 1);
    o.require(mean >= 0.73 && mean <= 0.77, "multigraph mean=" + num(mean, 6));
    ReplicaScenario sc;
    sc.seq = StarSpec{100000};
    sc.graph_mode = GraphMode::simple;
    const auto agg = run_replicas(sc, 20, 1, threads());
    int leaves = 0;
    for (const auto& r : agg.replicas) leaves += r.S == r.n - 1;
    o.require(leaves >= 19, "simple S=n-1 in " + std::to_string(leaves) + "/20");
    return o;
}

Outcome connect_probability() {
    Outcome o;
    int cases = 0;
    double worst = 0.0;
    bool bracketed = true;
    for (unsigned u = 2; u <= 12; u += 2)
        for (unsigned j = 0; j <= 3; ++j)
            for (unsigned k = 0; k <= 3; ++k) {
                if (j + k > u) continue;
                const auto p = theory::p_connect(j, k, u);
                worst = std::max(worst, std::abs(p.exact - oracle::connect_probability(j, k, u)));
                bracketed = bracketed && p.lower <= p.exact + 1e-15 && p.exact <= p.upper + 1e-15;
                ++cases;
            }
    o.require(worst < 1e-12, std::to_string(cases) + " cases, max error " + num(worst, 3));
    o.require(bracketed, "bounds bracket the exact value");
    return o;
}

Outcome drift() {
    Outcome o;
    struct Frozen {
        std::map<Degree, Count> E;
        std::uint64_t blocked;
    };
    const std::vector<Frozen> states{
        {{{1, 2}}, 0},
        {{{2, 1}}, 2},
        {{{1, 4}}, 0},
        {{{2, 2}}, 0},
        {{{3, 2}}, 0},
        {{{1, 2}, {2, 1}}, 2},
        {{{1, 3}, {3, 1}}, 4},
        {{{2, 3}}, 4},
        {{{3, 4}}, 0},
        {{{1, 5}, {2, 2}, {4, 1}}, 3},
        {{{0, 2}, {1, 2}, {2, 2}}, 4},
        {{{4, 3}}, 8},
        {{{1, 4}, {5, 2}}, 2},
        {{{2, 10}}, 0},
        {{{3, 6}}, 4},
        {{{1, 10}, {3, 4}}, 8},
        {{{2, 3}, {6, 2}}, 6},
        {{{2, 5}, {3, 4}, {4, 2}}, 0},
        {{{1, 8}, {2, 4}, {3, 2}, {5, 2}}, 0},
        {{{3, 10}}, 10},
    };
    const long trials = 1000000;
    int checked = 0, failed = 0;
    double worst_z = 0.0;
    Rng rng(2024);
    for (const auto& st : states) {
        const auto base = PairingProcess::from_state(st.E, st.blocked);
        const auto snap = base.snapshot(0.0);
        const auto formula = theory::drift(snap);
        std::vector<Vertex> empties;
        for (Vertex v = 0; v < base.n(); ++v)
            if (base.status(v) == VertexStatus::empty) empties.push_back(v);
        const double N = static_cast<double>(empties.size());

        // one firing of a uniformly chosen empty vertex, scaled by the total rate N
        std::map<Degree, double> sum_e, sum_e2;
        double sum_u = 0.0, sum_u2 = 0.0;
        std::vector<std::uint32_t> blocked;
        PairingProcess p = base;
        for (long t = 0; t < trials; ++t) {
            p = base;
            blocked.clear();
            const Vertex v = empties[rng.below(empties.size())];
            const auto f = p.fire(v, rng, &blocked);
            const double du = -static_cast<double>(f.half_edges_removed);
            sum_u += du;
            sum_u2 += du * du;
            std::map<Degree, double> de;
            de[base.layout().degree(v)] -= 1.0;
            for (auto d : blocked) de[d] -= 1.0;
            for (const auto& [k, c] : st.E) {
                const double x = de.count(k) ? de[k] : 0.0;
                sum_e[k] += x;
                sum_e2[k] += x * x;
            }
        }
        auto check = [&](double sum, double sum2, double expect) {
            const double T = static_cast<double>(trials);
            const double mean = sum / T;
            const double var = std::max(0.0, sum2 / T - mean * mean);
            const double se = N * std::sqrt(var / (T - 1));
            const double diff = std::abs(N * mean - expect);
            ++checked;
            if (diff > 3 * se + 1e-9) ++failed;
            if (se > 0) worst_z = std::max(worst_z, diff / se);
        };
        check(sum_u, sum_u2, formula.dU);
        for (const auto& [k, c] : st.E) check(sum_e[k], sum_e2[k], formula.dE.at(k));
        double total = 0.0;
        for (const auto& [k, c] : st.E) total += static_cast<double>(c);
        ++checked;
        if (formula.dS != total) ++failed;
    }
    o.require(failed == 0, std::to_string(states.size()) + " states, " + std::to_string(checked) + " checks, " +
                               std::to_string(failed) + " outside 3 SE, max |z|=" + num(worst_z, 3));
    return o;
}

Outcome mode_equivalence() {
    Outcome o;
    std::vector<std::vector<unsigned>> seqs;
    std::function<void(std::vector<unsigned>&, unsigned, unsigned)> gen = [&](std::vector<unsigned>& cur,
                                                                               unsigned min_d, unsigned left) {
        if (!cur.empty()) {
            unsigned sum = 0;
            for (auto d : cur) sum += d;
            if (sum % 2 == 0) seqs.push_back(cur);
        }
        if (cur.size() == 5) return;
        for (unsigned d = min_d; d <= left; ++d) {
            cur.push_back(d);
            gen(cur, d, left - d);
            cur.pop_back();
        }
    };
    std::vector<unsigned> cur;
    gen(cur, 0, 8);

    const int runs = 100000;
    int failed = 0;
    double min_p = 1.0;
    std::vector<double> p_static(seqs.size()), p_dynamic(seqs.size());
    parallel_for(seqs.size(), threads(), [&](std::size_t i) {
        const auto& d = seqs[i];
        const auto law = oracle::greedy_law(d);
        std::vector<Degree> degs(d.begin(), d.end());
        const auto seq = DegreeSequence::from_degrees(degs);
        std::map<int, std::uint64_t> sta, dyn;
        Rng a(31, i), b(37, i);
        TrackConfig quiet;
        quiet.record_graph = false;
        for (int t = 0; t < runs; ++t) {
            ++sta[static_cast<int>(run_static(sample_matching(seq, a), a, LoopsPolicy::include).S_final)];
            ++dyn[static_cast<int>(run_dynamic(seq, b, quiet).first.S_final)];
        }
        p_static[i] = oracle::chi_square_p(sta, law);
        p_dynamic[i] = oracle::chi_square_p(dyn, law);
    });
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        min_p = std::min({min_p, p_static[i], p_dynamic[i]});
        failed += (p_static[i] <= 1e-3) + (p_dynamic[i] <= 1e-3);
    }
    o.require(failed == 0, std::to_string(seqs.size()) + " sequences x 2 simulators x 1e5 runs, " +
                               std::to_string(failed) + " with p <= 0.001, min p=" + num(min_p, 3));
    return o;
}

Outcome trajectory() {
    Outcome o;
    auto s = ex::preset("regular-d2");
    s.replicas = 5;
    const auto r = ex::trajectory_compare(s, 100000, {}, threads());
    o.require(r.sup_u < 0.02, "sup |U/n - u|=" + num(r.sup_u, 4));
    o.require(r.sup_s < 0.02, "sup |S/n - s|=" + num(r.sup_s, 4));

    // finite-difference residual of the differential system along the fluid limit
    double worst = 0.0;
    for (const auto& model : {regular_limit(2), poisson_limit(1.0)}) {
        const double h = 1e-3;
        auto state = [&](double t) {
            const double tau = theory::time_change(model, t, 1e-13);
            std::map<Degree, double> e;
            for (const auto& [k, pk] : model.p()) e[k] = std::exp(-t) * pk * std::exp(-static_cast<double>(k) * tau);
            return std::pair{model.lambda() * std::exp(-2 * tau), e};
        };
        auto d4 = [&](double m2, double m1, double p1, double p2) { return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h); };
        for (double t = 0.25; t <= 8.0; t += 0.25) {
            const auto [u, e] = state(t);
            const auto A = state(t - 2 * h), B = state(t - h), C = state(t + h), D = state(t + 2 * h);
            double ke = 0.0;
            for (const auto& [k, v] : e) ke += static_cast<double>(k) * v;
            worst = std::max(worst, std::abs(d4(A.first, B.first, C.first, D.first) + 2 * ke));
            for (const auto& [k, v] : e) {
                const double rhs = -v - static_cast<double>(k) * v * ke / u;
                worst = std::max(worst,
                                 std::abs(d4(A.second.at(k), B.second.at(k), C.second.at(k), D.second.at(k)) - rhs));
            }
        }
    }
    o.require(worst < 1e-6, "ODE residual=" + num(worst, 3));
    return o;
}

Outcome coverage() {
    Outcome o;
    const auto r = ex::coverage_study(ex::preset("twoblock-alpha-gamma"), 100000, threads(), 0.9);
    double lo = 1.0;
    for (const auto& c : r.replicas) lo = std::min(lo, c.applicable ? c.covered_fraction : 0.0);
    o.require(r.above_threshold >= 9, std::to_string(r.above_threshold) + "/" + std::to_string(r.replicas.size()) +
                                          " seeds above 0.9, min fraction " + num(lo, 4) + ", r_n=" +
                                          std::to_string(r.replicas.front().r_n));
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s; // runtime bound, 0 when none is stated
        Outcome (*run)();
    };
    const std::vector<Criterion> all{
        {1, "regular d=2 constant", 30, regular_two},
        {2, "regular d=3 constant", 0, regular_three},
        {3, "poisson c=1 constant", 0, poisson_one},
        {4, "star example", 0, star},
        {5, "connection probability", 10, connect_probability},
        {6, "drift", 120, drift},
        {7, "static/dynamic equivalence", 180, mode_equivalence},
        {8, "trajectory convergence", 0, trajectory},
        {9, "low-degree coverage", 0, coverage},
    };
    int failures = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime " + num(secs, 3) + "s < " + num(c.budget_s) + "s");
        else o.detail += "; runtime " + num(secs, 3) + "s";
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}

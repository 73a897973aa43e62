#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "jamset/degree_model.hpp"
#include "jamset/greedy_sim.hpp"
#include "jamset/trajectory.hpp"

// Limit objects of the greedy process on a configuration model with limiting
// degree law (p_k) and mean-degree parameter lambda:
//
//   integrand(s)   = lambda e^{-2s} / sum_k k p_k e^{-ks}
//   tau_inf        : integral_0^{tau_inf} integrand = 1
//   s_inf          = integral_0^{tau_inf} integrand(s) * sum_k p_k e^{-ks} ds
//   s_inf(k)       = integral_0^{tau_inf} integrand(s) * p_k e^{-ks} ds
//   tau_t          : integral_0^{tau_t} integrand = 1 - e^{-t}
//   u_t = lambda e^{-2 tau_t},  e_t(k) = e^{-t} p_k e^{-k tau_t}
namespace jamset::theory {

inline constexpr double kDefaultTol = 1e-10;

struct TheoryResult {
    double tau_inf = 0.0; // +infinity when p_0 + p_1 = 1 and lambda = p_1
    double s_inf = 0.0;
    std::map<Degree, double> s_inf_by_degree;
    double residual = 0.0; // |integral_0^{tau_inf} integrand - 1|
    double mass_gap = 0.0; // |s_inf - sum_k s_inf(k)|
    double tol = 0.0;
};

nlohmann::json to_json(const TheoryResult& r);

// sum_k k^m p_k e^{-k sigma}, m in {0, 1}
double weighted_series(const LimitModel& model, double sigma, int m);

double integrand(const LimitModel& model, double sigma);

double tau_infinity(const LimitModel& model, double tol = kDefaultTol);

TheoryResult jamming_constant(const LimitModel& model, double tol = kDefaultTol);

double degree_mass(const LimitModel& model, Degree k, double tol = kDefaultTol);

double time_change(const LimitModel& model, double t, double tol = kDefaultTol);

struct FluidTrajectory {
    std::size_t k_track = 0;
    std::vector<double> tau;
    std::vector<TrajectoryRow> rows; // same layout as the simulated trajectory
};

// grid must be sorted and non-negative.
FluidTrajectory limit_trajectory(const LimitModel& model, std::span<const double> grid, double tol = kDefaultTol,
                                 std::size_t k_track = 50);

nlohmann::json to_json(const FluidTrajectory& f);

struct RegularClosedForm {
    double tau_inf = 0.0;
    double s_inf = 0.0;
};

// d = 2: (1, (1 - e^{-2})/2); d >= 3: (log(d-1)/(d-2), (1 - (d-1)^{-2/(d-2)})/2)
RegularClosedForm closed_form_regular(int d);

struct PoissonClosedForm {
    double tau_inf = 0.0;
    double s_inf = 0.0;
    std::map<Degree, double> s_inf_by_degree; // k = 0..K
};

// e^{-tau_inf} = 1 - log(c+1)/c, s_inf = log(c+1)/c and
// s_inf(k) = (1/c) integral_{c - log(c+1)}^{c} x^k e^{-x} / k! dx.
PoissonClosedForm closed_form_poisson(double c, int K, double tol = kDefaultTol);

struct ConnectProbability {
    double exact = 0.0;
    double lower = 0.0; // second Bonferroni bound
    double upper = 0.0; // jk/(u-1), clipped to [0, 1]
};

// Probability that two distinct vertices of degrees j and k are joined by at
// least one edge in a uniform pairing of u half-edges.
ConnectProbability p_connect(std::uint64_t j, std::uint64_t k, std::uint64_t u);

struct Drift {
    double dS = 0.0;
    double dU = 0.0;
    std::map<Degree, double> dE;
};

// Instantaneous expected rates of change of (S, U, E(k)) in the clock process.
Drift drift(const SimState& state);

} // namespace jamset::theory

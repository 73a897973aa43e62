#include "jamset/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jamset/error.hpp"
#include "jamset/quadrature.hpp"

namespace jamset::theory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The series are rescaled by e^{ell * sigma}, ell the smallest positive
// degree in the support, so the integrands stay finite for large sigma.
class Kernel {
public:
    explicit Kernel(const LimitModel& model) : lambda_(model.lambda()) {
        if (!std::isfinite(lambda_))
            throw UnsupportedRegime("lambda = infinity: the limit formulas are not meaningful in this regime");
        bool has_edges = false;
        for (const auto& [k, p] : model.p()) {
            support_.push_back({static_cast<double>(k), p});
            if (k > 0 && !has_edges) {
                ell_ = static_cast<double>(k);
                has_edges = true;
            }
        }
        if (!has_edges) throw ConfigError("degenerate model: p_0 = 1, there are no half-edges");
        p0_ = model.p(0);
        p1_ = model.p(1);
        infinite_ = p0_ + p1_ >= 1.0 - 1e-12 && lambda_ <= p1_ + 1e-12;
    }

    double lambda() const { return lambda_; }
    double p0() const { return p0_; }
    double p1() const { return p1_; }
    // p_0 + p_1 = 1 with lambda = p_1: tau_inf = infinity
    bool infinite() const { return infinite_; }

    // sum_k k p_k e^{-(k - ell) sigma}
    double scaled_den(double sigma) const {
        double out = 0.0;
        for (const auto& [k, p] : support_)
            if (k > 0) out += k * p * std::exp(-(k - ell_) * sigma);
        return out;
    }

    double integrand(double sigma) const {
        return lambda_ * std::exp((ell_ - 2.0) * sigma) / scaled_den(sigma);
    }

    // integrand(sigma) * sum_{k in [k_lo, k_hi]} p_k e^{-k sigma}
    double mass(double sigma, double k_lo, double k_hi) const {
        double num = 0.0;
        double den = 0.0;
        for (const auto& [k, p] : support_) {
            const double w = p * std::exp(-(k - ell_) * sigma);
            if (k >= k_lo && k <= k_hi) num += w;
            if (k > 0) den += k * w;
        }
        return lambda_ * std::exp(-2.0 * sigma) * num / den;
    }

private:
    double lambda_;
    double ell_ = 1.0;
    double p0_ = 0.0;
    double p1_ = 0.0;
    bool infinite_ = false;
    std::vector<std::pair<double, double>> support_;
};

void require_tol(double tol) {
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
}

struct TauSolution {
    double tau;
    double residual;
};

TauSolution solve_tau_inf(const Kernel& kernel, double tol) {
    if (kernel.infinite()) return {kInf, 0.0};
    const auto r = quad::solve_upper_limit([&](double s) { return kernel.integrand(s); }, 0.0, 1.0, tol, 0.5);
    return {r.x, std::abs(r.excess)};
}

double mass_integral(const Kernel& kernel, double a, double b, double k_lo, double k_hi, double tol) {
    return quad::integrate_or_throw([&](double s) { return kernel.mass(s, k_lo, k_hi); }, a, b, tol,
                                    "jamming mass integral");
}

nlohmann::json number_or_inf(double x) {
    if (std::isinf(x)) return "inf";
    return x;
}

} // namespace

nlohmann::json to_json(const TheoryResult& r) {
    nlohmann::json by_degree = nlohmann::json::object();
    for (const auto& [k, v] : r.s_inf_by_degree) by_degree[std::to_string(k)] = v;
    return {{"tau_inf", number_or_inf(r.tau_inf)}, {"s_inf", r.s_inf},     {"s_inf_by_degree", by_degree},
            {"residual", r.residual},              {"mass_gap", r.mass_gap}, {"tol", r.tol}};
}

double weighted_series(const LimitModel& model, double sigma, int m) {
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
    if (m != 0 && m != 1) throw ConfigError("weighted_series supports m = 0 or 1");
    double out = 0.0;
    for (const auto& [k, p] : model.p()) {
        const double kk = static_cast<double>(k);
        out += (m == 1 ? kk : 1.0) * p * std::exp(-kk * sigma);
    }
    return out;
}

double integrand(const LimitModel& model, double sigma) {
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
    return Kernel(model).integrand(sigma);
}

double tau_infinity(const LimitModel& model, double tol) {
    require_tol(tol);
    return solve_tau_inf(Kernel(model), tol).tau;
}

TheoryResult jamming_constant(const LimitModel& model, double tol) {
    require_tol(tol);
    const Kernel kernel(model);
    TheoryResult out;
    out.tol = tol;
    if (kernel.infinite()) {
        out.tau_inf = kInf;
        out.s_inf = kernel.p0() + 0.5 * kernel.p1();
        if (kernel.p0() > 0.0) out.s_inf_by_degree[0] = kernel.p0();
        if (kernel.p1() > 0.0) out.s_inf_by_degree[1] = 0.5 * kernel.p1();
        out.mass_gap = std::abs(out.s_inf - (kernel.p0() + 0.5 * kernel.p1()));
        return out;
    }
    const auto [tau, residual] = solve_tau_inf(kernel, tol);
    out.tau_inf = tau;
    out.residual = residual;
    out.s_inf = mass_integral(kernel, 0.0, tau, 0.0, kInf, tol / 4);

    double tracked = 0.0;
    double omitted = 0.0;
    for (const auto& [k, p] : model.p()) {
        if (p <= model.tail_tol()) {
            omitted += p;
            continue;
        }
        const double kk = static_cast<double>(k);
        const double mk = mass_integral(kernel, 0.0, tau, kk, kk, tol / 4);
        out.s_inf_by_degree[k] = mk;
        tracked += mk;
    }
    out.mass_gap = std::abs(out.s_inf - tracked);
    if (out.residual >= tol)
        throw NumericalError("tau_inf residual " + std::to_string(out.residual) + " exceeds tolerance");
    if (out.mass_gap >= 10 * tol + omitted)
        throw NumericalError("per-degree masses miss s_inf by " + std::to_string(out.mass_gap));
    return out;
}

double degree_mass(const LimitModel& model, Degree k, double tol) {
    require_tol(tol);
    const double pk = model.p(k);
    if (pk == 0.0) return 0.0;
    const Kernel kernel(model);
    if (kernel.infinite()) return k == 0 ? kernel.p0() : 0.5 * kernel.p1();
    const double tau = solve_tau_inf(kernel, tol).tau;
    const double kk = static_cast<double>(k);
    return mass_integral(kernel, 0.0, tau, kk, kk, tol / 4);
}

double time_change(const LimitModel& model, double t, double tol) {
    require_tol(tol);
    if (!(t >= 0.0)) throw ConfigError("time must be non-negative");
    const Kernel kernel(model);
    const double target = -std::expm1(-t);
    if (t == 0.0) return 0.0;
    if (kernel.infinite()) return -std::log1p(-target * kernel.p1() / kernel.lambda());
    if (target >= 1.0) return solve_tau_inf(kernel, tol).tau;
    return quad::solve_upper_limit([&](double s) { return kernel.integrand(s); }, 0.0, target, tol, 0.5).x;
}

FluidTrajectory limit_trajectory(const LimitModel& model, std::span<const double> grid, double tol,
                                 std::size_t k_track) {
    require_tol(tol);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!(grid[i] >= 0.0) || (i > 0 && grid[i] < grid[i - 1]))
            throw ConfigError("trajectory grid must be sorted and non-negative");
    const Kernel kernel(model);
    const double piece_tol = tol / (4.0 * static_cast<double>(std::max<std::size_t>(grid.size(), 1)));
    const double kmax = static_cast<double>(k_track);

    FluidTrajectory out;
    out.k_track = k_track;
    double tau_prev = 0.0;
    double reached = 0.0; // integral_0^{tau_prev} integrand, as computed
    double s = 0.0;
    std::vector<double> s_k(k_track + 1, 0.0);
    double s_over = 0.0;

    for (const double t : grid) {
        const double target = -std::expm1(-t);
        double tau = tau_prev;
        if (kernel.infinite()) {
            tau = -std::log1p(-target * kernel.p1() / kernel.lambda());
        } else if (target >= 1.0) {
            tau = solve_tau_inf(kernel, tol).tau;
        } else if (target > reached) {
            const auto r = quad::solve_upper_limit([&](double x) { return kernel.integrand(x); }, tau_prev,
                                                   target - reached, tol, 0.25);
            tau = r.x;
            reached = target + r.excess;
        }
        tau = std::max(tau, tau_prev);
        if (tau > tau_prev) {
            s += mass_integral(kernel, tau_prev, tau, 0.0, kInf, piece_tol);
            for (const auto& [k, p] : model.p()) {
                if (k > k_track) break;
                const double kk = static_cast<double>(k);
                s_k[k] += mass_integral(kernel, tau_prev, tau, kk, kk, piece_tol);
            }
            if (model.p().rbegin()->first > k_track)
                s_over += mass_integral(kernel, tau_prev, tau, kmax + 1.0, kInf, piece_tol);
        }

        TrajectoryRow row;
        row.t = t;
        row.u = kernel.lambda() * std::exp(-2.0 * tau);
        row.s = s;
        row.e.assign(k_track + 1, 0.0);
        for (const auto& [k, p] : model.p()) {
            const double ek = std::exp(-t) * p * std::exp(-static_cast<double>(k) * tau);
            if (k <= k_track)
                row.e[k] = ek;
            else
                row.e_over += ek;
        }
        row.s_k = s_k;
        row.s_over = s_over;
        out.tau.push_back(tau);
        out.rows.push_back(std::move(row));
        tau_prev = tau;
    }
    return out;
}

nlohmann::json to_json(const FluidTrajectory& f) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& r = f.rows[i];
        rows.push_back({{"t", r.t}, {"tau", f.tau[i]}, {"u", r.u}, {"s", r.s}, {"e", r.e}, {"e_over", r.e_over},
                        {"s_k", r.s_k}, {"s_over", r.s_over}});
    }
    return {{"k_track", f.k_track}, {"rows", rows}};
}

RegularClosedForm closed_form_regular(int d) {
    if (d < 2) throw ConfigError("closed form needs d >= 2");
    if (d == 2) return {1.0, 0.5 * (1.0 - std::exp(-2.0))};
    const double dd = static_cast<double>(d);
    return {std::log(dd - 1.0) / (dd - 2.0), 0.5 * (1.0 - std::pow(dd - 1.0, -2.0 / (dd - 2.0)))};
}

PoissonClosedForm closed_form_poisson(double c, int K, double tol) {
    if (!(c > 0.0)) throw ConfigError("closed form needs c > 0");
    require_tol(tol);
    PoissonClosedForm out;
    const double l = std::log1p(c);
    out.s_inf = l / c;
    out.tau_inf = -std::log1p(-l / c);
    const double lo = c - l;
    for (int k = 0; k <= K; ++k) {
        const double kk = static_cast<double>(k);
        const double lg = std::lgamma(kk + 1.0);
        const double v = quad::integrate_or_throw(
            [&](double x) { return std::exp(kk * std::log(x) - x - lg); }, lo, c, tol / 4, "poisson degree mass");
        out.s_inf_by_degree[static_cast<Degree>(k)] = v / c;
    }
    return out;
}

ConnectProbability p_connect(std::uint64_t j, std::uint64_t k, std::uint64_t u) {
    if (u < 2) throw ConfigError("p_connect needs u >= 2");
    if (j > u || k > u) throw ConfigError("p_connect needs j, k <= u");
    ConnectProbability out;
    if (j == 0 || k == 0) return out;
    const double jd = static_cast<double>(j);
    const double kd = static_cast<double>(k);
    const double ud = static_cast<double>(u);

    double term = jd * kd / (ud - 1.0);
    double sum = term;
    const std::uint64_t top = std::min(j, k);
    for (std::uint64_t m = 1; m < top; ++m) {
        if (u <= 2 * m + 1) break; // further factors (u - 2m - 1) would vanish or go negative
        const double md = static_cast<double>(m);
        term *= (jd - md) * (kd - md) / ((md + 1.0) * (ud - 2.0 * md - 1.0));
        sum += (m % 2 == 1) ? -term : term;
    }
    out.exact = sum;
    const double first = jd * kd / (ud - 1.0);
    const double second_num = jd * (jd - 1.0) * kd * (kd - 1.0);
    double lower = 0.0;
    if (second_num == 0.0)
        lower = first;
    else if (u > 3)
        lower = first - second_num / (2.0 * (ud - 1.0) * (ud - 3.0));
    out.lower = std::clamp(lower, 0.0, 1.0);
    out.upper = std::clamp(first, 0.0, 1.0);
    return out;
}

Drift drift(const SimState& state) {
    Drift out;
    bool has_edges = false;
    for (const auto& [k, c] : state.E)
        if (k > 0 && c > 0) has_edges = true;
    if (has_edges && state.U < 2) throw ConfigError("invalid state: empty vertices with half-edges but U < 2");
    const double U = static_cast<double>(state.U);
    for (const auto& [k, c] : state.E) {
        const double kk = static_cast<double>(k);
        const double ec = static_cast<double>(c);
        out.dS += ec;
        if (k > 0) out.dU -= kk * ec * (2.0 - (kk - 1.0) / (U - 1.0));
    }
    for (const auto& [k, ck] : state.E) {
        double d = -static_cast<double>(ck);
        if (k > 0) {
            for (const auto& [j, cj] : state.E) {
                if (j == 0) continue;
                const double others = static_cast<double>(ck) - (j == k ? 1.0 : 0.0);
                d -= p_connect(j, k, state.U).exact * static_cast<double>(cj) * others;
            }
        }
        out.dE[k] = d;
    }
    return out;
}

} // namespace jamset::theory

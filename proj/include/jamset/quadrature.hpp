#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "jamset/error.hpp"

namespace jamset::quad {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod nodes on [0, 1) of the symmetric rule; odd entries are the
// 7-point Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[static_cast<std::size_t>(i)];
        const double sum = f(c - dx) + f(c + dx);
        kron += kWgk[static_cast<std::size_t>(i)] * sum;
        if (i % 2 == 1) gauss += kWg[static_cast<std::size_t>(i / 2)] * sum;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on [a, b]: the piece with the largest
// |K15 - G7| estimate is bisected until the summed estimate is <= abs_tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, int max_intervals = 4000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    const double sign = b < a ? -1.0 : 1.0;
    if (b < a) std::swap(a, b);
    std::priority_queue<detail::Piece> pieces;
    pieces.push(detail::gk15(f, a, b));
    double total = pieces.top().value;
    double error = pieces.top().error;
    while (!(error <= abs_tol) && static_cast<int>(pieces.size()) < max_intervals) {
        const detail::Piece worst = pieces.top();
        pieces.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) { // interval at machine resolution
            pieces.push(worst);
            break;
        }
        const detail::Piece left = detail::gk15(f, worst.a, mid);
        const detail::Piece right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        pieces.push(left);
        pieces.push(right);
        if (static_cast<int>(pieces.size()) % 64 == 0) {
            // resum to shed drift from the incremental updates
            auto copy = pieces;
            total = 0.0;
            error = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    out.value = sign * total;
    out.abs_error = error;
    out.intervals = static_cast<int>(pieces.size());
    out.converged = error <= abs_tol && std::isfinite(total);
    return out;
}

// integrate() that throws NumericalError instead of returning unconverged.
template <class F>
double integrate_or_throw(F&& f, double a, double b, double abs_tol, const char* what) {
    const QuadResult r = integrate(f, a, b, abs_tol);
    if (!r.converged)
        throw NumericalError(std::string(what) + ": quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                             "] stalled at error " + std::to_string(r.abs_error) + " (tolerance " +
                             std::to_string(abs_tol) + ", " + std::to_string(r.intervals) + " intervals)");
    return r.value;
}

struct UpperLimit {
    double x = 0.0;
    double excess = 0.0; // integral_a^x g - target, as computed (signed)
    int iterations = 0;
};

// Solves integral_a^x g = target for x >= a with g > 0 on [a, inf).
// The bracket [a, a + step] doubles until it straddles the root; the root is
// then refined by Newton steps on F(x) = integral - target (F' = g), falling
// back to bisection whenever a step leaves the bracket. Each evaluation
// integrates only from the nearer bracket end.
template <class G>
UpperLimit solve_upper_limit(G&& g, double a, double target, double tol, double step = 1.0) {
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    if (target <= 0.0) return {a, -target, 0};
    const double qtol = tol / 8.0;
    double lo = a, f_lo = -target;
    double hi = a + step;
    double f_hi = f_lo + integrate_or_throw(g, lo, hi, qtol, "upper-limit bracket");
    int expansions = 0;
    while (f_hi < 0.0) {
        if (++expansions > 80 || !std::isfinite(f_hi))
            throw NumericalError("upper-limit bracket did not straddle the root (reached x = " + std::to_string(hi) +
                                 ", F = " + std::to_string(f_hi) + ")");
        lo = hi;
        f_lo = f_hi;
        step *= 2.0;
        hi = lo + step;
        f_hi = f_lo + integrate_or_throw(g, lo, hi, qtol, "upper-limit bracket");
    }
    double x = -f_lo < f_hi ? lo : hi;
    double fx = x == lo ? f_lo : f_hi;
    for (int it = 1; it <= 200; ++it) {
        if (std::abs(fx) < tol) return {x, fx, it};
        double cand = x - fx / g(x);
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        if (!(cand > lo && cand < hi)) break; // bracket collapsed
        const double f_cand = (cand - lo <= hi - cand)
                                  ? f_lo + integrate_or_throw(g, lo, cand, qtol, "upper-limit refine")
                                  : f_hi - integrate_or_throw(g, cand, hi, qtol, "upper-limit refine");
        if (f_cand < 0.0) {
            lo = cand;
            f_lo = f_cand;
        } else {
            hi = cand;
            f_hi = f_cand;
        }
        x = cand;
        fx = f_cand;
    }
    if (std::abs(fx) < tol) return {x, fx, 200};
    throw NumericalError("upper-limit refinement stalled: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "], residual " + std::to_string(std::abs(fx)) + " vs tolerance " + std::to_string(tol));
}

} // namespace jamset::quad

#include "jamset/trajectory.hpp"

#include <cstdio>
#include <ostream>

#include "jamset/error.hpp"

namespace jamset {

std::string format_number(double x) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == x) break;
    }
    return buf;
}

namespace {
const auto fmt = format_number;
} // namespace

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows, std::size_t k_track,
                          const std::vector<std::pair<std::string, std::string>>& metadata) {
    for (const auto& [key, value] : metadata) os << "# " << key << '=' << value << '\n';
    os << "t,u,s";
    for (std::size_t k = 0; k <= k_track; ++k) os << ",e_" << k;
    os << ",e_over";
    for (std::size_t k = 0; k <= k_track; ++k) os << ",s_" << k;
    os << ",s_over\n";
    for (const auto& r : rows) {
        if (r.e.size() != k_track + 1 || r.s_k.size() != k_track + 1)
            throw ConfigError("trajectory row width does not match k_track");
        os << fmt(r.t) << ',' << fmt(r.u) << ',' << fmt(r.s);
        for (double v : r.e) os << ',' << fmt(v);
        os << ',' << fmt(r.e_over);
        for (double v : r.s_k) os << ',' << fmt(v);
        os << ',' << fmt(r.s_over) << '\n';
    }
}

std::vector<double> uniform_grid(double t_max, std::size_t points) {
    if (points < 2 || !(t_max > 0.0)) throw ConfigError("grid needs t_max > 0 and at least 2 points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

} // namespace jamset

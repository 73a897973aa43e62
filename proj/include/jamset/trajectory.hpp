#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace jamset {

// One time slice of a (scaled) trajectory. Simulated and limiting
// trajectories share this row type so their CSV files diff column by column.
struct TrajectoryRow {
    double t = 0.0;
    double u = 0.0;
    double s = 0.0;
    std::vector<double> e;   // e[k], k = 0..K
    double e_over = 0.0;     // degrees above K
    std::vector<double> s_k; // s_k[k], k = 0..K
    double s_over = 0.0;
};

// Shortest %g form that reads back to the same double.
std::string format_number(double x);

// Header "t,u,s,e_0..e_K,e_over,s_0..s_K,s_over". Each metadata pair is
// written first as a "# key=value" line.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows, std::size_t k_track,
                          const std::vector<std::pair<std::string, std::string>>& metadata = {});

// Evenly spaced points on [0, t_max], both ends included.
std::vector<double> uniform_grid(double t_max, std::size_t points);

} // namespace jamset

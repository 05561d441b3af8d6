#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coagkin/trajectory.hpp"

namespace coagkin {

/// Shortest-safe full precision (17 significant digits).
std::string format_double(double x);

/// Header `t,xi_1,...,xi_k`, one row per sample.
std::string trajectory_csv(const Trajectory& traj);

/// Header `t,M0,M1,M2,tail_fraction,rhs_sup,boundary_loss`, then any further
/// moment orders and weight moments carried by the diagnostics records.
std::string diagnostics_csv(const Trajectory& traj);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Standalone SVG line plot (polylines, box axes, end-point tick labels).
/// Points that cannot be drawn on a log axis are dropped.
std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace coagkin

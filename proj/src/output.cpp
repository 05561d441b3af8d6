#include "coagkin/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "coagkin/diagnostics.hpp"

namespace coagkin {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  const std::size_t k = traj.empty() ? 0 : traj.initial().truncation();
  out << "t";
  for (std::size_t i = 1; i <= k; ++i) out << ",xi_" << i;
  out << '\n';
  for (const auto& s : traj.samples) {
    out << format_double(s.time());
    for (double x : s.values()) out << ',' << format_double(x);
    out << '\n';
  }
  return out.str();
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::set<double> orders;
  std::set<std::string> weights;
  for (const auto& d : traj.diagnostics) {
    for (const auto& [m, v] : d.moment_m) {
      if (m != 2.0) orders.insert(m);
    }
    for (const auto& [name, v] : d.g_moments) weights.insert(name);
  }

  std::ostringstream out;
  out << "t,M0,M1,M2,tail_fraction,rhs_sup,boundary_loss";
  for (double m : orders) out << ",M" << format_double(m);
  for (const auto& w : weights) out << ",G[" << w << "]";
  out << '\n';
  for (std::size_t n = 0; n < traj.diagnostics.size(); ++n) {
    const auto& d = traj.diagnostics[n];
    const auto two = d.moment_m.find(2.0);
    const double m2 = two != d.moment_m.end() ? two->second : moment(traj.samples[n], 2.0);
    const double loss = n < traj.boundary_loss.size() ? traj.boundary_loss[n] : 0.0;
    out << format_double(d.time) << ',' << format_double(d.moment_0) << ','
        << format_double(d.moment_1) << ',' << format_double(m2) << ','
        << format_double(d.tail_mass_fraction) << ',' << format_double(d.rhs_sup) << ','
        << format_double(loss);
    for (double m : orders) out << ',' << format_double(d.moment_m.at(m));
    for (const auto& w : weights) out << ',' << format_double(d.g_moments.at(w));
    out << '\n';
  }
  return out.str();
}

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto drawable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0.0) && (!spec.log_y || y > 0.0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t n = 0; n < std::min(s.x.size(), s.y.size()); ++n) {
      if (!drawable(s.x[n], s.y[n])) continue;
      x0 = std::min(x0, tx(s.x[n]));
      x1 = std::max(x1, tx(s.x[n]));
      y0 = std::min(y0, ty(s.y[n]));
      y1 = std::max(y1, ty(s.y[n]));
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - (v - y0) / (y1 - y0)) * ph; };
  auto label = [](double v, bool log) { return short_number(log ? std::pow(10.0, v) : v); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"start\">"
      << label(x0, spec.log_x) << "</text>\n";
  out << "<text x=\"" << kLeft + pw << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"end\">"
      << label(x1, spec.log_x) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">"
      << label(y0, spec.log_y) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">"
      << label(y1, spec.log_y) << "</text>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
  out << "<text transform=\"translate(18," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label)
      << (spec.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto& ser = series[s];
    for (std::size_t n = 0; n < std::min(ser.x.size(), ser.y.size()); ++n) {
      if (!drawable(ser.x[n], ser.y[n])) continue;
      out << short_number(px(tx(ser.x[n]))) << ',' << short_number(py(ty(ser.y[n]))) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << kTop + 16 + 14 * static_cast<double>(s)
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(ser.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace coagkin

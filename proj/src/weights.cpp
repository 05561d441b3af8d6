#include "coagkin/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "coagkin/compensated.hpp"
#include "coagkin/errors.hpp"

namespace coagkin {

std::string to_string(WeightClass c) {
  return c == WeightClass::G1 ? "G1" : "G1_infinity";
}

ConvexWeight ConvexWeight::power(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("power weight needs p in [1, 2]");
  ConvexWeight w;
  w.kind_ = Kind::power;
  w.exponent_ = p;
  w.class_tag_ = p > 1.0 ? WeightClass::G1_infinity : WeightClass::G1;
  return w;
}

ConvexWeight ConvexWeight::piecewise(std::vector<double> knots,
                                     std::vector<double> derivative_values,
                                     WeightClass class_tag) {
  if (knots.size() < 2 || knots.size() != derivative_values.size()) {
    throw DomainError("piecewise weight needs >= 2 knots with one derivative value each");
  }
  if (knots.front() != 0.0) throw DomainError("first knot must be 0");
  if (!(derivative_values.front() >= 0.0)) throw DomainError("G'(0) must be >= 0");
  ConvexWeight w;
  w.kind_ = Kind::piecewise;
  w.class_tag_ = class_tag;
  w.slopes_.resize(knots.size() - 1);
  w.cumulative_.resize(knots.size());
  w.cumulative_[0] = 0.0;
  for (std::size_t m = 0; m + 1 < knots.size(); ++m) {
    const double gap = knots[m + 1] - knots[m];
    if (!(gap > 0.0) || !std::isfinite(gap)) throw DomainError("knots must strictly ascend");
    const double rise = derivative_values[m + 1] - derivative_values[m];
    if (rise < 0.0) throw DomainError("derivative values must be nondecreasing");
    w.slopes_[m] = rise / gap;
    if (m > 0 && w.slopes_[m] > w.slopes_[m - 1]) {
      throw DomainError("derivative must be concave (segment slopes nonincreasing)");
    }
    w.cumulative_[m + 1] =
        w.cumulative_[m] + 0.5 * gap * (derivative_values[m] + derivative_values[m + 1]);
  }
  if (class_tag == WeightClass::G1_infinity && !(w.slopes_.back() > 0.0)) {
    throw DomainError("superlinear weight needs a positive final derivative slope");
  }
  w.knots_ = std::move(knots);
  w.derivative_values_ = std::move(derivative_values);
  return w;
}

ConvexWeight ConvexWeight::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") return power(j.at("p").get<double>());
  if (kind == "piecewise") {
    const std::string tag = j.value("class", std::string("G1_infinity"));
    if (tag != "G1" && tag != "G1_infinity") throw DomainError("unknown weight class " + tag);
    return piecewise(j.at("knots").get<std::vector<double>>(),
                     j.at("derivative_values").get<std::vector<double>>(),
                     tag == "G1" ? WeightClass::G1 : WeightClass::G1_infinity);
  }
  throw DomainError("unknown weight kind " + kind);
}

nlohmann::json ConvexWeight::to_json() const {
  if (kind_ == Kind::power) return {{"kind", "power"}, {"p", exponent_}, {"class", to_string(class_tag_)}};
  return {{"kind", "piecewise"},
          {"class", to_string(class_tag_)},
          {"knots", knots_},
          {"derivative_values", derivative_values_}};
}

std::string ConvexWeight::label() const {
  if (kind_ == Kind::piecewise) return "G_dlvp";
  if (exponent_ == 1.0) return "x";
  if (exponent_ == 2.0) return "x^2";
  char buf[32];
  std::snprintf(buf, sizeof buf, "x^%g", exponent_);
  return buf;
}

std::size_t ConvexWeight::segment(double x) const noexcept {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  return static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
}

double ConvexWeight::value(double x) const {
  if (!(x >= 0.0)) throw DomainError("weights are defined on [0, inf)");
  if (kind_ == Kind::power) {
    if (exponent_ == 1.0) return x;
    if (exponent_ == 2.0) return x * x;
    return std::pow(x, exponent_);
  }
  const std::size_t m = segment(x);
  const double dx = x - knots_[m];
  const double slope = m < slopes_.size() ? slopes_[m] : slopes_.back();
  return cumulative_[m] + dx * (derivative_values_[m] + 0.5 * slope * dx);
}

double ConvexWeight::derivative(double x) const {
  if (!(x >= 0.0)) throw DomainError("weights are defined on [0, inf)");
  if (kind_ == Kind::power) {
    if (exponent_ == 1.0) return 1.0;
    return exponent_ * std::pow(x, exponent_ - 1.0);
  }
  const std::size_t m = segment(x);
  const double slope = m < slopes_.size() ? slopes_[m] : slopes_.back();
  return derivative_values_[m] + slope * (x - knots_[m]);
}

ExperimentReport check_weight_invariants(const ConvexWeight& weight, double x_max,
                                         std::size_t samples, std::uint64_t seed) {
  ExperimentReport report("weight_invariants:" + weight.label());
  constexpr double kRel = 1e-12;
  report.check_at_most("G_at_zero_abs", std::abs(weight.value(0.0)), 0.0);
  report.check_at_least("derivative_at_zero", weight.derivative(0.0), 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, x_max);
  double convexity_violations = 0.0;
  double concavity_violations = 0.0;
  double monotone_violations = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double x = uni(rng), y = uni(rng);
    if (x > y) std::swap(x, y);
    const double mid = 0.5 * (x + y);
    const double gx = weight.value(x), gy = weight.value(y), gm = weight.value(mid);
    if (gm > 0.5 * (gx + gy) * (1.0 + kRel) + 1e-300) convexity_violations += 1.0;
    const double dx = weight.derivative(x), dy = weight.derivative(y),
                 dm = weight.derivative(mid);
    if (dm < 0.5 * (dx + dy) * (1.0 - kRel)) concavity_violations += 1.0;
    if (dy < dx * (1.0 - kRel)) monotone_violations += 1.0;
  }
  report.set_metric("samples", static_cast<double>(samples));
  report.check_at_most("convexity_violations", convexity_violations, 0.0);
  report.check_at_most("derivative_concavity_violations", concavity_violations, 0.0);
  report.check_at_most("derivative_monotonicity_violations", monotone_violations, 0.0);

  if (weight.class_tag() == WeightClass::G1_infinity) {
    std::vector<double> points;
    if (weight.kind() == ConvexWeight::Kind::piecewise) {
      points.assign(weight.knots().begin() + 1, weight.knots().end());
    } else {
      for (int m = 0; m <= 40; ++m) points.push_back(std::ldexp(1.0, m));
    }
    double ratio_violations = 0.0;
    double prev = -std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (double p : points) {
      const double r = weight.value(p) / p;
      if (!(r > prev)) ratio_violations += 1.0;
      prev = r;
      largest = std::max(largest, r);
    }
    report.check_at_most("superlinearity_ratio_not_increasing", ratio_violations, 0.0);
    report.check("superlinearity_max_ratio", largest, Relation::greater_than, 10.0);
  }
  return report;
}

ExperimentReport check_weight_inequality(const ConvexWeight& weight, std::size_t max_size) {
  if (max_size < 2) throw ContractError("inequality check needs max_size >= 2");
  ExperimentReport report("weight_inequality:" + weight.label());
  constexpr double kRounding = 64.0 * std::numeric_limits<double>::epsilon();

  std::vector<double> g(2 * max_size + 1);
  for (std::size_t n = 0; n < g.size(); ++n) g[n] = weight.value(static_cast<double>(n));

  double violations = 0.0;
  double max_ratio = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::size_t first_i = 0, first_j = 0;
  for (std::size_t i = 1; i <= max_size; ++i) {
    for (std::size_t j = 1; j <= max_size; ++j) {
      const double s = static_cast<double>(i + j);
      const double lhs = s * (g[i + j] - g[i] - g[j]);
      const double rhs = 2.0 * (static_cast<double>(i) * g[j] + static_cast<double>(j) * g[i]);
      const double scale = s * (g[i + j] + g[i] + g[j]) + rhs;
      min_slack = std::min(min_slack, rhs - lhs);
      if (rhs > 0.0) max_ratio = std::max(max_ratio, lhs / rhs);
      if (lhs - rhs > kRounding * scale) {
        if (violations == 0.0) {
          first_i = i;
          first_j = j;
        }
        violations += 1.0;
      }
    }
  }
  report.set_metric("max_size", static_cast<double>(max_size));
  report.set_metric("max_lhs_over_rhs", max_ratio);
  report.set_metric("min_slack", min_slack);
  report.check_at_most("violations", violations, 0.0);
  if (violations > 0.0) {
    report.add_note("first violation at (" + std::to_string(first_i) + "," +
                    std::to_string(first_j) + ")");
  }
  return report;
}

DlvpWeight construct_dlvp(std::span<const double> sequence, double tail_budget) {
  if (!(tail_budget > 0.0)) throw DomainError("tail_budget must be positive");
  const std::size_t n = sequence.size();
  for (double x : sequence) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("sequence must be finite and >= 0");
  }

  // tail[s] = sum_{i >= s} i x_i for s = 1..n+1, accumulated from the far end.
  std::vector<double> tail(n + 2, 0.0);
  CompensatedSum acc;
  for (std::size_t i = n; i >= 1; --i) {
    acc.add(static_cast<double>(i) * sequence[i - 1]);
    tail[i] = acc.value();
  }

  DlvpWeight out{ConvexWeight::power(1.0), {}, {}, 0.0, false};
  if (n == 0 || tail[1] == 0.0) {
    out.degenerate = true;
    out.tail_thresholds = {1};
    out.tail_masses = {0.0};
    return out;
  }

  out.tail_thresholds.push_back(1);
  out.tail_masses.push_back(tail[1]);
  std::size_t threshold = 1;
  // Once the tail is empty every later threshold repeats with zero mass.
  for (int m = 1; threshold <= n && tail[threshold] > 0.0; ++m) {
    const double budget = std::ldexp(tail_budget, -m);
    while (threshold <= n && tail[threshold] > budget) ++threshold;
    out.tail_thresholds.push_back(threshold);
    out.tail_masses.push_back(tail[threshold]);
  }

  CompensatedSum bound;
  for (std::size_t m = 0; m < out.tail_masses.size(); ++m) {
    bound.add(static_cast<double>(m + 1) * out.tail_masses[m]);
  }
  out.certified_bound = bound.value();

  // Knots p_m >= n_m with nondecreasing gaps; G'(p_m) = m.
  std::vector<double> knots{0.0};
  std::vector<double> derivs{0.0};
  double gap = 0.0;
  auto push_knot = [&](double required) {
    const double p = std::max(required, knots.back() + gap);
    gap = p - knots.back();
    knots.push_back(p);
    derivs.push_back(static_cast<double>(derivs.size()));
  };
  for (std::size_t m = 1; m < out.tail_thresholds.size(); ++m) {
    push_knot(static_cast<double>(out.tail_thresholds[m]));
  }
  // Materialize knots until G(p)/p exceeds 10 so the superlinearity is witnessed on knots.
  for (;;) {
    if (knots.size() >= 3) {
      const auto w = ConvexWeight::piecewise(knots, derivs, WeightClass::G1_infinity);
      if (w.value(knots.back()) / knots.back() > 10.0) {
        out.weight = w;
        break;
      }
    }
    push_knot(0.0);
  }
  return out;
}

}  // namespace coagkin

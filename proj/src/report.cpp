#include "coagkin/report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace coagkin {

bool Threshold::satisfied_by(double metric) const noexcept {
  if (std::isnan(metric)) return false;
  switch (relation) {
    case Relation::at_most:
      return metric <= value;
    case Relation::at_least:
      return metric >= value;
    case Relation::less_than:
      return metric < value;
    case Relation::greater_than:
      return metric > value;
  }
  return false;
}

std::string Threshold::symbol() const {
  switch (relation) {
    case Relation::at_most:
      return "<=";
    case Relation::at_least:
      return ">=";
    case Relation::less_than:
      return "<";
    case Relation::greater_than:
      return ">";
  }
  return "?";
}

bool ExperimentReport::check(const std::string& key, double value, Relation relation,
                             double limit) {
  metrics_[key] = value;
  thresholds_[key] = Threshold{relation, limit};
  return thresholds_[key].satisfied_by(value);
}

void ExperimentReport::record_error(const std::string& message) {
  const double count = metrics_.contains("errors") ? metrics_["errors"] + 1.0 : 1.0;
  check_at_most("errors", count, 0.0);
  notes_.push_back("error: " + message);
}

void ExperimentReport::merge(const ExperimentReport& other, const std::string& prefix) {
  const std::string stem = prefix.empty() ? "" : prefix + ".";
  for (const auto& [key, value] : other.metrics_) metrics_[stem + key] = value;
  for (const auto& [key, bound] : other.thresholds_) thresholds_[stem + key] = bound;
  for (const auto& note : other.notes_) notes_.push_back(prefix.empty() ? note : prefix + ": " + note);
  for (const auto& path : other.artifacts_) artifacts_.push_back(path);
  interrupted_ = interrupted_ || other.interrupted_;
}

bool ExperimentReport::passed() const {
  if (interrupted_) return false;
  for (const auto& [key, bound] : thresholds_) {
    if (!bound.satisfied_by(metrics_.at(key))) return false;
  }
  return true;
}

std::vector<std::string> ExperimentReport::failed_checks() const {
  std::vector<std::string> out;
  for (const auto& [key, bound] : thresholds_) {
    if (!bound.satisfied_by(metrics_.at(key))) out.push_back(key);
  }
  return out;
}

double ExperimentReport::metric(const std::string& key) const {
  const auto it = metrics_.find(key);
  if (it == metrics_.end()) throw std::out_of_range("no metric named " + key);
  return it->second;
}

namespace {

// JSON has no inf/nan; encode them as strings so reports stay parseable.
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["status"] = passed() ? "pass" : "fail";
  j["interrupted"] = interrupted_;
  j["metrics"] = nlohmann::json::object();
  for (const auto& [key, value] : metrics_) j["metrics"][key] = number(value);
  j["thresholds"] = nlohmann::json::object();
  for (const auto& [key, bound] : thresholds_) {
    j["thresholds"][key] = {{"op", bound.symbol()}, {"value", number(bound.value)}};
  }
  j["failed_checks"] = failed_checks();
  j["notes"] = notes_;
  j["artifacts"] = artifacts_;
  j["config_echo"] = config_echo_;
  return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, report.to_json().dump(2) + "\n");
}

}  // namespace coagkin

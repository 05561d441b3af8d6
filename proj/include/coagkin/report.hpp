#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace coagkin {

enum class Relation { at_most, at_least, less_than, greater_than };

struct Threshold {
  Relation relation = Relation::at_most;
  double value = 0.0;

  bool satisfied_by(double metric) const noexcept;
  std::string symbol() const;
};

/// Outcome of one verification experiment.
///
/// Every pass/fail decision is expressed as a metric with a threshold, so
/// `passed()` is derived data: the report passes iff every thresholded
/// metric satisfies its bound. Metrics without a threshold are informational.
class ExperimentReport {
 public:
  ExperimentReport() = default;
  explicit ExperimentReport(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

  void set_metric(const std::string& key, double value) { metrics_[key] = value; }

  /// Records `value` under `key` with its bound; returns whether the bound holds.
  bool check(const std::string& key, double value, Relation relation, double limit);
  bool check_at_most(const std::string& key, double value, double limit) {
    return check(key, value, Relation::at_most, limit);
  }
  bool check_at_least(const std::string& key, double value, double limit) {
    return check(key, value, Relation::at_least, limit);
  }

  /// Hard failure not tied to a numeric comparison (e.g. an integration error).
  void record_error(const std::string& message);

  void add_note(std::string note) { notes_.push_back(std::move(note)); }
  void add_artifact(std::string path) { artifacts_.push_back(std::move(path)); }
  void set_config_echo(nlohmann::json echo) { config_echo_ = std::move(echo); }
  void mark_interrupted() { interrupted_ = true; }

  /// Copies metrics, thresholds and notes of `other` under `prefix.` (as-is when empty).
  void merge(const ExperimentReport& other, const std::string& prefix);

  bool passed() const;
  std::vector<std::string> failed_checks() const;

  const std::map<std::string, double>& metrics() const noexcept { return metrics_; }
  const std::map<std::string, Threshold>& thresholds() const noexcept { return thresholds_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }
  const std::vector<std::string>& artifacts() const noexcept { return artifacts_; }
  const nlohmann::json& config_echo() const noexcept { return config_echo_; }
  bool interrupted() const noexcept { return interrupted_; }

  double metric(const std::string& key) const;

  nlohmann::json to_json() const;

 private:
  std::string name_;
  std::map<std::string, double> metrics_;
  std::map<std::string, Threshold> thresholds_;
  std::vector<std::string> notes_;
  std::vector<std::string> artifacts_;
  nlohmann::json config_echo_ = nlohmann::json::object();
  bool interrupted_ = false;
};

/// Writes `text` to `path` through a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

void write_report(const ExperimentReport& report, const std::filesystem::path& path);

}  // namespace coagkin

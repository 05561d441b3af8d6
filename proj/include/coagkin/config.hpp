#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coagkin/experiments.hpp"
#include "coagkin/integrator.hpp"
#include "coagkin/kernel.hpp"

namespace coagkin {

/// JSON schema of the run-config file, embedded at build time.
std::string_view run_config_schema();

/// Names accepted in the experiment block.
const std::vector<std::string>& experiment_names();

/// Experiment block with every option resolved to a concrete value.
struct ExperimentSpec {
  std::string name;
  TruncationOptions truncation;
  PerturbationOptions dependence;
  DecayOptions decay;
  IdentityOptions identity;
  RescalingOptions rescaling;
  WeightsOptions weights;
  std::size_t identity_intervals = 2000;
  std::size_t admissibility_grid = 0;  // 0: 4 * truncation_k
};

struct RunConfig {
  nlohmann::json kernel_block;  // resolved (absolute table path, explicit constants)
  CoagulationKernel kernel = CoagulationKernel::constant(1.0, {});
  InitialRule initial;
  std::filesystem::path initial_path;  // set for file initial data
  std::size_t truncation_k = 0;
  SolverConfig solver;
  std::optional<ExperimentSpec> experiment;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  SizeDistribution initial_state() const { return initial.at(truncation_k); }

  /// Fully resolved configuration; parsing it again yields an identical run.
  nlohmann::json echo() const;
};

/// Builds a kernel from a config kernel block; relative table paths resolve against base_dir.
/// `field` prefixes error paths.
CoagulationKernel kernel_from_json(const nlohmann::json& block,
                                   const std::filesystem::path& base_dir,
                                   const std::string& field = "kernel");

/// Throws ConfigError naming the offending field (or line/column for syntax errors).
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace coagkin

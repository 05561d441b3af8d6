// Command-line front end: simulate, verify, kernels list, schema print.

#include <omp.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coagkin/config.hpp"
#include "coagkin/diagnostics.hpp"
#include "coagkin/errors.hpp"
#include "coagkin/experiments.hpp"
#include "coagkin/integrator.hpp"
#include "coagkin/output.hpp"
#include "coagkin/report.hpp"

namespace fs = std::filesystem;
using namespace coagkin;

namespace {

enum Exit : int { ok = 0, usage = 1, verification = 2, numeric = 3 };

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

bool apply_thread_cap() {
  const char* env = std::getenv("COAGKIN_THREADS");
  if (env == nullptr || *env == '\0') return true;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "error: COAGKIN_THREADS must be a positive integer, got '" << env << "'\n";
    return false;
  }
  omp_set_num_threads(static_cast<int>(n));
  return true;
}

std::string relative_name(const fs::path& file, const fs::path& dir) {
  return fs::relative(file, dir).string();
}

void emit(const fs::path& path, const std::string& text, ExperimentReport& report,
          const fs::path& dir) {
  write_file_atomic(path, text);
  report.add_artifact(relative_name(path, dir));
}

void write_trajectory_files(const Trajectory& traj, const fs::path& dir, ExperimentReport& report) {
  emit(dir / "trajectory.csv", trajectory_csv(traj), report, dir);
  emit(dir / "diagnostics.csv", diagnostics_csv(traj), report, dir);
  PlotSeries m0{"M0", {}, {}}, m1{"M1", {}, {}};
  for (const auto& d : traj.diagnostics) {
    m0.x.push_back(d.time);
    m0.y.push_back(d.moment_0);
    m1.x.push_back(d.time);
    m1.y.push_back(d.moment_1);
  }
  emit(dir / "moments.svg", svg_plot({"Moments M0 and M1", "t", "moment", false, false}, {m0, m1}),
       report, dir);
}

void summarize(const Trajectory& traj, ExperimentReport& report) {
  const auto& st = traj.step_stats;
  report.set_metric("steps_accepted", static_cast<double>(st.accepted));
  report.set_metric("steps_rejected_error", static_cast<double>(st.rejected_error));
  report.set_metric("steps_rejected_positivity", static_cast<double>(st.rejected_positivity));
  report.set_metric("rhs_evaluations", static_cast<double>(st.rhs_evaluations));
  report.set_metric("min_step", st.min_step);
  report.set_metric("max_step", st.max_step);
  if (traj.empty()) return;
  const auto balance = mass_balance(traj);
  report.set_metric("M1_initial", balance.initial_mass);
  report.set_metric("M1_final", balance.final_mass);
  report.set_metric("M0_final", moment(traj.final(), 0.0));
  report.set_metric("mass_defect", balance.boundary_outflux);
  report.set_metric("moment_defect", balance.moment_defect);
  double sup = 0.0;
  for (double r : traj.rhs_sup_per_size) sup = std::max(sup, r);
  report.set_metric("rhs_sup", sup);
  report.merge(check_monotonicity(traj), "");
}

int finish(ExperimentReport& report, const fs::path& path) {
  write_report(report, path);
  const bool interrupted = report.interrupted() || g_interrupted.load();
  if (interrupted) report.mark_interrupted();
  if (interrupted) write_report(report, path);
  std::cout << report.name() << ": " << (report.passed() ? "PASS" : "FAIL")
            << (interrupted ? " (interrupted)" : "") << "  report: " << path.string() << '\n';
  for (const auto& f : report.failed_checks()) std::cout << "  failed: " << f << '\n';
  for (const auto& n : report.notes()) std::cout << "  note: " << n << '\n';
  return report.passed() ? ok : verification;
}

bool admissible(const RunConfig& cfg, std::size_t grid) {
  const std::size_t extent = std::min(grid, cfg.kernel.max_size());
  const auto report = check_admissibility(cfg.kernel, extent);
  if (report.passed()) return true;
  std::cerr << "error: kernel '" << cfg.kernel.name() << "' is not admissible with its declared constants";
  const auto& m = report.metrics();
  if (m.count("first_violation_i")) {
    std::cerr << " (first violation at i=" << m.at("first_violation_i")
              << ", j=" << m.at("first_violation_j") << ")";
  }
  std::cerr << '\n';
  for (const auto& n : report.notes()) std::cerr << "  " << n << '\n';
  return false;
}

int run_simulate(const RunConfig& cfg) {
  if (!admissible(cfg, admissibility_grid(cfg.truncation_k))) return usage;
  fs::create_directories(cfg.output_dir);
  ExperimentReport report("simulate");
  report.set_config_echo(cfg.echo());
  const fs::path summary = cfg.output_dir / "summary.json";
  Trajectory traj;
  try {
    traj = integrate(cfg.initial_state(), cfg.kernel, cfg.solver, &g_interrupted);
  } catch (const IntegrationInterrupted& e) {
    traj = e.partial();
    report.mark_interrupted();
  }
  summarize(traj, report);
  if (!traj.empty()) write_trajectory_files(traj, cfg.output_dir, report);
  return finish(report, summary);
}

ExperimentReport run_experiment(const RunConfig& cfg, const ExperimentSpec& spec) {
  SolverConfig solver = cfg.solver;
  solver.cancel = &g_interrupted;
  const fs::path& dir = cfg.output_dir;

  if (spec.name == "truncation") {
    auto result = truncation_convergence(cfg.kernel, cfg.initial, spec.truncation, solver);
    std::vector<double> ks(result.k_list.begin(), result.k_list.end());
    if (result.defects.size() == ks.size()) {
      emit(dir / "defect_vs_k.svg",
           svg_plot({"Mass defect vs truncation", "k", "defect", true, true},
                    {{"defect", ks, result.defects}}),
           result.report, dir);
    }
    return result.report;
  }
  if (spec.name == "dependence") {
    return perturbation_study(cfg.kernel, cfg.initial_state(), spec.dependence, solver);
  }
  if (spec.name == "decay") return asymptotic_decay(cfg.kernel, cfg.initial_state(), spec.decay, solver);
  if (spec.name == "identity") {
    solver.sample_times = SolverConfig::uniform_samples(solver.t_end, spec.identity_intervals);
    ExperimentReport report("identity");
    Trajectory traj = integrate(cfg.initial_state(), cfg.kernel, solver);
    report.merge(identity_audit(traj, cfg.kernel, spec.identity, solver.rel_tol), "");
    write_trajectory_files(traj, dir, report);
    return report;
  }
  if (spec.name == "rescaling") {
    return time_rescaling(cfg.kernel, cfg.initial_state(), spec.rescaling, solver);
  }
  if (spec.name == "admissibility") {
    const std::size_t grid =
        spec.admissibility_grid == 0 ? admissibility_grid(cfg.truncation_k) : spec.admissibility_grid;
    return check_admissibility(cfg.kernel, std::min(grid, cfg.kernel.max_size()));
  }
  const auto init = cfg.initial_state();
  return weights_study(init.values(), spec.weights);
}

int run_verify(const RunConfig& cfg) {
  if (!cfg.experiment) {
    std::cerr << "error: $.experiment: verify needs an experiment block\n";
    return usage;
  }
  const auto& spec = *cfg.experiment;
  if (spec.name != "admissibility" && !admissible(cfg, admissibility_grid(cfg.truncation_k))) {
    return usage;
  }
  fs::create_directories(cfg.output_dir);
  const fs::path path = cfg.output_dir / (spec.name + "_report.json");
  ExperimentReport report(spec.name);
  try {
    report = run_experiment(cfg, spec);
  } catch (const IntegrationInterrupted&) {
    report.mark_interrupted();
  }
  report.set_config_echo(cfg.echo());
  return finish(report, path);
}

template <class Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return usage;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure at t=" << e.time() << ": " << e.what() << '\n';
    return numeric;
  } catch (const IntegrationStalled& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
}

int list_kernels() {
  std::printf("%-16s %-9s %8s %8s %8s  %s\n", "name", "type", "A", "delta", "zeta", "admissible(256)");
  for (const auto& k : kernel_catalog()) {
    const auto& c = k.constants();
    const auto opt = [](const std::optional<double>& v) {
      return v ? format_double(*v).substr(0, 8) : std::string("-");
    };
    const bool pass = check_admissibility(k, std::min<std::size_t>(256, k.max_size())).passed();
    std::printf("%-16s %-9s %8g %8s %8s  %s\n", k.name().c_str(), to_string(k.type()).c_str(),
                c.growth_A, opt(c.power_delta).c_str(), opt(c.lower_bound_zeta).c_str(),
                pass ? "yes" : "no");
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coagkin: truncated Safronov-Dubovskii coagulation solver and verification harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "Integrate a run config and write CSV/JSON/SVG output");
  simulate->add_option("config", config_path, "Run config (JSON)")->required();
  auto* verify = app.add_subcommand("verify", "Run the experiment named in a run config");
  verify->add_option("config", config_path, "Run config (JSON)")->required();
  auto* kernels = app.add_subcommand("kernels", "Kernel catalog");
  kernels->require_subcommand(1);
  kernels->add_subcommand("list", "List built-in kernels and their declared constants");
  auto* schema = app.add_subcommand("schema", "Run-config schema");
  schema->require_subcommand(1);
  schema->add_subcommand("print", "Print the JSON schema of run configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }
  if (!apply_thread_cap()) return usage;
  std::signal(SIGINT, on_sigint);

  if (*kernels) return guarded(list_kernels);
  if (*schema) {
    std::cout << run_config_schema();
    return ok;
  }
  return guarded([&] {
    const RunConfig cfg = load_run_config(config_path);
    return *simulate ? run_simulate(cfg) : run_verify(cfg);
  });
}

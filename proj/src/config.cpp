#include "coagkin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coagkin/errors.hpp"
#include "coagkin/weights.hpp"

namespace coagkin {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"truncation", "dependence", "decay",  "identity",
                                              "admissibility", "weights", "rescaling"};
  return names;
}

namespace {

/// Typed access to one JSON object; every read key is recorded so leftovers can be rejected.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_[key].is_null(); }

  /// Marks an optional key as read; nullptr when absent or null.
  const json* find(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &obj_[key] : nullptr;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(at(key), "required field missing");
    return obj_[key];
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    const json& v = obj_[key];
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be > 0");
    return x;
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    return as_count(obj_[key], at(key));
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (fallback) return *fallback;
      raw(key);
    }
    if (!obj_[key].is_string()) throw ConfigError(at(key), "expected a string");
    return obj_[key].get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    if (!obj_[key].is_boolean()) throw ConfigError(at(key), "expected true or false");
    return obj_[key].get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const json& v = array(key);
    std::vector<double> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!v[n].is_number()) throw ConfigError(at(key) + "[" + std::to_string(n) + "]", "expected a number");
      out.push_back(v[n].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const json& v = array(key);
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
      out.push_back(as_count(v[n], at(key) + "[" + std::to_string(n) + "]"));
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const json& v = array(key);
    std::vector<std::string> out;
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!v[n].is_string()) throw ConfigError(at(key) + "[" + std::to_string(n) + "]", "expected a string");
      out.push_back(v[n].get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(at(key), "unknown field");
    }
  }

 private:
  const json& array(const std::string& key) const {
    const json& v = obj_[key];
    if (!v.is_array()) throw ConfigError(at(key), "expected an array");
    return v;
  }

  static std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(path, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return fs::absolute(path).lexically_normal();
}

void require_file(const fs::path& path, const std::string& field) {
  if (!fs::is_regular_file(path)) throw ConfigError(field, "file not found: " + path.string());
}

std::vector<double> load_initial_values(const fs::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (std::isalpha(static_cast<unsigned char>(line[first])) && values.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a)) throw ConfigError(field, path.string() + ":" + std::to_string(line_no) + ": bad row");
    if (row >> b) {
      if (a != static_cast<double>(values.size() + 1)) {
        throw ConfigError(field, path.string() + ":" + std::to_string(line_no) +
                                     ": sizes must be listed as 1, 2, 3, ...");
      }
      values.push_back(b);
    } else {
      values.push_back(a);
    }
    if (!(values.back() >= 0.0) || !std::isfinite(values.back())) {
      throw ConfigError(field, path.string() + ":" + std::to_string(line_no) +
                                   ": concentrations must be finite and >= 0");
    }
  }
  return values;
}

SolverConfig parse_solver(const json& block, const std::string& field) {
  SolverConfig c;
  Fields f(block, field);
  c.rel_tol = f.positive("rel_tol", c.rel_tol);
  c.abs_tol = f.positive("abs_tol", c.abs_tol);
  c.t_end = f.positive("t_end", c.t_end);
  if (f.find("max_step")) c.max_step = f.positive("max_step");
  c.positivity_floor = f.number("positivity_floor", c.positivity_floor);
  if (c.positivity_floor < 0.0) throw ConfigError(f.at("positivity_floor"), "must be >= 0");
  if (const json* found = f.find("mode")) {
    const json& mode = *found;
    if (mode.is_string() && mode.get<std::string>() == "adaptive") {
      c.mode = AdaptiveMode{};
    } else if (mode.is_object()) {
      Fields m(mode, f.at("mode"));
      c.mode = FixedStepMode{m.positive("fixed_step")};
      m.finish();
    } else {
      throw ConfigError(f.at("mode"), "expected \"adaptive\" or {\"fixed_step\": h}");
    }
  }
  if (f.has("sample_times") && f.has("samples")) {
    throw ConfigError(f.at("samples"), "give either samples or sample_times, not both");
  }
  if (f.has("sample_times")) {
    c.sample_times = f.numbers("sample_times", {});
  } else {
    const std::size_t intervals = f.count("samples", 10);
    if (intervals == 0) throw ConfigError(f.at("samples"), "must be >= 1");
    c.sample_times = SolverConfig::uniform_samples(c.t_end, intervals);
  }
  c.safety = f.positive("safety", c.safety);
  c.min_factor = f.positive("min_factor", c.min_factor);
  c.max_factor = f.positive("max_factor", c.max_factor);
  c.controller_beta = f.number("controller_beta", c.controller_beta);
  if (f.find("initial_step")) c.initial_step = f.positive("initial_step");
  c.max_steps = f.count("max_steps", c.max_steps);
  f.finish();
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ConfigError(field, e.what());
  }
  return c;
}

json solver_echo(const SolverConfig& c) {
  json j{{"rel_tol", c.rel_tol},
         {"abs_tol", c.abs_tol},
         {"t_end", c.t_end},
         {"positivity_floor", c.positivity_floor},
         {"sample_times", c.sample_times},
         {"safety", c.safety},
         {"min_factor", c.min_factor},
         {"max_factor", c.max_factor},
         {"controller_beta", c.controller_beta},
         {"max_steps", c.max_steps}};
  if (std::isfinite(c.max_step)) j["max_step"] = c.max_step;
  if (c.initial_step) j["initial_step"] = *c.initial_step;
  if (const auto* fixed = std::get_if<FixedStepMode>(&c.mode)) {
    j["mode"] = json{{"fixed_step", fixed->h}};
  } else {
    j["mode"] = "adaptive";
  }
  return j;
}

InitialRule parse_initial(const json& block, const fs::path& base, const std::string& field,
                          fs::path& resolved_path) {
  InitialRule r;
  Fields f(block, field);
  const std::string type = f.text("type");
  r.mass_scale = f.positive("mass_scale", 1.0);
  if (type == "monomer") {
    r.kind = InitialRule::Kind::monomer;
  } else if (type == "geometric") {
    r.kind = InitialRule::Kind::geometric;
    r.ratio = f.positive("ratio");
  } else if (type == "file") {
    r.kind = InitialRule::Kind::file;
    resolved_path = resolve(base, f.text("path"));
    require_file(resolved_path, f.at("path"));
    r.data = load_initial_values(resolved_path, f.at("path"));
  } else {
    throw ConfigError(f.at("type"), "expected monomer, geometric or file");
  }
  f.finish();
  return r;
}

/// Experiment keys; thresholds may sit at the top level of the block or under "thresholds".
json flatten_experiment(const json& block, const std::string& field) {
  if (!block.is_object()) throw ConfigError(field, "expected an object");
  json flat = block;
  flat.erase("thresholds");
  if (block.contains("thresholds")) {
    const json& t = block["thresholds"];
    if (!t.is_object()) throw ConfigError(field + ".thresholds", "expected an object");
    for (const auto& [key, value] : t.items()) {
      if (flat.contains(key)) throw ConfigError(field + ".thresholds." + key, "given twice");
      flat[key] = value;
    }
  }
  return flat;
}

ExperimentSpec parse_experiment(const json& block, const std::string& field, std::uint64_t seed) {
  const json flat = flatten_experiment(block, field);
  Fields f(flat, field);
  ExperimentSpec s;
  s.name = f.text("name");
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), s.name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError(f.at("name"), "unknown experiment '" + s.name + "'; valid names: " + list);
  }
  if (s.name == "truncation") {
    auto& o = s.truncation;
    o.k_list = f.counts("k_list", o.k_list);
    if (o.k_list.size() < 3) throw ConfigError(f.at("k_list"), "needs at least 3 entries");
    for (std::size_t n = 0; n < o.k_list.size(); ++n) {
      if (o.k_list[n] < 2 || (n > 0 && o.k_list[n] <= o.k_list[n - 1])) {
        throw ConfigError(f.at("k_list"), "entries must be >= 2 and strictly ascending");
      }
    }
    o.t_end = f.positive("T", o.t_end);
    o.sample_intervals = f.count("sample_intervals", o.sample_intervals);
    o.strict_decrease = f.flag("strict_decrease", o.strict_decrease);
    o.distance_noise = f.number("distance_noise", o.distance_noise);
    o.defect_threshold = f.number("defect_threshold", o.defect_threshold);
  } else if (s.name == "dependence") {
    auto& o = s.dependence;
    o.dependence.t_end = f.positive("T", o.dependence.t_end);
    o.dependence.sample_intervals = f.count("sample_intervals", o.dependence.sample_intervals);
    o.epsilon = f.positive("epsilon", o.epsilon);
    o.perturbed_size = f.count("perturbed_size", o.perturbed_size);
    o.dependence.uniqueness_tolerance =
        f.number("uniqueness_tolerance", o.dependence.uniqueness_tolerance);
    o.dependence.envelope_limit = f.number("envelope_limit", o.dependence.envelope_limit);
    o.linearity_tolerance = f.number("linearity_tolerance", o.linearity_tolerance);
  } else if (s.name == "decay") {
    auto& o = s.decay;
    o.t_end = f.positive("T", o.t_end);
    o.sample_intervals = f.count("sample_intervals", o.sample_intervals);
    o.components = f.count("components", o.components);
    o.envelope_slack = f.number("envelope_slack", o.envelope_slack);
    o.tol_conv = f.number("tol_conv", o.tol_conv);
    o.tol_limit = f.number("tol_limit", o.tol_limit);
    o.number_slack = f.number("number_slack", o.number_slack);
  } else if (s.name == "identity") {
    auto& o = s.identity;
    s.identity_intervals = f.count("sample_intervals", s.identity_intervals);
    o.phi = f.texts("phi", o.phi);
    for (const auto& name : o.phi) {
      const auto valid = phi_names();
      if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
        throw ConfigError(f.at("phi"), "unknown sequence '" + name + "'");
      }
    }
    o.q_list = f.counts("q_list", o.q_list);
    o.random_states = f.count("random_states", 1000);
    o.residual_factor = f.number("residual_factor", o.residual_factor);
    o.adjoint_tolerance = f.number("adjoint_tolerance", o.adjoint_tolerance);
    o.seed = seed;
  } else if (s.name == "rescaling") {
    auto& o = s.rescaling;
    o.alphas = f.numbers("alphas", o.alphas);
    o.t_end = f.positive("T", o.t_end);
    o.sample_intervals = f.count("sample_intervals", o.sample_intervals);
    o.tolerance_factor = f.number("tolerance_factor", o.tolerance_factor);
  } else if (s.name == "admissibility") {
    s.admissibility_grid = f.count("grid", 0);
  } else if (s.name == "weights") {
    auto& o = s.weights;
    o.powers = f.numbers("powers", o.powers);
    o.sample_extent = f.positive("sample_extent", o.sample_extent);
    o.inequality_size = f.count("inequality_size", o.inequality_size);
    o.tail_budget = f.positive("tail_budget", o.tail_budget);
    o.seed = seed;
  }
  f.finish();
  return s;
}

json experiment_echo(const ExperimentSpec& s, std::size_t k) {
  json j{{"name", s.name}};
  json t = json::object();
  if (s.name == "truncation") {
    const auto& o = s.truncation;
    j.update({{"k_list", o.k_list}, {"T", o.t_end}, {"sample_intervals", o.sample_intervals},
              {"strict_decrease", o.strict_decrease}, {"distance_noise", o.distance_noise}});
    t["defect_threshold"] = o.defect_threshold;
  } else if (s.name == "dependence") {
    const auto& o = s.dependence;
    j.update({{"T", o.dependence.t_end}, {"sample_intervals", o.dependence.sample_intervals},
              {"epsilon", o.epsilon}, {"perturbed_size", o.perturbed_size}});
    t = {{"uniqueness_tolerance", o.dependence.uniqueness_tolerance},
         {"envelope_limit", o.dependence.envelope_limit},
         {"linearity_tolerance", o.linearity_tolerance}};
  } else if (s.name == "decay") {
    const auto& o = s.decay;
    j.update({{"T", o.t_end}, {"sample_intervals", o.sample_intervals}, {"components", o.components}});
    t = {{"envelope_slack", o.envelope_slack}, {"tol_conv", o.tol_conv},
         {"tol_limit", o.tol_limit}, {"number_slack", o.number_slack}};
  } else if (s.name == "identity") {
    const auto& o = s.identity;
    j.update({{"sample_intervals", s.identity_intervals}, {"phi", o.phi}, {"q_list", o.q_list},
              {"random_states", o.random_states}});
    t = {{"residual_factor", o.residual_factor}, {"adjoint_tolerance", o.adjoint_tolerance}};
  } else if (s.name == "rescaling") {
    const auto& o = s.rescaling;
    j.update({{"alphas", o.alphas}, {"T", o.t_end}, {"sample_intervals", o.sample_intervals}});
    t["tolerance_factor"] = o.tolerance_factor;
  } else if (s.name == "admissibility") {
    j["grid"] = s.admissibility_grid == 0 ? admissibility_grid(k) : s.admissibility_grid;
  } else if (s.name == "weights") {
    const auto& o = s.weights;
    j.update({{"powers", o.powers}, {"sample_extent", o.sample_extent},
              {"inequality_size", o.inequality_size}, {"tail_budget", o.tail_budget}});
  }
  if (!t.empty()) j["thresholds"] = t;
  return j;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

CoagulationKernel kernel_from_json(const json& block, const fs::path& base_dir,
                                   const std::string& field) {
  Fields f(block, field);
  const std::string type = f.text("type");
  const std::string name = f.text("name", type);
  KernelConstants c;
  c.growth_A = f.positive("A", 1.0);
  if (f.find("delta")) c.power_delta = f.number("delta");
  if (f.find("zeta")) c.lower_bound_zeta = f.number("zeta");
  const json empty = json::object();
  const json* params = f.find("params");
  Fields p(params ? *params : empty, f.at("params"));
  try {
    CoagulationKernel kernel = [&] {
      if (type == "constant") return CoagulationKernel::constant(p.number("c", 1.0), c, name);
      if (type == "additive") return CoagulationKernel::additive(p.number("a", 1.0), c, name);
      if (type == "power") {
        return CoagulationKernel::power_sum(p.number("a", 1.0), p.number("exponent"), c, name);
      }
      if (type == "product") return CoagulationKernel::product(p.number("a", 1.0), c, name);
      if (type == "table") {
        if (p.has("builtin")) {
          if (p.text("builtin") != "brownian") {
            throw ConfigError(p.at("builtin"), "only \"brownian\" is built in");
          }
          return CoagulationKernel::tabulated(brownian_table(p.count("size", 512)), c, name);
        }
        const fs::path path = resolve(base_dir, p.text("path"));
        require_file(path, p.at("path"));
        return CoagulationKernel::tabulated(SymmetricTable::load_csv(path), c, name);
      }
      throw ConfigError(f.at("type"), "expected constant, additive, power, product or table");
    }();
    p.finish();
    f.finish();
    return kernel;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("line " + std::to_string(line), "JSON syntax error: " + std::string(e.what()));
  }
  const fs::path base = fs::absolute(base_dir);

  Fields f(root, "$");
  RunConfig cfg;
  cfg.truncation_k = f.count("truncation_k");
  if (cfg.truncation_k < 2) throw ConfigError("$.truncation_k", "must be >= 2");
  cfg.seed = f.count("seed", 0);

  // Kernel: re-resolve relative table paths so the echo is location independent.
  json kernel_block = f.raw("kernel");
  cfg.kernel = kernel_from_json(kernel_block, base, "$.kernel");
  if (kernel_block.contains("params") && kernel_block["params"].contains("path")) {
    kernel_block["params"]["path"] =
        resolve(base, kernel_block["params"]["path"].get<std::string>()).string();
  }
  kernel_block["name"] = cfg.kernel.name();
  kernel_block["A"] = cfg.kernel.constants().growth_A;
  cfg.kernel_block = kernel_block;
  if (cfg.truncation_k > cfg.kernel.max_size()) {
    throw ConfigError("$.truncation_k", "exceeds the tabulated kernel extent " +
                                            std::to_string(cfg.kernel.max_size()));
  }

  cfg.initial = parse_initial(f.raw("initial"), base, "$.initial", cfg.initial_path);

  const json empty = json::object();
  const json* solver = f.find("solver");
  cfg.solver = parse_solver(solver ? *solver : empty, "$.solver");

  if (const json* diagnostics = f.find("diagnostics")) {
    Fields d(*diagnostics, "$.diagnostics");
    cfg.solver.diagnostics.moment_orders = d.numbers("moment_orders", {2.0});
    for (double m : cfg.solver.diagnostics.moment_orders) {
      if (!(m >= 0.0 && m <= 4.0)) throw ConfigError(d.at("moment_orders"), "orders must lie in [0, 4]");
    }
    if (const json* found = d.find("weights")) {
      const json& ws = *found;
      if (!ws.is_array()) throw ConfigError(d.at("weights"), "expected an array");
      for (std::size_t n = 0; n < ws.size(); ++n) {
        const std::string at = d.at("weights") + "[" + std::to_string(n) + "]";
        try {
          if (ws[n].is_string() && ws[n].get<std::string>() == "dlvp") {
            const auto init = cfg.initial_state();
            cfg.solver.diagnostics.weights.push_back(construct_dlvp(init.values()).weight);
          } else {
            cfg.solver.diagnostics.weights.push_back(ConvexWeight::from_json(ws[n]));
          }
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          throw ConfigError(at, e.what());
        }
      }
    }
    d.finish();
  }

  if (const json* experiment = f.find("experiment")) {
    cfg.experiment = parse_experiment(*experiment, "$.experiment", cfg.seed);
  }
  cfg.output_dir = resolve(base, f.text("output_dir", "out"));
  f.finish();
  return cfg;
}

json RunConfig::echo() const {
  const json& kernel = kernel_block;
  json initial = json::object();
  switch (this->initial.kind) {
    case InitialRule::Kind::monomer:
      initial["type"] = "monomer";
      break;
    case InitialRule::Kind::geometric:
      initial["type"] = "geometric";
      initial["ratio"] = this->initial.ratio;
      break;
    case InitialRule::Kind::file:
      initial["type"] = "file";
      initial["path"] = initial_path.string();
      break;
  }
  initial["mass_scale"] = this->initial.mass_scale;

  json weights = json::array();
  for (const auto& w : solver.diagnostics.weights) weights.push_back(w.to_json());
  json j{{"kernel", kernel},
         {"initial", initial},
         {"truncation_k", truncation_k},
         {"solver", solver_echo(solver)},
         {"diagnostics", {{"moment_orders", solver.diagnostics.moment_orders}, {"weights", weights}}},
         {"output_dir", output_dir.string()},
         {"seed", seed}};
  if (experiment) j["experiment"] = experiment_echo(*experiment, truncation_k);
  return j;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace coagkin

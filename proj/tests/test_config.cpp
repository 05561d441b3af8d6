#include <doctest.h>

#include <fstream>
#include <string>

#include "coagkin/config.hpp"
#include "coagkin/errors.hpp"
#include "support.hpp"

using namespace coagkin;

namespace {

const std::string minimal = R"({
  "kernel": {"type": "additive", "params": {"a": 0.5}, "A": 1},
  "initial": {"type": "geometric", "ratio": 0.25},
  "truncation_k": 12,
  "solver": {"t_end": 3, "samples": 6}
})";

std::string field_of(const std::string& text) {
  try {
    parse_run_config(text, ".");
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

std::string message_of(const std::string& text) {
  try {
    parse_run_config(text, ".");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<none>";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config resolves defaults") {
  const auto cfg = parse_run_config(minimal, ".");
  CHECK(cfg.truncation_k == 12);
  CHECK(cfg.kernel.name() == "additive");
  CHECK(cfg.kernel(2, 3) == 2.5);
  CHECK(cfg.solver.t_end == 3.0);
  CHECK(cfg.solver.sample_times.size() == 7);
  CHECK(cfg.initial_state().concentration(2) == 0.0625);
  CHECK_FALSE(cfg.experiment.has_value());
}

TEST_CASE("truncation below two names the field") {
  std::string text = minimal;
  text.replace(text.find("12"), 2, "1");
  CHECK(field_of(text) == "$.truncation_k");
}

TEST_CASE("syntax errors report the line") {
  const std::string text = "{\n  \"truncation_k\": 4,\n  \"kernel\": {,}\n}";
  CHECK(field_of(text) == "line 3");
}

TEST_CASE("unknown fields are rejected") {
  std::string text = minimal;
  text.insert(1, "\"colour\": 1,");
  CHECK(field_of(text).find("colour") != std::string::npos);
}

TEST_CASE("unknown experiment lists the valid names") {
  std::string text = minimal;
  text.insert(1, "\"experiment\": {\"name\": \"bogus\"},");
  const auto msg = message_of(text);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("truncation") != std::string::npos);
  CHECK(msg.find("identity") != std::string::npos);
}

TEST_CASE("bad values name their field") {
  std::string text = minimal;
  text.replace(text.find("\"t_end\": 3"), 10, "\"t_end\": -3");
  CHECK(field_of(text) == "$.solver.t_end");
}

TEST_CASE("thresholds may be nested") {
  std::string text = minimal;
  text.insert(1, R"("experiment": {"name": "truncation", "k_list": [8, 16, 32],
                   "thresholds": {"defect_threshold": 1e-3}},)");
  const auto cfg = parse_run_config(text, ".");
  REQUIRE(cfg.experiment.has_value());
  CHECK(cfg.experiment->truncation.defect_threshold == 1e-3);
  CHECK(cfg.experiment->truncation.k_list.size() == 3);
}

TEST_CASE("truncation k_list needs three entries") {
  std::string text = minimal;
  text.insert(1, R"("experiment": {"name": "truncation", "k_list": [4]},)");
  CHECK(field_of(text).find("k_list") != std::string::npos);
}

TEST_CASE("echo round trip reproduces the run") {
  std::string text = minimal;
  text.insert(1, R"("experiment": {"name": "decay", "tol_limit": 1e-3},)");
  const auto a = parse_run_config(text, ".");
  const auto echo = a.echo();
  const auto b = parse_run_config(echo.dump(), "/");
  CHECK(b.echo() == echo);
  CHECK(b.experiment->decay.tol_limit == 1e-3);
  CHECK(b.output_dir == a.output_dir);
}

TEST_CASE("file inputs resolve relative to the config directory") {
  testing::TempDir dir("coagkin_config");
  {
    std::ofstream(dir.path() / "table.csv") << "i,j,gamma\n1,1,2\n2,1,3\n2,2,4\n";
    std::ofstream(dir.path() / "init.csv") << "# sizes\n1,0.5\n2,0.25\n";
  }
  const std::string text = R"({
    "kernel": {"type": "table", "params": {"path": "table.csv"}, "A": 2},
    "initial": {"type": "file", "path": "init.csv"},
    "truncation_k": 2,
    "solver": {"t_end": 1}
  })";
  const auto cfg = parse_run_config(text, dir.path());
  CHECK(cfg.kernel(1, 2) == 3.0);
  CHECK(cfg.kernel(2, 2) == 4.0);
  CHECK(cfg.initial_state().concentration(2) == 0.25);
  CHECK(cfg.initial_path == std::filesystem::absolute(dir.path() / "init.csv").lexically_normal());
  CHECK(cfg.output_dir == std::filesystem::absolute(dir.path() / "out").lexically_normal());
}

TEST_CASE("missing files name the field") {
  const std::string text = R"({
    "kernel": {"type": "constant"},
    "initial": {"type": "file", "path": "nowhere.csv"},
    "truncation_k": 4,
    "solver": {"t_end": 1}
  })";
  CHECK(field_of(text) == "$.initial.path");
}

TEST_CASE("builtin brownian table") {
  const nlohmann::json block = {{"type", "table"}, {"params", {{"builtin", "brownian"}, {"size", 32}}}, {"A", 2}};
  const auto g = kernel_from_json(block, ".");
  CHECK(g.max_size() == 32);
  CHECK(g(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("schema is valid JSON") {
  const auto schema = nlohmann::json::parse(run_config_schema());
  CHECK(schema.contains("properties"));
  CHECK(schema["properties"].contains("truncation_k"));
}

}  // TEST_SUITE

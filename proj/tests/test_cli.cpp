#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "jellium/cli.hpp"
#include "jellium/csv.hpp"
#include "jellium/error.hpp"

using namespace jellium;
using cli::Json;
namespace fs = std::filesystem;

namespace {

Json uniform_gas(int n, double alpha, double beta = 1.0) {
  return {{"n", n},
          {"beta", beta},
          {"background", {{"variant", "UniformInterval"}, {"params", {{"a", -1}, {"b", 0}}}, {"alpha", alpha}}}};
}

Json config(const std::string& experiment, Json params, const std::string& out) {
  return {{"experiment", experiment}, {"seed", 7}, {"output_dir", out}, {"params", std::move(params)}};
}

std::string pointer_of(const Json& doc) {
  try {
    cli::parse_config(doc);
  } catch (const ConfigInvalid& e) {
    return e.pointer();
  }
  return "<accepted>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// A fresh root for relative output directories.
struct OutputRoot {
  fs::path root;
  OutputRoot() {
    root = fs::temp_directory_path() / ("jellium_cli_test_" + std::to_string(std::rand()));
    fs::remove_all(root);
    fs::create_directories(root);
    setenv("JELLIUM_OUTPUT_ROOT", root.c_str(), 1);
  }
  ~OutputRoot() {
    unsetenv("JELLIUM_OUTPUT_ROOT");
    fs::remove_all(root);
  }
};

}  // namespace

TEST_CASE("config errors carry json pointers") {
  Json bad = config("SampleGas", uniform_gas(3, 2.0), "x");
  try {
    cli::parse_config(bad);
    FAIL("accepted an inadmissible gas");
  } catch (const InadmissibleGas& e) {
    const std::string msg = e.what();
    CHECK(msg.find("/params/background/alpha") != std::string::npos);
    CHECK(msg.find("if and only if alpha > n - 1") != std::string::npos);
    CHECK(cli::exit_code(e) == 3);
  }

  Json gamma = config("SampleGas", uniform_gas(3, 6.0), "x");
  gamma["params"]["background"] = {{"variant", "GammaFamily"}, {"params", {{"n", 3}, {"gamma", 1}}}, {"alpha", 6}};
  CHECK(pointer_of(gamma) == "/params/background/params/gamma");

  Json unknown = config("SampleGas", uniform_gas(1, 1.0), "x");
  unknown["params"]["colour"] = "red";
  CHECK(pointer_of(unknown) == "/params/colour");

  Json no_seed = config("SampleGas", uniform_gas(1, 1.0), "x");
  no_seed.erase("seed");
  CHECK(pointer_of(no_seed) == "/seed");

  Json wrong_type = config("SampleGas", uniform_gas(1, 1.0), "x");
  wrong_type["params"]["n"] = "three";
  CHECK(pointer_of(wrong_type) == "/params/n");

  Json experiment = config("Nope", uniform_gas(1, 1.0), "x");
  CHECK(pointer_of(experiment) == "/experiment");

  Json depthless = config("SampleLimit", {{"source", {{"family", {{"variant", "SquaredZero"}, {"lambda", 1}}}, {"beta", 1}}}}, "x");
  CHECK(pointer_of(depthless) == "/params/source/depth");

  CHECK(pointer_of(Json::array()) == "/");
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code(ConfigInvalid("/seed", "missing")) == 2);
  CHECK(cli::exit_code(InadmissibleGas("no")) == 3);
  CHECK(cli::exit_code(MaxAttemptsExceeded("no", 10)) == 4);
  CHECK(cli::exit_code(std::runtime_error("io")) == 5);
}

TEST_CASE("validate reports a cost estimate") {
  const Json r = cli::validate_config(config("SampleGas", uniform_gas(3, 3.5), "x"));
  CHECK(r["status"] == "ok");
  CHECK(r["experiment"] == "SampleGas");
  CHECK(r["cost"]["draws"].get<double>() > 0);
  CHECK(r["cost"].contains("seconds"));
  CHECK_THROWS_AS(cli::validate_config(config("SampleGas", uniform_gas(3, 2.0), "x")), InadmissibleGas);
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-2.0) == "-2");
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.field(1LL).field(0.5).end_row();
  CHECK(os.str() == "a,b\r\n1,0.5\r\n");
  w.field(1LL);
  CHECK_THROWS(w.end_row());
}

TEST_CASE("schema") {
  const Json s = cli::schema();
  CHECK(s.contains("$defs"));
  CHECK(s["$defs"].contains("renyi_check"));
  CHECK(s.dump().find("alpha > n - 1") != std::string::npos);
}

TEST_CASE("runs write artifacts under the output root") {
  OutputRoot out;
  const auto one = cli::parse_config(
      config("SampleGas", [] { Json p = uniform_gas(1, 1.0); p["samples"] = 50; return p; }(), "one"));
  CHECK(cli::resolve_output_dir("one") == out.root / "one");
  const cli::RunResult r = cli::run(one);
  CHECK(r.directory == out.root / "one");
  CHECK(r.summary["acceptance_rate"].get<double>() == 1.0);
  const std::string csv = slurp(r.directory / "samples.csv");
  CHECK(csv.rfind("sample_id,k,x\r\n", 0) == 0);
  const Json manifest = cli::load_json_file(r.directory / "manifest.json");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["config"]["experiment"] == "SampleGas");
  CHECK(manifest.contains("version"));
  CHECK(manifest.contains("wall_time_seconds"));
  // The manifest lists everything but itself.
  CHECK(manifest["artifacts"].size() + 1 == r.artifacts.size());
  CHECK(fs::exists(r.directory / "sample_gas.json"));
}

TEST_CASE("output does not depend on parallelism") {
  OutputRoot out;
  Json p = uniform_gas(3, 3.5);
  p["samples"] = 1000;
  p["method"] = "rejection";
  Json base = config("SampleGas", p, "a");
  base["chunk"] = 100;
  Json again = base;
  again["output_dir"] = "b";
  Json wide = base;
  wide["output_dir"] = "c";
  wide["parallelism"] = 3;
  for (const Json* doc : {&base, &again, &wide}) cli::run(cli::parse_config(*doc));
  const std::string a = slurp(out.root / "a" / "samples.csv");
  CHECK(a.size() > 1000);
  CHECK(a == slurp(out.root / "b" / "samples.csv"));
  CHECK(a == slurp(out.root / "c" / "samples.csv"));

  Json other = base;
  other["output_dir"] = "d";
  other["seed"] = 8;
  cli::run(cli::parse_config(other));
  CHECK(a != slurp(out.root / "d" / "samples.csv"));
}

TEST_CASE("renyi check passes on a small case") {
  OutputRoot out;
  Json p = uniform_gas(3, 3.5);
  p["k"] = 1;
  p["samples"] = 20000;
  Json doc = config("RenyiCheck", p, "renyi");
  doc["parallelism"] = 2;
  const cli::RunResult r = cli::run(cli::parse_config(doc));
  CHECK(r.summary["verdict"] == "pass");
  const Json report = cli::load_json_file(r.directory / "renyi_check.json");
  CHECK(report["report"]["event_prob"].get<double>() > 0.5);
  CHECK(fs::exists(r.directory / "renyi_topk.csv"));
}

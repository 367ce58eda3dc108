#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jellium/background.hpp"
#include "jellium/edge_limits.hpp"
#include "jellium/order_stats.hpp"
#include "jellium/stats.hpp"
#include "jellium/types.hpp"

namespace jellium::cli {

using Json = nlohmann::json;

enum class Experiment {
  SampleGas,
  SampleLimit,
  RenyiCheck,
  TailScan,
  DominanceCheck,
  GumbelCheck,
  ConvergenceTable,
  PartitionEstimate,
};

std::string to_string(Experiment e);

struct GasSpec {
  Background bg;
  GasParams params;
};

enum class GasMethod { Auto, Rejection, Gibbs };

struct SampleGasParams {
  GasSpec gas;
  long long samples = 1000;
  GasMethod method = GasMethod::Auto;
  long long burn_in = 1000;
  long long thin = 10;
  long long max_attempts = 10'000'000;
};

// A population of top-k draws from a limit family: the exact half-well sum
// when depth is absent (HalfWell only), otherwise the depth-m process.
struct LimitSource {
  LimitFamily family;
  std::optional<int> depth;
  double eps = 1e-8;
  LimitOptions options;
};

struct SampleLimitParams {
  LimitSource source;
  int k = 1;
  long long samples = 1000;
};

struct RenyiCheckParams {
  ConditionalSpec spec;
  long long samples = 100000;
  ConditionalStrategy strategy = ConditionalStrategy::SignRestricted;
  double delta = 0.01;
  long long max_attempts = 10'000'000;
};

struct TailScanParams {
  LimitSource source;
  double gamma_hypothesis = 1.0;
  TailWindow window;
  long long samples = 1'000'000;
};

struct DominanceCheckParams {
  LimitSource p;
  LimitSource q;
  int coordinate = 1;  // compares X_(coordinate)
  long long samples = 100000;
  double delta = 0.01;
};

struct GumbelCheckParams {
  double chi = 200.0;
  long long samples = 100000;
  double eps = 1e-6;
  double threshold = 0.02;
};

struct ConvergenceTableParams {
  RegimeSpec regime;
  int k = 1;
  std::vector<int> n_list = {8, 16, 32, 64};
  long long samples = 20000;
  DistanceOptions options;
};

struct PartitionEstimateParams {
  GasSpec gas;
  long long samples = 100000;
};

using ExperimentParams =
    std::variant<SampleGasParams, SampleLimitParams, RenyiCheckParams, TailScanParams, DominanceCheckParams,
                 GumbelCheckParams, ConvergenceTableParams, PartitionEstimateParams>;

struct ExperimentConfig {
  Experiment experiment;
  ExperimentParams params;
  std::uint64_t seed = 0;
  std::string output_dir;
  int parallelism = 1;
  long long chunk = 10000;  // samples per task; tasks use the stream (seed, task_id)
  Json source;              // the document as given
};

// Schema and admissibility checks. Throws ConfigInvalid carrying the JSON
// pointer of the offending field, or InadmissibleGas.
ExperimentConfig parse_config(const Json& doc);

// Validates without running: {"status": "ok", "cost": {...}} with a dry-run
// estimate of the work. Errors propagate as from parse_config.
Json validate_config(const Json& doc);

Json schema();

// Output directory of a config: relative paths resolve against the
// JELLIUM_OUTPUT_ROOT environment variable when it is set.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

struct RunResult {
  std::filesystem::path directory;
  std::vector<std::string> artifacts;
  Json summary;
};

// Runs the experiment, writing its CSV/JSON artifacts and manifest.json.
RunResult run(const ExperimentConfig& config);

// 0 ok, 2 config, 3 inadmissible, 4 sampling budget, 5 anything else.
int exit_code(const std::exception& error);

std::string version();

Json load_json_file(const std::filesystem::path& path);

}  // namespace jellium::cli

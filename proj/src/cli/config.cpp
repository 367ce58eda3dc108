#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include "jellium/cli.hpp"
#include "jellium/error.hpp"
#include "jellium/finite_gas.hpp"

namespace jellium::cli {

namespace {

std::string escape_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw ConfigInvalid(pointer.empty() ? "/" : pointer, message);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Read-only view of a JSON object that knows its own pointer.
class Obj {
 public:
  Obj(const Json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) fail(ptr_, "expected an object");
  }

  std::string at(std::string_view key) const { return ptr_ + "/" + escape_token(key); }
  const std::string& pointer() const noexcept { return ptr_; }
  bool has(const char* key) const { return j_.contains(key); }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) fail(at(key), "unknown field");
    }
  }

  const Json& raw(const char* key) const {
    if (!j_.contains(key)) fail(at(key), "required field is missing");
    return j_.at(key);
  }

  Obj object(const char* key) const { return Obj(raw(key), at(key)); }

  double number(const char* key) const {
    const Json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "expected a finite number");
    return x;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const char* key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(
                                                               std::numeric_limits<long long>::max())) {
      fail(at(key), "integer out of range");
    }
    return v.get<long long>();
  }
  long long integer(const char* key, long long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const char* key) const {
    const Json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, std::string fallback) const { return has(key) ? text(key) : fallback; }

  double positive(const char* key) const {
    const double x = number(key);
    if (!(x > 0)) fail(at(key), "must be positive");
    return x;
  }
  double positive(const char* key, double fallback) const { return has(key) ? positive(key) : fallback; }

  long long at_least(const char* key, long long lo, long long fallback) const {
    const long long v = integer(key, fallback);
    if (v < lo) fail(at(key), "must be at least " + std::to_string(lo));
    return v;
  }
  long long at_least(const char* key, long long lo) const {
    const long long v = integer(key);
    if (v < lo) fail(at(key), "must be at least " + std::to_string(lo));
    return v;
  }

  double probability(const char* key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0) || x >= 1) fail(at(key), "must lie in (0, 1)");
    return x;
  }

 private:
  const Json& j_;
  std::string ptr_;
};

template <class E>
E choice(const Obj& o, const char* key, std::initializer_list<std::pair<const char*, E>> options, E fallback) {
  if (!o.has(key)) return fallback;
  const std::string v = o.text(key);
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(o.at(key), "expected one of " + names);
}

std::vector<Knot> parse_knots(const Obj& o, const char* key) {
  const Json& v = o.raw(key);
  if (!v.is_array() || v.size() < 2) fail(o.at(key), "expected an array of at least two [x, density] pairs");
  std::vector<Knot> knots;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = o.at(key) + "/" + std::to_string(i);
    const Json& kv = v[i];
    if (!kv.is_array() || kv.size() != 2 || !kv[0].is_number() || !kv[1].is_number()) {
      fail(p, "expected a pair [x, density]");
    }
    knots.push_back({kv[0].get<double>(), kv[1].get<double>()});
  }
  return knots;
}

Background parse_background(const Obj& o) {
  o.allow_only({"variant", "params", "alpha", "scale"});
  const std::string variant = o.text("variant");
  const double alpha = o.positive("alpha");
  const double scale = o.positive("scale", 1.0);
  const Obj p = o.object("params");
  BackgroundShape shape;
  if (variant == "UniformInterval") {
    p.allow_only({"a", "b"});
    const double a = p.number("a");
    const double b = p.number("b");
    if (!(a < b)) fail(p.at("b"), "the interval needs a < b");
    shape = UniformInterval{a, b};
  } else if (variant == "GammaFamily") {
    p.allow_only({"n", "gamma"});
    const long long n = p.at_least("n", 1);
    const double gamma = p.number("gamma");
    if (!(gamma > 1)) fail(p.at("gamma"), "gamma must exceed 1 (the family is defined for some fixed gamma > 1)");
    if (!(alpha > static_cast<double>(n))) fail(o.at("alpha"), "the gamma family needs alpha > n");
    shape = GammaFamily{static_cast<int>(n), gamma};
  } else if (variant == "FixedDensity") {
    p.allow_only({"knots"});
    shape = FixedDensity{parse_knots(p, "knots")};
  } else {
    fail(o.at("variant"), "expected one of UniformInterval, GammaFamily, FixedDensity");
  }
  try {
    return Background(std::move(shape), alpha, scale);
  } catch (const InvalidBackground& e) {
    fail(o.at("params"), e.what());
  } catch (const NonIntegrableBackground& e) {
    fail(o.at("params"), e.what());
  }
}

GasSpec parse_gas(const Obj& o) {
  const long long n = o.at_least("n", 1);
  if (n > 10000) fail(o.at("n"), "n above 10^4 is out of scope");
  const double beta = o.positive("beta");
  Background bg = parse_background(o.object("background"));
  GasParams params{static_cast<int>(n), beta, bg.alpha()};
  if (!params.admissible()) {
    throw InadmissibleGas(o.at("background") + "/alpha: alpha = " + fmt(params.alpha) + " with n = " +
                          std::to_string(n) + "; the Gibbs measure exists if and only if alpha > n - 1");
  }
  return {std::move(bg), params};
}

LimitFamily parse_family(const Obj& o, double beta) {
  const std::string variant = o.text("variant");
  LimitFamily family;
  family.beta = beta;
  if (variant == "HalfWell" || variant == "SquaredZero") {
    o.allow_only({"variant", "lambda"});
    const double lambda = o.positive("lambda");
    if (variant == "HalfWell") {
      family.shape = HalfWell{lambda};
    } else {
      family.shape = SquaredZero{lambda};
    }
  } else if (variant == "SquaredGamma") {
    o.allow_only({"variant", "gamma"});
    const double gamma = o.number("gamma");
    if (!(gamma > 1)) fail(o.at("gamma"), "gamma must exceed 1 (the family is defined for some fixed gamma > 1)");
    family.shape = SquaredGamma{gamma};
  } else {
    fail(o.at("variant"), "expected one of HalfWell, SquaredZero, SquaredGamma");
  }
  return family;
}

LimitStrategy parse_strategy(const Obj& o, const char* key, LimitStrategy fallback) {
  return choice<LimitStrategy>(o, key,
                               {{"auto", LimitStrategy::Auto},
                                {"rejection", LimitStrategy::Rejection},
                                {"gibbs", LimitStrategy::Gibbs},
                                {"transfer", LimitStrategy::Transfer}},
                               fallback);
}

LimitSource parse_source(const Obj& o) {
  o.allow_only({"family", "beta", "depth", "eps", "strategy", "max_attempts", "burn_in", "thin", "grid_points"});
  LimitSource s;
  s.family = parse_family(o.object("family"), o.positive("beta"));
  if (o.has("depth")) s.depth = static_cast<int>(o.at_least("depth", 1));
  if (!s.depth && !std::holds_alternative<HalfWell>(s.family.shape)) {
    fail(o.at("depth"), "a depth m is required unless the family is HalfWell");
  }
  s.eps = o.positive("eps", s.eps);
  s.options.strategy = parse_strategy(o, "strategy", LimitStrategy::Auto);
  s.options.max_attempts = o.at_least("max_attempts", 1, s.options.max_attempts);
  s.options.burn_in = o.at_least("burn_in", 0, s.options.burn_in);
  s.options.thin = o.at_least("thin", 1, s.options.thin);
  s.options.grid_points = static_cast<int>(o.at_least("grid_points", 3, s.options.grid_points));
  return s;
}

int parse_k(const Obj& o, long long lo, long long hi) {
  const long long k = o.at_least("k", lo, 1);
  if (k > hi) fail(o.at("k"), "k must not exceed " + std::to_string(hi));
  return static_cast<int>(k);
}

SampleGasParams parse_sample_gas(const Obj& o) {
  o.allow_only({"n", "beta", "background", "samples", "method", "burn_in", "thin", "max_attempts"});
  SampleGasParams p{.gas = parse_gas(o)};
  p.samples = o.at_least("samples", 1, p.samples);
  p.method = choice<GasMethod>(
      o, "method", {{"auto", GasMethod::Auto}, {"rejection", GasMethod::Rejection}, {"gibbs", GasMethod::Gibbs}},
      GasMethod::Auto);
  p.burn_in = o.at_least("burn_in", 0, p.burn_in);
  p.thin = o.at_least("thin", 1, p.thin);
  p.max_attempts = o.at_least("max_attempts", 1, p.max_attempts);
  return p;
}

SampleLimitParams parse_sample_limit(const Obj& o) {
  o.allow_only({"source", "k", "samples"});
  SampleLimitParams p{.source = parse_source(o.object("source"))};
  p.k = parse_k(o, 1, p.source.depth.value_or(1 << 20));
  p.samples = o.at_least("samples", 1, p.samples);
  return p;
}

RenyiCheckParams parse_renyi(const Obj& o) {
  o.allow_only({"n", "beta", "background", "k", "samples", "strategy", "delta", "max_attempts"});
  GasSpec gas = parse_gas(o);
  if (gas.bg.support().second > 0) fail(o.at("background"), "the background must be supported in (-inf, 0]");
  const int k = parse_k(o, 0, gas.params.n);
  RenyiCheckParams p{.spec = ConditionalSpec{std::move(gas.bg), gas.params, k}};
  p.samples = o.at_least("samples", 1, p.samples);
  p.strategy = choice<ConditionalStrategy>(o, "strategy",
                                           {{"sign_restricted", ConditionalStrategy::SignRestricted},
                                            {"plain_rejection", ConditionalStrategy::PlainRejection}},
                                           ConditionalStrategy::SignRestricted);
  p.delta = o.probability("delta", p.delta);
  p.max_attempts = o.at_least("max_attempts", 1, p.max_attempts);
  return p;
}

TailWindow parse_window(const Obj& o, long long samples) {
  o.allow_only({"survival_lo", "survival_hi"});
  TailWindow w;
  w.survival_lo = o.probability("survival_lo", w.survival_lo);
  w.survival_hi = o.number("survival_hi", w.survival_hi);
  if (!(w.survival_hi > w.survival_lo) || w.survival_hi > 1) {
    fail(o.at("survival_hi"), "needs survival_lo < survival_hi <= 1");
  }
  if (w.survival_lo * static_cast<double>(samples) < 50) {
    fail(o.at("survival_lo"), "fewer than 50 samples would lie beyond the window; raise samples or survival_lo");
  }
  return w;
}

TailScanParams parse_tail(const Obj& o) {
  o.allow_only({"source", "gamma_hypothesis", "window", "samples"});
  TailScanParams p;
  p.source = parse_source(o.object("source"));
  p.gamma_hypothesis = o.positive("gamma_hypothesis", p.gamma_hypothesis);
  p.samples = o.at_least("samples", 1, p.samples);
  if (o.has("window")) {
    p.window = parse_window(o.object("window"), p.samples);
  } else if (p.window.survival_lo * static_cast<double>(p.samples) < 50) {
    fail(o.at("samples"), "the default window needs at least 500000 samples");
  }
  return p;
}

DominanceCheckParams parse_dominance(const Obj& o) {
  o.allow_only({"p", "q", "coordinate", "samples", "delta"});
  DominanceCheckParams d{.p = parse_source(o.object("p")), .q = parse_source(o.object("q"))};
  d.coordinate = static_cast<int>(o.at_least("coordinate", 1, 1));
  for (const auto* s : {&d.p, &d.q}) {
    if (s->depth && *s->depth < d.coordinate) fail(o.at("coordinate"), "coordinate exceeds a source depth");
  }
  d.samples = o.at_least("samples", 1, d.samples);
  d.delta = o.probability("delta", d.delta);
  return d;
}

GumbelCheckParams parse_gumbel(const Obj& o) {
  o.allow_only({"chi", "samples", "eps", "threshold"});
  GumbelCheckParams g;
  g.chi = o.positive("chi", g.chi);
  g.samples = o.at_least("samples", 1, g.samples);
  g.eps = o.positive("eps", g.eps);
  g.threshold = o.probability("threshold", g.threshold);
  return g;
}

ConvergenceTableParams parse_convergence(const Obj& o) {
  o.allow_only({"regime", "beta", "lambda", "gamma", "alpha_ratio", "rho", "k", "n_list", "samples",
                "limit_depth", "halfwell_eps", "delta", "burn_in", "thin", "limit_strategy", "grid_points"});
  ConvergenceTableParams c;
  c.regime.regime = choice<Regime>(o, "regime",
                                   {{"AsymptoticallyNeutral", Regime::AsymptoticallyNeutral},
                                    {"Nonneutral", Regime::Nonneutral},
                                    {"FixedBackground", Regime::FixedBackground}},
                                   Regime::FixedBackground);
  if (!o.has("regime")) fail(o.at("regime"), "required field is missing");
  c.regime.beta = o.positive("beta");
  c.regime.lambda = o.positive("lambda", c.regime.lambda);
  c.regime.gamma = o.number("gamma", c.regime.gamma);
  if (!(c.regime.gamma > 1)) fail(o.at("gamma"), "gamma must exceed 1 (the family is defined for some fixed gamma > 1)");
  c.regime.alpha_ratio = o.number("alpha_ratio", c.regime.alpha_ratio);
  if (!(c.regime.alpha_ratio > 1)) fail(o.at("alpha_ratio"), "alpha_ratio must exceed 1");
  if (o.has("rho")) {
    c.regime.rho = parse_knots(o, "rho");
    try {
      (void)Background::fixed_density(c.regime.rho, 1.0);
    } catch (const Error& e) {
      fail(o.at("rho"), e.what());
    }
  }
  c.k = static_cast<int>(o.at_least("k", 1, 1));
  if (o.has("n_list")) {
    const Json& v = o.raw("n_list");
    if (!v.is_array() || v.empty()) fail(o.at("n_list"), "expected a nonempty array of integers");
    c.n_list.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long long>() < 1 || v[i].get<long long>() > 10000) {
        fail(o.at("n_list") + "/" + std::to_string(i), "expected an integer in [1, 10000]");
      }
      c.n_list.push_back(v[i].get<int>());
    }
  }
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    if (c.n_list[i] < c.k) fail(o.at("n_list") + "/" + std::to_string(i), "n must be at least k");
  }
  c.samples = o.at_least("samples", 1, c.samples);
  c.options.limit_depth = static_cast<int>(o.at_least("limit_depth", c.k, c.options.limit_depth));
  c.options.halfwell_eps = o.positive("halfwell_eps", c.options.halfwell_eps);
  c.options.delta = o.probability("delta", c.options.delta);
  c.options.burn_in = o.at_least("burn_in", 0, c.options.burn_in);
  c.options.thin = o.at_least("thin", 1, c.options.thin);
  c.options.limit_strategy = parse_strategy(o, "limit_strategy", c.options.limit_strategy);
  c.options.grid_points = static_cast<int>(o.at_least("grid_points", 3, c.options.grid_points));
  return c;
}

PartitionEstimateParams parse_partition(const Obj& o) {
  o.allow_only({"n", "beta", "background", "samples"});
  PartitionEstimateParams p{.gas = parse_gas(o)};
  p.samples = o.at_least("samples", 1, p.samples);
  return p;
}

// Rough per-draw costs measured on one core, in seconds.
constexpr double kFreeDraw = 1e-7;
constexpr double kTruncatedDraw = 3e-7;

Json cost(const ExperimentConfig& c) {
  double draws = 0.0;
  double per_draw = kFreeDraw;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SampleGasParams> || std::is_same_v<T, PartitionEstimateParams>) {
          // A short pilot gives the acceptance rate that rejection would see.
          const FiniteGas gas(p.gas.bg, p.gas.params);
          Rng rng(c.seed, ~0ULL);
          std::vector<double> scratch;
          long long ok = 0;
          constexpr long long kPilot = 2000;
          for (long long a = 0; a < kPilot; ++a) ok += gas.product().try_ordered(rng, scratch);
          const double acc = std::max(1.0, static_cast<double>(ok)) / kPilot;
          draws = static_cast<double>(p.samples) * p.gas.params.n / acc;
          if constexpr (std::is_same_v<T, SampleGasParams>) {
            if (p.method == GasMethod::Gibbs || (p.method == GasMethod::Auto && acc < 2e-3)) {
              per_draw = kTruncatedDraw;
              draws = static_cast<double>(p.samples * p.thin + p.burn_in) * p.gas.params.n;
            }
          }
        } else if constexpr (std::is_same_v<T, SampleLimitParams> || std::is_same_v<T, TailScanParams> ||
                             std::is_same_v<T, DominanceCheckParams>) {
          draws = static_cast<double>(p.samples) * 200.0;
        } else if constexpr (std::is_same_v<T, RenyiCheckParams>) {
          draws = static_cast<double>(p.samples) * p.spec.params.n * 10.0;
        } else if constexpr (std::is_same_v<T, GumbelCheckParams>) {
          draws = static_cast<double>(p.samples) * 1000.0;
        } else if constexpr (std::is_same_v<T, ConvergenceTableParams>) {
          per_draw = kTruncatedDraw;
          for (int n : p.n_list) draws += static_cast<double>(p.samples * p.options.thin) * n;
        }
      },
      c.params);
  return Json{{"draws", draws}, {"seconds", draws * per_draw / std::max(1, c.parallelism)}};
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::SampleGas: return "SampleGas";
    case Experiment::SampleLimit: return "SampleLimit";
    case Experiment::RenyiCheck: return "RenyiCheck";
    case Experiment::TailScan: return "TailScan";
    case Experiment::DominanceCheck: return "DominanceCheck";
    case Experiment::GumbelCheck: return "GumbelCheck";
    case Experiment::ConvergenceTable: return "ConvergenceTable";
    case Experiment::PartitionEstimate: return "PartitionEstimate";
  }
  return "SampleGas";
}

ExperimentConfig parse_config(const Json& doc) {
  const Obj root(doc, "");
  root.allow_only({"experiment", "params", "seed", "output_dir", "parallelism", "chunk"});
  const std::string name = root.text("experiment");
  std::optional<Experiment> experiment;
  for (int i = 0; i <= static_cast<int>(Experiment::PartitionEstimate); ++i) {
    if (to_string(static_cast<Experiment>(i)) == name) experiment = static_cast<Experiment>(i);
  }
  if (!experiment) fail("/experiment", "unknown experiment \"" + name + "\"");
  const Json& seed = root.raw("seed");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
    fail("/seed", "expected a nonnegative 64-bit integer");
  }
  const std::string output_dir = root.text("output_dir", "results");
  if (output_dir.empty()) fail("/output_dir", "must not be empty");
  const long long parallelism = root.at_least("parallelism", 1, 1);
  if (parallelism > 256) fail("/parallelism", "at most 256 workers");
  const long long chunk = root.at_least("chunk", 1, 10000);

  const Obj p = root.object("params");
  const auto params = [&]() -> ExperimentParams {
    switch (*experiment) {
      case Experiment::SampleGas: return parse_sample_gas(p);
      case Experiment::SampleLimit: return parse_sample_limit(p);
      case Experiment::RenyiCheck: return parse_renyi(p);
      case Experiment::TailScan: return parse_tail(p);
      case Experiment::DominanceCheck: return parse_dominance(p);
      case Experiment::GumbelCheck: return parse_gumbel(p);
      case Experiment::ConvergenceTable: return parse_convergence(p);
      case Experiment::PartitionEstimate: break;
    }
    return parse_partition(p);
  };
  return ExperimentConfig{*experiment, params(), seed.get<std::uint64_t>(), output_dir,
                          static_cast<int>(parallelism), chunk, doc};
}

Json validate_config(const Json& doc) {
  const ExperimentConfig c = parse_config(doc);
  return Json{{"status", "ok"}, {"experiment", to_string(c.experiment)}, {"cost", cost(c)}};
}

std::filesystem::path resolve_output_dir(const std::string& output_dir) {
  std::filesystem::path p(output_dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("JELLIUM_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return p;
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("", "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail("", std::string("malformed JSON: ") + e.what());
  }
}

int exit_code(const std::exception& error) {
  if (dynamic_cast<const ConfigInvalid*>(&error)) return 2;
  if (dynamic_cast<const InadmissibleGas*>(&error)) return 3;
  if (dynamic_cast<const MaxAttemptsExceeded*>(&error)) return 4;
  return 5;
}

std::string version() {
#ifdef JELLIUM_VERSION
  return JELLIUM_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace jellium::cli

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/math/constants/constants.hpp>

#include "jellium/cli.hpp"
#include "jellium/csv.hpp"
#include "jellium/error.hpp"
#include "jellium/finite_gas.hpp"

namespace jellium::cli {

namespace {

// Stream ids. Task t of the primary population uses (seed, t); a second
// population in the same run is offset so the two never share a stream.
constexpr std::uint64_t kSecondary = 1ULL << 40;
constexpr std::uint64_t kPilotStream = ~0ULL;
constexpr std::uint64_t kSerialStream = ~0ULL - 1;

constexpr long long kPilotAttempts = 4000;
constexpr double kPilotAcceptance = 2e-3;

struct Chunk {
  long long first;
  long long count;
};

std::vector<Chunk> split(long long total, long long chunk) {
  std::vector<Chunk> out;
  for (long long first = 0; first < total; first += chunk) out.push_back({first, std::min(chunk, total - first)});
  return out;
}

// Runs fn(task) for every task on a small pool. Results come back in task
// order whatever the worker count, which is what keeps outputs identical
// across parallelism settings.
template <class R, class F>
std::vector<R> run_tasks(std::size_t tasks, int workers, F fn) {
  std::vector<std::optional<R>> slots(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto body = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) return;
      try {
        slots[t].emplace(fn(t));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t extra = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), tasks);
  for (std::size_t w = 1; w < extra; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(tasks);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& body) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << body;
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    names_.push_back(name);
    sizes_.push_back(body.size());
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Json listing() const {
    Json a = Json::array();
    for (std::size_t i = 0; i < names_.size(); ++i) a.push_back({{"path", names_[i]}, {"bytes", sizes_[i]}});
    return a;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::vector<std::size_t> sizes_;
};

std::string describe_strategy(LimitStrategy s) { return to_string(s); }

// Prepared sampler for one limit population; built once, then shared by all
// tasks (every member is immutable after construction).
class LimitPlan {
 public:
  LimitPlan(const LimitSource& source, int k, Rng& pilot) : source_(source), k_(k) {
    if (!source.depth) {
      if (!std::holds_alternative<HalfWell>(source.family.shape)) {
        throw ConfigInvalid("/params", "a depth is required unless the family is HalfWell");
      }
      method_ = "halfwell-exact";
      return;
    }
    process_.emplace(source.family, *source.depth);
    const auto requested = source.options.strategy;
    if (std::holds_alternative<HalfWell>(source.family.shape) &&
        (requested == LimitStrategy::Auto || requested == LimitStrategy::Transfer)) {
      method_ = "halfwell-exact-depth";
      return;
    }
    resolved_ = process_->resolve(requested, pilot);
    method_ = describe_strategy(resolved_);
    if (resolved_ == LimitStrategy::Transfer) transfer_.emplace(process_->product(), k, source.options.grid_points);
  }

  const std::string& method() const noexcept { return method_; }

  std::vector<TopKSample> draw(long long count, Rng& rng) const {
    std::vector<TopKSample> out;
    if (!process_) {
      const auto& h = std::get<HalfWell>(source_.family.shape);
      for (long long s = 0; s < count; ++s) {
        out.push_back(sample_halfwell_topk(h.lambda, source_.family.beta, k_, source_.eps, rng));
      }
      return out;
    }
    if (transfer_) {
      for (long long s = 0; s < count; ++s) out.push_back({transfer_->sample(rng), process_->depth()});
      return out;
    }
    LimitOptions options = source_.options;
    options.strategy = method_ == "halfwell-exact-depth" ? LimitStrategy::Auto : resolved_;
    return process_->sample(k_, count, rng, options);
  }

 private:
  LimitSource source_;
  int k_;
  std::string method_;
  LimitStrategy resolved_ = LimitStrategy::Auto;
  std::optional<LimitProcess> process_;
  std::optional<TransferSampler> transfer_;
};

std::vector<TopKSample> draw_population(const LimitPlan& plan, long long total, const ExperimentConfig& c,
                                        std::uint64_t offset) {
  const auto chunks = split(total, c.chunk);
  auto parts = run_tasks<std::vector<TopKSample>>(chunks.size(), c.parallelism, [&](std::size_t t) {
    Rng rng(c.seed, offset + t);
    return plan.draw(chunks[t].count, rng);
  });
  std::vector<TopKSample> out;
  out.reserve(static_cast<std::size_t>(total));
  for (auto& p : parts) {
    for (auto& s : p) out.push_back(std::move(s));
  }
  return out;
}

std::string topk_csv(const std::vector<TopKSample>& draws) {
  std::ostringstream os;
  CsvWriter w(os, {"sample_id", "j", "x", "depth_m"});
  for (std::size_t s = 0; s < draws.size(); ++s) {
    for (std::size_t j = 0; j < draws[s].values.size(); ++j) {
      w.field(static_cast<long long>(s)).field(static_cast<long long>(j + 1)).field(draws[s].values[j]);
      w.field(draws[s].depth).end_row();
    }
  }
  return os.str();
}

std::string ecdf_csv(const EmpiricalDistribution& e) {
  std::ostringstream os;
  CsvWriter w(os, {"x", "F"});
  const auto x = e.samples();
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i + 1 < x.size() && x[i + 1] == x[i]) continue;
    w.field(x[i]).field(static_cast<double>(i + 1) / n).end_row();
  }
  return os.str();
}

std::vector<double> column(const std::vector<TopKSample>& draws, int j) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.values.at(static_cast<std::size_t>(j - 1)));
  return out;
}

double expected_tail_coefficient(const LimitFamily& f, double gamma_hypothesis) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SquaredGamma>) {
          return f.beta / s.gamma;
        } else {
          (void)gamma_hypothesis;
          return f.beta * s.lambda;
        }
      },
      f.shape);
}

Json run_sample_gas(const SampleGasParams& p, const ExperimentConfig& c, Artifacts& out) {
  const FiniteGas gas(p.gas.bg, p.gas.params);
  GasMethod method = p.method;
  double pilot = -1.0;
  if (method == GasMethod::Auto) {
    Rng rng(c.seed, kPilotStream);
    std::vector<double> scratch;
    long long ok = 0;
    for (long long a = 0; a < kPilotAttempts; ++a) ok += gas.product().try_ordered(rng, scratch);
    pilot = static_cast<double>(ok) / kPilotAttempts;
    method = pilot >= kPilotAcceptance ? GasMethod::Rejection : GasMethod::Gibbs;
  }
  struct Part {
    std::vector<Configuration> configs;
    long long attempts = 0;
  };
  const auto chunks = split(p.samples, c.chunk);
  const auto parts = run_tasks<Part>(chunks.size(), c.parallelism, [&](std::size_t t) {
    Rng rng(c.seed, t);
    Part part;
    if (method == GasMethod::Rejection) {
      for (long long s = 0; s < chunks[t].count; ++s) {
        RejectionDraw d = sample_gas_rejection(gas, rng, p.max_attempts);
        part.attempts += d.attempts;
        part.configs.push_back(std::move(d.config));
      }
    } else {
      GibbsOptions g;
      g.burn_in = p.burn_in;
      g.thin = p.thin;
      g.sweeps = p.burn_in + chunks[t].count * p.thin;
      part.configs = sample_gas_gibbs(gas, rng, g);
      part.configs.resize(static_cast<std::size_t>(chunks[t].count));
    }
    return part;
  });

  std::ostringstream os;
  CsvWriter w(os, {"sample_id", "k", "x"});
  long long id = 0;
  long long attempts = 0;
  double energy = 0.0;
  double top = 0.0;
  for (const auto& part : parts) {
    attempts += part.attempts;
    for (const auto& cfg : part.configs) {
      for (std::size_t k = 0; k < cfg.positions.size(); ++k) {
        w.field(id).field(static_cast<long long>(k + 1)).field(cfg.positions[k]).end_row();
      }
      energy += cfg.energy;
      top += cfg.positions.front();
      ++id;
    }
  }
  out.write("samples.csv", os.str());
  Json side{{"method", method == GasMethod::Rejection ? "rejection" : "gibbs"},
            {"samples", id},
            {"mean_energy", energy / static_cast<double>(id)},
            {"mean_x1", top / static_cast<double>(id)}};
  if (method == GasMethod::Rejection) {
    side["attempts"] = attempts;
    side["acceptance_rate"] = static_cast<double>(id) / static_cast<double>(attempts);
  }
  if (pilot >= 0) side["pilot_acceptance"] = pilot;
  out.write_json("sample_gas.json", side);
  return side;
}

Json run_sample_limit(const SampleLimitParams& p, const ExperimentConfig& c, Artifacts& out) {
  Rng pilot(c.seed, kPilotStream);
  const LimitPlan plan(p.source, p.k, pilot);
  const auto draws = draw_population(plan, p.samples, c, 0);
  out.write("topk.csv", topk_csv(draws));
  Json side{{"family", describe(p.source.family)}, {"method", plan.method()}, {"samples", draws.size()}};
  Json means = Json::array();
  for (int j = 1; j <= p.k; ++j) means.push_back(mean_with_error(column(draws, j)).mean);
  side["mean"] = means;
  out.write_json("sample_limit.json", side);
  return side;
}

Json run_renyi(const RenyiCheckParams& p, const ExperimentConfig& c, Artifacts& out) {
  struct Part {
    std::vector<TopKSample> direct;
    std::vector<TopKSample> renyi;
    ConditionalSampler sampler;
  };
  const auto chunks = split(p.samples, c.chunk);
  auto parts = run_tasks<Part>(chunks.size(), c.parallelism, [&](std::size_t t) {
    Part part{{}, {}, ConditionalSampler(p.spec, p.strategy)};
    Rng direct_rng(c.seed, t);
    Rng renyi_rng(c.seed, kSecondary + t);
    for (long long s = 0; s < chunks[t].count; ++s) {
      part.direct.push_back(part.sampler.sample(direct_rng, p.max_attempts));
      part.renyi.push_back(sample_renyi_topk(p.spec, renyi_rng));
    }
    return part;
  });
  std::vector<TopKSample> direct;
  std::vector<TopKSample> renyi;
  for (std::size_t t = 0; t < parts.size(); ++t) {
    if (t > 0) parts.front().sampler.absorb(parts[t].sampler);
    for (auto& s : parts[t].direct) direct.push_back(std::move(s));
    for (auto& s : parts[t].renyi) renyi.push_back(std::move(s));
  }
  out.write("direct_topk.csv", topk_csv(direct));
  out.write("renyi_topk.csv", topk_csv(renyi));

  const auto n = static_cast<std::size_t>(p.samples);
  const double band = dkw_band(n, n, p.delta);
  const auto moments = conditional_moments(p.spec);
  Json rows = Json::array();
  bool pass = true;
  for (int j = 1; j <= p.spec.k; ++j) {
    const EmpiricalDistribution a(column(direct, j));
    const EmpiricalDistribution b(column(renyi, j));
    const double ks = ks_statistic(a, b);
    pass = pass && ks <= band;
    rows.push_back({{"j", j},
                    {"ks", ks},
                    {"mean_direct", a.mean()},
                    {"mean_renyi", b.mean()},
                    {"mean_exact", moments[static_cast<std::size_t>(j - 1)].mean},
                    {"variance_exact", moments[static_cast<std::size_t>(j - 1)].variance}});
  }
  const ConditionalReport r = parts.front().sampler.report();
  Json side{{"verdict", pass ? "pass" : "fail"},
            {"band", band},
            {"delta", p.delta},
            {"coordinates", rows},
            {"report", {{"event_prob", r.event_prob}, {"accepted", r.accepted}, {"attempted", r.attempted}}}};
  out.write_json("renyi_check.json", side);
  return side;
}

Json run_tail(const TailScanParams& p, const ExperimentConfig& c, Artifacts& out) {
  Rng pilot(c.seed, kPilotStream);
  const LimitPlan plan(p.source, 1, pilot);
  const EmpiricalDistribution e(column(draw_population(plan, p.samples, c, 0), 1));
  const TailFit fit = tail_exponent_fit(e, p.gamma_hypothesis, p.window);
  const double expected = expected_tail_coefficient(p.source.family, p.gamma_hypothesis);
  const auto corr = fit.correction(expected);
  std::ostringstream os;
  CsvWriter w(os, {"t", "minus_log_survival", "c_t"});
  for (std::size_t i = 0; i < fit.profile.size(); ++i) {
    w.field(fit.profile[i].t).field(fit.profile[i].minus_log_survival).field(corr[i]).end_row();
  }
  out.write("tail_profile.csv", os.str());
  Json side{{"family", describe(p.source.family)},
            {"method", plan.method()},
            {"gamma_hypothesis", p.gamma_hypothesis},
            {"coefficient", fit.coefficient},
            {"intercept", fit.intercept},
            {"expected_coefficient", expected},
            {"relative_error", fit.coefficient / expected - 1.0},
            {"r_squared", fit.r_squared},
            {"window", {{"survival_lo", p.window.survival_lo}, {"survival_hi", p.window.survival_hi}}},
            {"t_lo", fit.t_lo},
            {"t_hi", fit.t_hi}};
  out.write_json("tail_fit.json", side);
  return side;
}

Json run_dominance(const DominanceCheckParams& p, const ExperimentConfig& c, Artifacts& out) {
  Rng pilot(c.seed, kPilotStream);
  const LimitPlan plan_p(p.p, p.coordinate, pilot);
  const LimitPlan plan_q(p.q, p.coordinate, pilot);
  const EmpiricalDistribution ep(column(draw_population(plan_p, p.samples, c, 0), p.coordinate));
  const EmpiricalDistribution eq(column(draw_population(plan_q, p.samples, c, kSecondary), p.coordinate));
  const DominanceResult r = dominance_check(ep, eq, p.delta);
  out.write("ecdf_p.csv", ecdf_csv(ep));
  out.write("ecdf_q.csv", ecdf_csv(eq));
  Json side{{"verdict", to_string(r.verdict)},
            {"band", r.band},
            {"max_excess_q", r.max_excess_q},
            {"max_excess_p", r.max_excess_p},
            {"p", {{"family", describe(p.p.family)}, {"method", plan_p.method()}, {"mean", ep.mean()}}},
            {"q", {{"family", describe(p.q.family)}, {"method", plan_q.method()}, {"mean", eq.mean()}}}};
  out.write_json("dominance.json", side);
  return side;
}

Json run_gumbel(const GumbelCheckParams& p, const ExperimentConfig& c, Artifacts& out) {
  const auto chunks = split(p.samples, c.chunk);
  const auto parts = run_tasks<std::vector<double>>(chunks.size(), c.parallelism, [&](std::size_t t) {
    Rng rng(c.seed, t);
    const EmpiricalDistribution e = gumbel_statistic(p.chi, rng, chunks[t].count, p.eps);
    return std::vector<double>(e.samples().begin(), e.samples().end());
  });
  std::vector<double> all;
  std::ostringstream os;
  CsvWriter w(os, {"sample_id", "x"});
  for (const auto& part : parts) {
    for (double x : part) {
      w.field(static_cast<long long>(all.size())).field(x).end_row();
      all.push_back(x);
    }
  }
  out.write("gumbel_samples.csv", os.str());
  const double euler = boost::math::constants::euler<double>();
  const EmpiricalDistribution e(std::move(all));
  const double ks = ks_statistic(e, [euler](double x) { return std::exp(-std::exp(-(x + euler))); });
  Json side{{"chi", p.chi},
            {"ks", ks},
            {"threshold", p.threshold},
            {"verdict", ks < p.threshold ? "pass" : "fail"},
            {"expected_mean", gumbel_mean(p.chi)},
            {"centered_mean", e.mean()}};
  out.write_json("gumbel.json", side);
  return side;
}

Json run_convergence(const ConvergenceTableParams& p, const ExperimentConfig& c, Artifacts& out) {
  Rng rng(c.seed, kSerialStream);
  const DistanceTable t = finite_to_limit_distance(p.regime, p.k, p.n_list, p.samples, rng, p.options);
  std::ostringstream os;
  CsvWriter w(os, {"row", "n", "j", "ks", "band", "method"});
  for (int j = 1; j <= t.k; ++j) {
    w.field("null").field(0).field(j).field(t.null_ks[static_cast<std::size_t>(j - 1)]).field(t.band);
    w.field(t.limit_method).end_row();
  }
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    for (int j = 1; j <= t.k; ++j) {
      w.field("finite").field(r.n).field(j).field(r.ks[static_cast<std::size_t>(j - 1)]).field(t.band);
      w.field(r.finite_method).end_row();
    }
    rows.push_back({{"n", r.n}, {"ks", r.ks}, {"method", r.finite_method}, {"pilot_acceptance", r.acceptance}});
  }
  out.write("convergence.csv", os.str());
  bool last_in_band = !t.rows.empty();
  if (last_in_band) {
    for (double ks : t.rows.back().ks) last_in_band = last_in_band && ks <= t.band;
  }
  Json side{{"regime", to_string(p.regime.regime)},
            {"limit", describe(regime_limit(p.regime))},
            {"limit_method", t.limit_method},
            {"band", t.band},
            {"null_ks", t.null_ks},
            {"rows", rows},
            {"largest_n_within_band", last_in_band}};
  out.write_json("convergence.json", side);
  return side;
}

Json run_partition(const PartitionEstimateParams& p, const ExperimentConfig& c, Artifacts& out) {
  const FiniteGas gas(p.gas.bg, p.gas.params);
  Rng rng(c.seed, kSerialStream);
  const PartitionEstimate e = estimate_log_partition(gas, rng, p.samples);
  Json side{{"log_z", e.log_z},
            {"std_error", e.std_error},
            {"log_normalizer_sum", e.log_normalizer_sum},
            {"order_probability", e.order_probability},
            {"attempts", e.attempts},
            {"ordered", e.ordered}};
  out.write_json("partition.json", side);
  return side;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Artifacts out(resolve_output_dir(config.output_dir));
  const Json summary = std::visit(
      [&](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SampleGasParams>) return run_sample_gas(p, config, out);
        if constexpr (std::is_same_v<T, SampleLimitParams>) return run_sample_limit(p, config, out);
        if constexpr (std::is_same_v<T, RenyiCheckParams>) return run_renyi(p, config, out);
        if constexpr (std::is_same_v<T, TailScanParams>) return run_tail(p, config, out);
        if constexpr (std::is_same_v<T, DominanceCheckParams>) return run_dominance(p, config, out);
        if constexpr (std::is_same_v<T, GumbelCheckParams>) return run_gumbel(p, config, out);
        if constexpr (std::is_same_v<T, ConvergenceTableParams>) return run_convergence(p, config, out);
        if constexpr (std::is_same_v<T, PartitionEstimateParams>) return run_partition(p, config, out);
      },
      config.params);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Json manifest{{"tool", "jellium"},
                      {"version", version()},
                      {"experiment", to_string(config.experiment)},
                      {"seed", config.seed},
                      {"parallelism", config.parallelism},
                      {"chunk", config.chunk},
                      {"config", config.source},
                      {"artifacts", out.listing()},
                      {"summary", summary},
                      {"wall_time_seconds", wall}};
  out.write_json("manifest.json", manifest);
  return {out.dir(), out.names(), summary};
}

}  // namespace jellium::cli

#include "jellium/ordered.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "jellium/error.hpp"

namespace jellium {

namespace {

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// log of int_0^t exp(s u) du.
double log_partial(double s, double t) {
  if (t <= 0) return -kInf;
  const double st = s * t;
  if (std::abs(st) < 1e-10) return std::log(t) + 0.5 * st;
  if (s > 0) return st + std::log(-std::expm1(-st)) - std::log(s);
  return std::log(std::expm1(st) / s);
}

// Distance from the mode at which -beta V has dropped by `depth` (or the wall).
double reach(const ParticleLaw& law, double direction, double depth) {
  const double m = law.mode();
  const double wall = direction < 0 ? law.lower() : law.upper();
  const double hm = -law.beta() * law.potential()(m);
  double d = 1e-6 * std::max(1.0, std::abs(m));
  for (int it = 0; it < 4000; ++it) {
    const double x = m + direction * d;
    if (direction < 0 ? x <= wall : x >= wall) return std::abs(wall - m);
    if (-law.beta() * law.potential()(x) < hm - depth) return d;
    d *= 2;
  }
  throw NonNormalizableDensity("density does not decay");
}

}  // namespace

OrderedProduct::OrderedProduct(std::vector<ParticleLaw> laws) : laws_(std::move(laws)) {
  if (laws_.empty()) throw IndexOutOfRange("an ordered product needs at least one law");
}

bool OrderedProduct::try_ordered(Rng& rng, std::vector<double>& out) const {
  out.resize(laws_.size());
  double previous = kInf;
  for (std::size_t i = 0; i < laws_.size(); ++i) {
    const double y = laws_[i].sample(rng);
    if (y > previous) return false;
    out[i] = y;
    previous = y;
  }
  return true;
}

std::vector<double> OrderedProduct::sample_rejection(Rng& rng, long long max_attempts, long long* attempts) const {
  std::vector<double> out;
  for (long long a = 1; a <= max_attempts; ++a) {
    if (try_ordered(rng, out)) {
      if (attempts) *attempts = a;
      return out;
    }
  }
  if (attempts) *attempts = max_attempts;
  throw MaxAttemptsExceeded("no ordered draw within the attempt budget; switch to Gibbs", max_attempts);
}

std::vector<double> OrderedProduct::modes() const {
  std::vector<double> m;
  m.reserve(laws_.size());
  for (const auto& law : laws_) m.push_back(law.mode());
  std::sort(m.begin(), m.end(), std::greater<>());
  return m;
}

GibbsChain::GibbsChain(const OrderedProduct& product, std::vector<double> initial)
    : product_(&product), state_(std::move(initial)) {
  if (state_.empty()) state_ = product.modes();
  if (static_cast<int>(state_.size()) != product.size()) {
    throw IndexOutOfRange("initial state has the wrong number of particles");
  }
  std::sort(state_.begin(), state_.end(), std::greater<>());
  for (int i = 1; i <= product.size(); ++i) {
    double& x = state_[static_cast<std::size_t>(i - 1)];
    x = std::clamp(x, product.law(i).lower(), product.law(i).upper());
  }
  std::sort(state_.begin(), state_.end(), std::greater<>());
}

void GibbsChain::sweep(Rng& rng) {
  const std::size_t m = state_.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double hi = k > 0 ? state_[k - 1] : kInf;
    const double lo = k + 1 < m ? state_[k + 1] : -kInf;
    state_[k] = product_->law(static_cast<int>(k) + 1).sample_truncated(lo, hi, rng, scratch_);
  }
}

TransferSampler::TransferSampler(const OrderedProduct& product, int keep, int grid_points) {
  const int m = product.size();
  if (keep < 1 || keep > m) throw IndexOutOfRange("transfer sampler keeps between 1 and m tables");
  if (grid_points < 3) throw IndexOutOfRange("transfer grid needs at least three points");

  // On the left, conditioning can push the lowest particle down by at most
  // log(1/P(order)) nats, for which lgamma(m+1) is a generous stand-in when the
  // laws come in the right order (true for every product built here). The
  // tails there are at least as steep as the bulk, so the extra reach is
  // cheap. On the right only Y_1 matters; its grid end is checked after the
  // recursion and widened until the top density has fallen by kRightDrop.
  constexpr double kRightDrop = 36.0;
  const double left_depth = 40.0 + std::lgamma(m + 1.0);
  double lo = kInf;
  double hi = -kInf;
  for (int i = 1; i <= m; ++i) {
    const ParticleLaw& law = product.law(i);
    lo = std::min(lo, law.mode() - reach(law, -1.0, left_depth));
    hi = std::max(hi, law.mode() + reach(law, 1.0, kRightDrop + 4.0));
  }
  for (int attempt = 0; attempt < 12; ++attempt) {
    build(product, keep, grid_points, lo, hi);
    const std::vector<double>& top = tables_.front().log_q;
    const double peak = *std::max_element(top.begin(), top.end());
    if (top.back() < peak - kRightDrop || hi >= product.law(1).upper()) return;
    hi = std::min(product.law(1).upper(), hi + (hi - lo));
  }
  throw NonNormalizableDensity("transfer grid could not cover the right tail");
}

void TransferSampler::build(const OrderedProduct& product, int keep, int grid_points, double lo, double hi) {
  const int m = product.size();
  cells_ = static_cast<std::size_t>(grid_points - 1);
  x0_ = lo;
  dx_ = (hi - lo) / static_cast<double>(cells_);
  const std::size_t g = cells_ + 1;

  std::vector<double> log_h(g, 0.0);  // log H_{j+1}, starting from H_{m+1} = 1
  std::vector<double> log_q(g);
  std::vector<double> log_cum(g);
  double log_z_sum = 0.0;
  tables_.assign(static_cast<std::size_t>(keep), Table{});
  for (int j = m; j >= 1; --j) {
    const ParticleLaw& law = product.law(j);
    const double beta = law.beta();
    double log_z = -kInf;
    for (std::size_t p = 0; p < g; ++p) {
      const double x = x0_ + dx_ * static_cast<double>(p);
      log_q[p] = (x < law.lower() || x > law.upper()) ? -kInf : -beta * law.potential()(x);
    }
    // Normalizer of f_j on the same grid, so that log P(order) is consistent.
    for (std::size_t p = 0; p + 1 < g; ++p) {
      const double a = log_q[p];
      const double b = log_q[p + 1];
      if (a == -kInf || b == -kInf) continue;
      log_z = log_add(log_z, a + log_partial((b - a) / dx_, dx_));
    }
    log_z_sum += log_z;
    for (std::size_t p = 0; p < g; ++p) log_q[p] += log_h[p];
    log_cum[0] = -kInf;
    for (std::size_t p = 0; p + 1 < g; ++p) {
      const double a = log_q[p];
      const double b = log_q[p + 1];
      double cell = -kInf;
      if (a != -kInf && b != -kInf) cell = a + log_partial((b - a) / dx_, dx_);
      log_cum[p + 1] = log_add(log_cum[p], cell);
    }
    if (j <= keep) tables_[static_cast<std::size_t>(j - 1)] = Table{log_q, log_cum};
    log_h = log_cum;
  }
  log_order_prob_ = log_h.back() - log_z_sum;
}

double TransferSampler::log_cum_at(const Table& t, double x) const {
  if (x <= x0_) return -kInf;
  const double u = (x - x0_) / dx_;
  if (u >= static_cast<double>(cells_)) return t.log_cum.back();
  const std::size_t p = static_cast<std::size_t>(u);
  const double a = t.log_q[p];
  const double b = t.log_q[p + 1];
  if (a == -kInf || b == -kInf) return t.log_cum[p];
  const double s = (b - a) / dx_;
  return log_add(t.log_cum[p], a + log_partial(s, x - (x0_ + dx_ * static_cast<double>(p))));
}

double TransferSampler::draw_below(const Table& t, double upper, Rng& rng) const {
  const double total = log_cum_at(t, upper);
  if (total == -kInf) throw NonNormalizableDensity("no grid mass below the previous particle");
  const double target = total + std::log(rng.uniform_pos());
  // Last grid point whose cumulative mass does not exceed the target.
  auto it = std::upper_bound(t.log_cum.begin(), t.log_cum.end(), target);
  std::size_t p = static_cast<std::size_t>(it - t.log_cum.begin());
  p = p == 0 ? 0 : p - 1;
  if (p >= cells_) p = cells_ - 1;
  const double base = x0_ + dx_ * static_cast<double>(p);
  const double a = t.log_q[p];
  const double b = t.log_q[p + 1];
  double offset;
  if (a == -kInf || b == -kInf) {
    offset = 0.5 * dx_;
  } else {
    const double rest = t.log_cum[p] == -kInf ? target : target + std::log1p(-std::exp(t.log_cum[p] - target));
    const double r = std::exp(rest - a);  // int_0^offset e^{s u} du
    const double s = (b - a) / dx_;
    if (std::abs(s * r) < 1e-12) {
      offset = r;
    } else {
      const double arg = 1.0 + s * r;
      offset = arg > 0 ? std::log(arg) / s : dx_;
    }
    offset = std::clamp(offset, 0.0, dx_);
  }
  return std::min(base + offset, upper);
}

std::vector<double> TransferSampler::sample(Rng& rng) const {
  std::vector<double> out(tables_.size());
  double upper = kInf;
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    out[j] = draw_below(tables_[j], upper, rng);
    upper = out[j];
  }
  return out;
}

}  // namespace jellium

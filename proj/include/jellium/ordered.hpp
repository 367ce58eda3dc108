#pragma once

#include <vector>

#include "jellium/logconcave.hpp"
#include "jellium/rng.hpp"

namespace jellium {

// Independent Y_1, ..., Y_m with log-concave laws, conditioned on
// Y_m <= ... <= Y_1. This is the common core of the finite gas and of the
// depth-m approximations of the edge limits.
class OrderedProduct {
 public:
  explicit OrderedProduct(std::vector<ParticleLaw> laws);

  int size() const noexcept { return static_cast<int>(laws_.size()); }
  // 1-based, matching the particle index i of V_i.
  const ParticleLaw& law(int i) const { return laws_.at(static_cast<std::size_t>(i - 1)); }

  // One attempt of plain rejection, drawing Y_1, Y_2, ... and stopping at the
  // first ordering violation. On success `out` holds the descending vector.
  bool try_ordered(Rng& rng, std::vector<double>& out) const;

  // Repeats try_ordered. Throws MaxAttemptsExceeded after `max_attempts`.
  std::vector<double> sample_rejection(Rng& rng, long long max_attempts, long long* attempts = nullptr) const;

  // Descending vector of the modes, a natural starting state for Gibbs.
  std::vector<double> modes() const;

 private:
  std::vector<ParticleLaw> laws_;
};

// Systematic-scan Gibbs sampler on the ordered vector: coordinate k is redrawn
// from its law truncated to [x_(k+1), x_(k-1)].
class GibbsChain {
 public:
  GibbsChain(const OrderedProduct& product, std::vector<double> initial);

  void sweep(Rng& rng);
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  const OrderedProduct* product_;
  std::vector<double> state_;
  ArsEnvelope scratch_;
};

// Grid recursion for the top of an ordered product. With H_{m+1} = 1 and
// H_j(y) = int_{-inf}^y f_j(z) H_{j+1}(z) dz, the vector (Y_1, ..., Y_k) given
// the ordering is drawn sequentially: Y_j has density f_j H_{j+1} on
// (-inf, Y_{j-1}]. Within each grid cell f_j H_{j+1} is interpolated
// log-linearly, so the error is second order in the cell width. Only the top
// `keep` tables are stored.
class TransferSampler {
 public:
  TransferSampler(const OrderedProduct& product, int keep, int grid_points = 20001);

  // Descending top-`keep` vector.
  std::vector<double> sample(Rng& rng) const;

  // log P(Y_m <= ... <= Y_1), a by-product of the recursion.
  double log_order_probability() const noexcept { return log_order_prob_; }
  double grid_lower() const noexcept { return x0_; }
  double grid_upper() const noexcept { return x0_ + dx_ * static_cast<double>(cells_); }

 private:
  struct Table {
    std::vector<double> log_q;    // log f_j H_{j+1} at grid points
    std::vector<double> log_cum;  // log of the integral up to each grid point
  };
  void build(const OrderedProduct& product, int keep, int grid_points, double lo, double hi);
  double draw_below(const Table& t, double upper, Rng& rng) const;
  double log_cum_at(const Table& t, double x) const;

  double x0_ = 0.0;
  double dx_ = 0.0;
  std::size_t cells_ = 0;
  std::vector<Table> tables_;  // tables_[j] is for Y_{j+1}
  double log_order_prob_ = 0.0;
};

}  // namespace jellium

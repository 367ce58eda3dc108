#pragma once

#include <vector>

#include "jellium/rng.hpp"
#include "jellium/types.hpp"

namespace jellium {

// Tangent-line envelope for adaptive rejection sampling of a log-concave
// density e^h on [lo, hi]. Points are kept sorted; each carries h and h'.
class ArsEnvelope {
 public:
  struct Node {
    double x;
    double h;
    double dh;
  };

  void reset(double lo, double hi);
  // Adds a node, keeping the list sorted. Returns false once `cap` is reached.
  bool add(Node node, std::size_t cap);
  // Recomputes segment boundaries and cumulative masses.
  void rebuild();

  // Draws x from the envelope and reports log(envelope(x)).
  double draw(Rng& rng, double* log_envelope) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  double log_mass() const noexcept { return log_total_; }

 private:
  double lo_ = -kInf;
  double hi_ = kInf;
  std::vector<Node> nodes_;
  std::vector<double> cuts_;      // size nodes_+1, cuts_[0] = lo_, back = hi_
  std::vector<double> log_mass_;  // per segment
  std::vector<double> cum_;       // normalized cumulative masses
  double log_total_ = 0.0;
};

// The law with density proportional to exp(-beta V) on [lo, hi] for a convex
// V. Construction locates the mode, a length scale on each side, and a frozen
// envelope reused for every unrestricted draw; the object is then immutable.
class ParticleLaw {
 public:
  ParticleLaw(Potential1D potential, double beta, double lo = -kInf, double hi = kInf);

  double mode() const noexcept { return mode_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }
  double beta() const noexcept { return beta_; }
  const Potential1D& potential() const noexcept { return potential_; }

  // log of int_lo^hi exp(-beta V(x)) dx.
  double log_normalizer() const;

  double sample(Rng& rng) const;
  // A draw restricted to [a, b] intersected with the support, using a fresh
  // envelope built in `scratch`. Throws NonNormalizableDensity for empty
  // windows.
  double sample_truncated(double a, double b, Rng& rng, ArsEnvelope& scratch) const;

 private:
  double h(double x) const { return -beta_ * potential_(x); }
  ArsEnvelope::Node node(double x) const;
  void seed_envelope(ArsEnvelope& env, double a, double b) const;
  double run_ars(ArsEnvelope& env, Rng& rng, std::size_t cap) const;

  Potential1D potential_;
  double beta_;
  double lo_;
  double hi_;
  double mode_ = 0.0;
  double h_mode_ = 0.0;
  double left_step_ = 0.0;   // h(mode - left_step) <= h(mode) - 1, or the wall
  double right_step_ = 0.0;
  ArsEnvelope frozen_;
};

}  // namespace jellium

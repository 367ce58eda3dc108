#include "jellium/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace jellium {

double standard_normal(Rng& rng) {
  // uniform_pos is in (0, 1]; u == 1 would map to +inf, so clip that one
  // 2^-53 event to the largest finite quantile the grid can express.
  const double u = rng.uniform_pos();
  if (u >= 1.0) return 8.2;
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace jellium

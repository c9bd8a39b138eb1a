#include "ccsim/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <limits>
#include <stdexcept>

namespace ccsim {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_quantile: probability outside [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double erf_inverse(double y) {
  if (!(y > -1.0 && y < 1.0)) throw std::domain_error("erf_inverse: argument outside (-1, 1)");
  return boost::math::erf_inv(y);
}

}  // namespace ccsim

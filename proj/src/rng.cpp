#include "elimtas/rng.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace elimtas {

double RandomStream::standard_normal() {
    // Phi^{-1}(u) = -sqrt(2) * erfc^{-1}(2u)
    const double u = uniform_open();
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace elimtas

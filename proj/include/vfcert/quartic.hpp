#pragma once

#include <vector>

#include "vfcert/errors.hpp"

namespace vfcert {

// Real roots of J + K*v + L*v^2 + M*v^3 + N*v^4 via Durand-Kerner
// simultaneous iteration, Newton-polished on the original coefficients.
//
// Accepted roots satisfy |p(r)| <= 1e-8; complex-pair iterates with
// |Im| > 1e-7 * (1 + |Re|) are discarded.  Roots are returned sorted and
// deduplicated.  Throws ArgumentError for N == 0 and SolverError (message
// carries the best iterates) when the iteration fails to converge or a
// real root cannot be polished below the residual threshold.
std::vector<double> quartic_real_roots(double J, double K, double L, double M, double N);

} // namespace vfcert

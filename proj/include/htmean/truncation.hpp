#pragma once

#include "htmean/space.hpp"

namespace htmean {

// (1 ∧ t)/t for t = ||x||; trunc_coeff(0) := 1 (any value works there since
// the product with the zero vector is zero; 1 keeps the range in [0,1]).
double trunc_coeff(double t);

// Projects x onto the ball of radius 1/lambda: clip(x) = trunc_coeff(lambda*||x||) * x.
// Computed as coefficient * vector, and re-scaled until the measured norm is
// inside the ball so that clip(clip(x)) == clip(x) exactly.
Vec clip(const SpaceSpec& space, const Vec& x, double lambda);

// Upper bound on 1 - (1 ∧ t)/t: t^k/(k+1) * (k/(k+1))^k, for t >= 0, k > 0.
double kth_truncation_bound(double t, double k);

}  // namespace htmean

#include "htmean/truncation.hpp"

#include <cmath>
#include <stdexcept>

namespace htmean {

double trunc_coeff(double t) {
  if (std::isnan(t) || t < 0.0)
    throw std::invalid_argument("trunc_coeff: need t >= 0");
  if (t <= 1.0) return 1.0;
  return 1.0 / t;
}

Vec clip(const SpaceSpec& space, const Vec& x, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("clip: need lambda > 0");
  double t = lambda * norm(space, x);
  if (t <= 1.0) return x;
  Vec y = scale(trunc_coeff(t), x);
  // The scaled vector can land a few ulps outside the ball; keep shrinking
  // until the measured norm is inside so a second clip is an exact no-op.
  for (int pass = 0; pass < 16; ++pass) {
    t = lambda * norm(space, y);
    if (t <= 1.0) break;
    y = scale(trunc_coeff(t), y);
  }
  return y;
}

double kth_truncation_bound(double t, double k) {
  if (std::isnan(t) || t < 0.0)
    throw std::invalid_argument("kth_truncation_bound: need t >= 0");
  if (!(k > 0.0)) throw std::invalid_argument("kth_truncation_bound: need k > 0");
  return std::pow(t, k) / (k + 1.0) * std::pow(k / (k + 1.0), k);
}

}  // namespace htmean

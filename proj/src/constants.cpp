#include "htmean/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace htmean {

double holder_conjugate(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("holder_conjugate: need p > 1");
  return p / (p - 1.0);
}

double k_p(double p) {
  if (!(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("k_p: need p in (1, 2]");
  const double k = p / holder_conjugate(p);  // = p - 1
  // (k/(k+1))^k via exp/log; k^k -> 1 as k -> 0 so the limit p -> 1+ is 1.
  return (1.0 / (k + 1.0)) * std::exp(k * std::log(k / (k + 1.0)));
}

// (e^{2rho} - 2rho - 1) / (2rho)^2, series near 0 to dodge cancellation.
static double exp_quad_factor(double rho) {
  const double t = 2.0 * rho;
  if (t < 1e-3) {
    // sum_{k>=2} t^{k-2}/k!
    return 0.5 + t / 6.0 + t * t / 24.0 + t * t * t / 120.0;
  }
  return (std::expm1(t) - t) / (t * t);
}

double frak_c(const SpaceSpec& space, double p, double rho) {
  if (!(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("frak_c: need p in (1, 2]");
  if (!(rho > 0.0)) throw std::invalid_argument("frak_c: need rho > 0");
  const double factor = exp_quad_factor(rho);
  const double scale = is_hilbert(space) ? std::pow(2.0, p - 1.0)
                                         : std::pow(2.0, p + 1.0);
  return scale * factor;
}

double frak_c(const SpaceSpec& space, double p) {
  return frak_c(space, p, 1.0 / beta(space));
}

double c_p_combined(const SpaceSpec& space, double p) {
  return frak_c(space, p) + k_p(p) * std::pow(2.0, p - 1.0) / beta(space);
}

double frak_b(const SpaceSpec& space, double p) {
  const double core =
      beta(space) * frak_c(space, p) + k_p(p) * std::pow(2.0, p - 1.0);
  return (std::pow(2.0, (p - 1.0) / p) + std::pow(2.0, 1.0 / p)) *
         std::pow(core, 1.0 / p);
}

double psi(double alpha, double gamma) {
  if (!(gamma > 0.0 && gamma < alpha && alpha < 1.0))
    throw std::invalid_argument("psi: need 0 < gamma < alpha < 1");
  return (1.0 - alpha) * std::log((1.0 - alpha) / (1.0 - gamma)) +
         alpha * std::log(alpha / gamma);
}

double c_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.5))
    throw std::invalid_argument("c_alpha: need alpha in [0, 1/2)");
  return 2.0 * (1.0 - alpha) / (1.0 - 2.0 * alpha);
}

MomentAssumption reduce_big_p(const MomentAssumption& assm) {
  if (!(assm.p > 2.0))
    throw std::invalid_argument("reduce_big_p: assumption already has p <= 2");
  MomentAssumption out;
  out.p = 2.0;
  out.v = std::pow(assm.v, 2.0 / assm.p);
  out.central = assm.central;
  return out;
}

}  // namespace htmean

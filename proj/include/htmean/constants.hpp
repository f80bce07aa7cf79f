#pragma once

#include "htmean/space.hpp"

namespace htmean {

// p-th moment assumption: central means E||X - mu||^p <= v, otherwise the
// raw moment E||X||^p <= v.
struct MomentAssumption {
  double p = 2.0;  // in (1, 2]
  double v = 1.0;  // > 0
  bool central = true;
};

// q = p/(p-1) for p > 1.
double holder_conjugate(double p);

// Truncation-error constant K_p = (1/(p/q+1)) * ((p/q)/(p/q+1))^{p/q} with
// q the Holder conjugate; equals (1/p)((p-1)/p)^{p-1}. Domain p in (1, 2].
double k_p(double p);

// Smoothness constant of the exponential supermartingale construction:
// (e^{2rho} - 2rho - 1)/(2rho)^2 times 2^{p-1} (Hilbert) or 2^{p+1} (other).
double frak_c(const SpaceSpec& space, double p, double rho);
// Same at the default rho = 1/beta.
double frak_c(const SpaceSpec& space, double p);

// C_p = frak_c(space, p) + k_p(p) * 2^{p-1} / beta.
double c_p_combined(const SpaceSpec& space, double p);

// Stitched-width prefactor [2^{(p-1)/p} + 2^{1/p}] * (beta*frak_c + K_p 2^{p-1})^{1/p}.
double frak_b(const SpaceSpec& space, double p);

// Binomial-tail exponent psi(alpha; gamma) = (1-alpha)ln((1-alpha)/(1-gamma))
// + alpha ln(alpha/gamma), for 0 < gamma < alpha < 1.
double psi(double alpha, double gamma);

// Geometric-median aggregation constant C_alpha = 2(1-alpha)/(1-2alpha),
// for alpha in [0, 1/2).
double c_alpha(double alpha);

// Reduce a p > 2 assumption to the p = 2 case: v becomes v^{2/p} (Jensen),
// the central flag is preserved.
MomentAssumption reduce_big_p(const MomentAssumption& assm);

}  // namespace htmean

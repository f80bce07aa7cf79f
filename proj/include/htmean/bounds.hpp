#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "htmean/constants.hpp"
#include "htmean/space.hpp"

namespace htmean {

// Time/confidence parameters shared by the width formulas. delta1 pays for
// the deviation of the truncated mean, delta2 for the naive center; their sum
// must stay below 1. rho = 0 and lambda = 0 mean "unset" (rho defaults to
// 1/beta inside the formulas).
struct BoundQuery {
  int64_t n = 1;
  int64_t k = 0;
  double delta1 = 0.025;
  double delta2 = 0.025;
  double rho = 0.0;
  double lambda = 0.0;

  // Symmetric split delta1 = delta2 = delta/2.
  static BoundQuery split(int64_t n, int64_t k, double delta);
};

// High-probability distance guarantee r(delta, k) for the naive center built
// from k samples.
struct RateFunction {
  enum class Method { SampleMean, GMoM, Constant, Custom };
  Method method = Method::SampleMean;
  double value = 0.0;  // Method::Constant
  std::function<double(double, int64_t)> fn;  // Method::Custom

  static RateFunction sample_mean();
  static RateFunction gmom();
  static RateFunction constant(double r);
  static RateFunction custom(std::function<double(double, int64_t)> fn);

  double operator()(double delta, int64_t k, const MomentAssumption& assm,
                    const SpaceSpec& space) const;
};

// Sample-mean deviation rate 2*beta*v^{1/p} / (delta^{1/p} k^{(p-1)/p}).
double r_sample_mean(double delta, int64_t k, const MomentAssumption& assm,
                     const SpaceSpec& space);

// Geometric-median-of-means rate (11*beta/0.1^{1/p}) v^{1/p}
// ((3.5 ln(1/delta)+1)/k)^{(p-1)/p}; needs k large enough to host the blocks.
double r_gmom(double delta, int64_t k, const MomentAssumption& assm,
              const SpaceSpec& space);

// Width of the line-crossing bound at truncation level q.lambda:
//   lambda^{p-1} (rho beta^2 frak_c(rho) + K_p 2^{p-1}) (v + r^p)
//     + ln(2/delta1) / (lambda rho (n-k)).
// At the default rho = 1/beta this is the usual
//   lambda^{p-1}(beta frak_c + K_p 2^{p-1})(v + r^p) + beta ln(2/delta1)/(lambda(n-k)).
double line_crossing_width(const BoundQuery& q, const MomentAssumption& assm,
                           const SpaceSpec& space, const RateFunction& rate);

// Truncation level that equalizes the two width summands (the level the
// closed-form optimized width is quoted at).
double opt_lambda(const BoundQuery& q, const MomentAssumption& assm,
                  const SpaceSpec& space, const RateFunction& rate);

// 2((beta frak_c + K_p 2^{p-1})(v + r^p))^{1/p} (beta ln(2/delta1)/(n-k))^{(p-1)/p}
// (general rho handled as in line_crossing_width). Equals the line-crossing
// width evaluated at opt_lambda.
double optimized_width(const BoundQuery& q, const MomentAssumption& assm,
                       const SpaceSpec& space, const RateFunction& rate);

// Raw-moment (uncentered) variants with Z = 0, k = 0:
//   width(lambda) = 2 v lambda^{p-1}(beta frak_c + K_p 2^{p-1}) + beta ln(2/delta)/(lambda n).
double noncentral_width(int64_t n, double lambda, double delta,
                        const MomentAssumption& assm, const SpaceSpec& space);

struct LambdaWidth {
  double lambda = 0.0;
  double width = 0.0;
};

LambdaWidth noncentral_opt(int64_t n, double delta,
                           const MomentAssumption& assm,
                           const SpaceSpec& space);

// Riemann zeta via direct series with an Euler-Maclaurin tail; s > 1.
double zeta_s(double s);

// Epoch bookkeeping for the iterated-logarithm (stitched) width.
struct StitchConfig {
  double s = 2.0;
  double zeta_value = 0.0;               // zeta(s)
  std::function<int64_t(int64_t)> k_schedule;  // k(j); default k(j) = j
  int64_t n0 = 2;                        // first n with k(log2(n)) <= n/2

  static StitchConfig make(double s = 2.0,
                           std::function<int64_t(int64_t)> k_schedule = {});
};

// h(j) = (j+1)^s zeta(s).
double stitch_h(const StitchConfig& cfg, int64_t j);

// Smallest n >= 2 with k_schedule(floor(log2 n)) <= n/2.
int64_t stitch_n0(const std::function<int64_t(int64_t)>& k_schedule);

// frak_b(space,p) (v + r_n^p)^{1/p} (beta ln(4 h(j)) / (n - k(j)))^{(p-1)/p}
// with j = floor(log2 n) and r_n = rate(delta/(2 h(j)), k(j)).
double stitched_width(int64_t n, double delta, const StitchConfig& cfg,
                      const MomentAssumption& assm, const SpaceSpec& space,
                      const RateFunction& rate);

// Simulation diagnostic for the deviation e-process: returns M_0..M_N with
//   M_n = 1/2 exp(rho ||xi_n - mu * sum lambda_m|| - V_n),
//   xi_n = sum lambda_m (Trunc(lambda_m Y_m) Y_m + Z_m), Y_m = X_m - Z_m,
//   V_n = (rho^2 beta^2 frak_c(rho) + rho K_p 2^{p-1}) G_n,
//   G_n = sum lambda_m^p (v + ||mu - Z_m||^p).
// rho = 0 requests the default 1/beta.
std::vector<double> eprocess_diag(const std::vector<Vec>& xs,
                                  const std::vector<Vec>& centers,
                                  const std::vector<double>& lambdas,
                                  const Vec& true_mu,
                                  const MomentAssumption& assm,
                                  const SpaceSpec& space, double rho = 0.0);

}  // namespace htmean

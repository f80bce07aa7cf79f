#include "htmean/bounds.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "htmean/estimators.hpp"
#include "htmean/truncation.hpp"

namespace htmean {

BoundQuery BoundQuery::split(int64_t n, int64_t k, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("BoundQuery::split: need delta in (0,1)");
  BoundQuery q;
  q.n = n;
  q.k = k;
  q.delta1 = delta / 2.0;
  q.delta2 = delta / 2.0;
  return q;
}

RateFunction RateFunction::sample_mean() {
  RateFunction r;
  r.method = Method::SampleMean;
  return r;
}

RateFunction RateFunction::gmom() {
  RateFunction r;
  r.method = Method::GMoM;
  return r;
}

RateFunction RateFunction::constant(double value) {
  if (!(value >= 0.0))
    throw std::invalid_argument("RateFunction::constant: need r >= 0");
  RateFunction r;
  r.method = Method::Constant;
  r.value = value;
  return r;
}

RateFunction RateFunction::custom(std::function<double(double, int64_t)> fn) {
  if (!fn) throw std::invalid_argument("RateFunction::custom: empty function");
  RateFunction r;
  r.method = Method::Custom;
  r.fn = std::move(fn);
  return r;
}

double RateFunction::operator()(double delta, int64_t k,
                                const MomentAssumption& assm,
                                const SpaceSpec& space) const {
  switch (method) {
    case Method::SampleMean:
      return r_sample_mean(delta, k, assm, space);
    case Method::GMoM:
      return r_gmom(delta, k, assm, space);
    case Method::Constant:
      return value;
    case Method::Custom: {
      const double r = fn(delta, k);
      if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("custom rate returned a bad value");
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

static void check_assumption(const MomentAssumption& assm, bool want_central,
                             const char* who) {
  if (!(assm.p > 1.0 && assm.p <= 2.0))
    throw std::invalid_argument(std::string(who) + ": need p in (1, 2]");
  if (!(assm.v > 0.0) || !std::isfinite(assm.v))
    throw std::invalid_argument(std::string(who) + ": need finite v > 0");
  if (assm.central != want_central)
    throw std::invalid_argument(std::string(who) + ": wrong moment flavor " +
                                "(central vs raw)");
}

double r_sample_mean(double delta, int64_t k, const MomentAssumption& assm,
                     const SpaceSpec& space) {
  check_assumption(assm, true, "r_sample_mean");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("r_sample_mean: need delta in (0, 1]");
  if (k < 1) throw std::invalid_argument("r_sample_mean: need k >= 1");
  const double p = assm.p;
  return 2.0 * beta(space) * std::pow(assm.v, 1.0 / p) *
         std::pow(delta, -1.0 / p) *
         std::pow(static_cast<double>(k), -(p - 1.0) / p);
}

double r_gmom(double delta, int64_t k, const MomentAssumption& assm,
              const SpaceSpec& space) {
  check_assumption(assm, true, "r_gmom");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("r_gmom: need delta in (0, 1)");
  if (k < gmom_block_count(delta))
    throw std::invalid_argument("r_gmom: k too small to host the blocks");
  const double p = assm.p;
  const double logs = 3.5 * std::log(1.0 / delta) + 1.0;
  return 11.0 * beta(space) / std::pow(0.1, 1.0 / p) *
         std::pow(assm.v, 1.0 / p) *
         std::pow(logs / static_cast<double>(k), (p - 1.0) / p);
}

static void check_query(const BoundQuery& q, const char* who) {
  if (q.n <= q.k)
    throw std::invalid_argument(std::string(who) + ": need n > k");
  if (q.k < 0) throw std::invalid_argument(std::string(who) + ": need k >= 0");
  if (!(q.delta1 > 0.0 && q.delta1 < 1.0))
    throw std::invalid_argument(std::string(who) + ": need delta1 in (0,1)");
  if (!(q.delta2 >= 0.0) || !(q.delta1 + q.delta2 < 1.0))
    throw std::invalid_argument(std::string(who) +
                                ": need delta2 >= 0 and delta1+delta2 < 1");
}

// rho beta^2 frak_c(space, p, rho) + K_p 2^{p-1}, with rho defaulting to
// 1/beta (where it reduces to beta frak_c + K_p 2^{p-1}).
static double width_coefficient(const SpaceSpec& space, double p, double rho) {
  const double b = beta(space);
  const double r = rho > 0.0 ? rho : 1.0 / b;
  return r * b * b * frak_c(space, p, r) + k_p(p) * std::pow(2.0, p - 1.0);
}

double line_crossing_width(const BoundQuery& q, const MomentAssumption& assm,
                           const SpaceSpec& space, const RateFunction& rate) {
  check_assumption(assm, true, "line_crossing_width");
  check_query(q, "line_crossing_width");
  if (!(q.lambda > 0.0))
    throw std::invalid_argument("line_crossing_width: need lambda > 0");
  const double p = assm.p;
  const double b = beta(space);
  const double rho = q.rho > 0.0 ? q.rho : 1.0 / b;
  const double coef = width_coefficient(space, p, rho);
  const double r = rate(q.delta2, q.k, assm, space);
  const double m = static_cast<double>(q.n - q.k);
  return std::pow(q.lambda, p - 1.0) * coef * (assm.v + std::pow(r, p)) +
         std::log(2.0 / q.delta1) / (q.lambda * rho * m);
}

double opt_lambda(const BoundQuery& q, const MomentAssumption& assm,
                  const SpaceSpec& space, const RateFunction& rate) {
  check_assumption(assm, true, "opt_lambda");
  check_query(q, "opt_lambda");
  const double p = assm.p;
  const double b = beta(space);
  const double rho = q.rho > 0.0 ? q.rho : 1.0 / b;
  const double coef = width_coefficient(space, p, rho);
  const double r = rate(q.delta2, q.k, assm, space);
  const double m = static_cast<double>(q.n - q.k);
  return std::pow(std::log(2.0 / q.delta1) /
                      (rho * coef * m * (assm.v + std::pow(r, p))),
                  1.0 / p);
}

double optimized_width(const BoundQuery& q, const MomentAssumption& assm,
                       const SpaceSpec& space, const RateFunction& rate) {
  check_assumption(assm, true, "optimized_width");
  check_query(q, "optimized_width");
  const double p = assm.p;
  const double b = beta(space);
  const double rho = q.rho > 0.0 ? q.rho : 1.0 / b;
  const double coef = width_coefficient(space, p, rho);
  const double r = rate(q.delta2, q.k, assm, space);
  const double m = static_cast<double>(q.n - q.k);
  return 2.0 * std::pow(coef * (assm.v + std::pow(r, p)), 1.0 / p) *
         std::pow(std::log(2.0 / q.delta1) / (rho * m), (p - 1.0) / p);
}

double noncentral_width(int64_t n, double lambda, double delta,
                        const MomentAssumption& assm, const SpaceSpec& space) {
  check_assumption(assm, false, "noncentral_width");
  if (n < 1) throw std::invalid_argument("noncentral_width: need n >= 1");
  if (!(lambda > 0.0))
    throw std::invalid_argument("noncentral_width: need lambda > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("noncentral_width: need delta in (0,1)");
  const double p = assm.p;
  const double b = beta(space);
  const double coef = width_coefficient(space, p, 1.0 / b);
  return 2.0 * assm.v * std::pow(lambda, p - 1.0) * coef +
         b * std::log(2.0 / delta) / (lambda * static_cast<double>(n));
}

LambdaWidth noncentral_opt(int64_t n, double delta,
                           const MomentAssumption& assm,
                           const SpaceSpec& space) {
  check_assumption(assm, false, "noncentral_opt");
  if (n < 1) throw std::invalid_argument("noncentral_opt: need n >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("noncentral_opt: need delta in (0,1)");
  const double p = assm.p;
  const double b = beta(space);
  const double coef = width_coefficient(space, p, 1.0 / b);
  const double nn = static_cast<double>(n);
  LambdaWidth out;
  out.lambda = std::pow(std::log(2.0 / delta) * b / (2.0 * nn * assm.v * coef),
                        1.0 / p);
  out.width = 2.0 * std::pow(2.0 * assm.v * coef, 1.0 / p) *
              std::pow(b * std::log(2.0 / delta) / nn, (p - 1.0) / p);
  return out;
}

double zeta_s(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta_s: need s > 1");
  const int n_terms = 100000;
  double sum = 0.0;
  for (int j = n_terms; j >= 1; --j)  // small terms first
    sum += std::pow(static_cast<double>(j), -s);
  const double nn = static_cast<double>(n_terms);
  // Euler-Maclaurin tail for sum_{j > N} j^{-s}.
  const double tail = std::pow(nn, 1.0 - s) / (s - 1.0) -
                      0.5 * std::pow(nn, -s) +
                      s / 12.0 * std::pow(nn, -s - 1.0);
  return sum + tail;
}

static int64_t default_k_schedule(int64_t j) { return j; }

int64_t stitch_n0(const std::function<int64_t(int64_t)>& k_schedule) {
  const auto k = k_schedule ? k_schedule : default_k_schedule;
  for (int j = 1; j < 62; ++j) {
    const int64_t kj = k(j);
    if (kj < 0) throw std::invalid_argument("stitch_n0: negative k(j)");
    const int64_t lo = int64_t{1} << j;
    const int64_t hi = (int64_t{1} << (j + 1)) - 1;
    const int64_t first = std::max(lo, 2 * kj);
    if (first <= hi) return first;
  }
  throw std::invalid_argument("stitch_n0: schedule never satisfies k <= n/2");
}

StitchConfig StitchConfig::make(double s,
                                std::function<int64_t(int64_t)> k_schedule) {
  if (!(s > 1.0)) throw std::invalid_argument("StitchConfig: need s > 1");
  StitchConfig cfg;
  cfg.s = s;
  cfg.zeta_value = zeta_s(s);
  cfg.k_schedule = k_schedule ? std::move(k_schedule) : default_k_schedule;
  cfg.n0 = stitch_n0(cfg.k_schedule);
  return cfg;
}

double stitch_h(const StitchConfig& cfg, int64_t j) {
  if (j < 0) throw std::invalid_argument("stitch_h: need j >= 0");
  return std::pow(static_cast<double>(j + 1), cfg.s) * cfg.zeta_value;
}

double stitched_width(int64_t n, double delta, const StitchConfig& cfg,
                      const MomentAssumption& assm, const SpaceSpec& space,
                      const RateFunction& rate) {
  check_assumption(assm, true, "stitched_width");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("stitched_width: need delta in (0,1)");
  if (n < cfg.n0)
    throw std::invalid_argument("stitched_width: n below first valid index");
  const auto& schedule = cfg.k_schedule ? cfg.k_schedule : default_k_schedule;
  const int64_t j = std::bit_width(static_cast<uint64_t>(n)) - 1;
  const int64_t kj = schedule(j);
  const double h = stitch_h(cfg, j);
  const double r = rate(delta / (2.0 * h), kj, assm, space);
  const double p = assm.p;
  const double m = static_cast<double>(n - kj);
  return frak_b(space, p) * std::pow(assm.v + std::pow(r, p), 1.0 / p) *
         std::pow(beta(space) * std::log(4.0 * h) / m, (p - 1.0) / p);
}

std::vector<double> eprocess_diag(const std::vector<Vec>& xs,
                                  const std::vector<Vec>& centers,
                                  const std::vector<double>& lambdas,
                                  const Vec& true_mu,
                                  const MomentAssumption& assm,
                                  const SpaceSpec& space, double rho) {
  check_assumption(assm, true, "eprocess_diag");
  if (xs.size() != centers.size() || xs.size() != lambdas.size())
    throw std::invalid_argument("eprocess_diag: misaligned sequences");
  const double b = beta(space);
  const double r = rho > 0.0 ? rho : 1.0 / b;
  const double p = assm.p;
  const double vcoef =
      r * r * b * b * frak_c(space, p, r) + r * k_p(p) * std::pow(2.0, p - 1.0);

  std::vector<double> out;
  out.reserve(xs.size() + 1);
  out.push_back(0.5);

  Vec xi = zeros(space.dim);
  double sum_lambda = 0.0;
  double g = 0.0;
  for (size_t m = 0; m < xs.size(); ++m) {
    const double lam = lambdas[m];
    if (!(lam > 0.0))
      throw std::invalid_argument("eprocess_diag: need lambda_m > 0");
    const Vec y = sub(xs[m], centers[m]);
    Vec term = clip(space, y, lam);
    add_inplace(term, centers[m]);
    axpy_inplace(xi, lam, term);
    sum_lambda += lam;
    g += std::pow(lam, p) *
         (assm.v + std::pow(norm(space, sub(true_mu, centers[m])), p));
    Vec dev = xi;
    axpy_inplace(dev, -sum_lambda, true_mu);
    out.push_back(0.5 * std::exp(r * norm(space, dev) - vcoef * g));
  }
  return out;
}

}  // namespace htmean

#include "htmean/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <utility>

#include "htmean/truncation.hpp"

namespace htmean {

namespace {

constexpr double kVertexSnap = 1e-12;

void require_points(const std::vector<Vec>& xs, const char* who) {
  if (xs.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty input");
  }
  const std::size_t d = xs.front().size();
  for (const Vec& x : xs) {
    if (x.size() != d) {
      throw std::invalid_argument(std::string(who) +
                                  ": inconsistent dimensions");
    }
    validate_finite(x);
  }
}

Vec coordinatewise_median(const std::vector<Vec>& points) {
  const std::size_t d = points.front().size();
  const std::size_t n = points.size();
  Vec med(d, 0.0);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = points[i][c];
    const std::size_t mid = n / 2;
    std::nth_element(col.begin(), col.begin() + mid, col.end());
    double m = col[mid];
    if (n % 2 == 0) {
      const double lo = *std::max_element(col.begin(), col.begin() + mid);
      m = 0.5 * (lo + m);
    }
    med[c] = m;
  }
  return med;
}

}  // namespace

std::string to_string(CenterMethod m) {
  switch (m) {
    case CenterMethod::Zero:
      return "zero";
    case CenterMethod::SampleMean:
      return "sample_mean";
    case CenterMethod::GMoM:
      return "gmom";
  }
  throw std::invalid_argument("unknown center method");
}

CenterMethod center_method_from_string(const std::string& s) {
  if (s == "zero") return CenterMethod::Zero;
  if (s == "sample_mean") return CenterMethod::SampleMean;
  if (s == "gmom") return CenterMethod::GMoM;
  throw std::invalid_argument("unknown center method '" + s +
                              "' (expected zero|sample_mean|gmom)");
}

ConvergenceError::ConvergenceError(const std::string& what, Vec best)
    : std::runtime_error(what), best_(std::move(best)) {}

Vec sample_mean(const std::vector<Vec>& xs) {
  require_points(xs, "sample_mean");
  Vec acc = zeros(xs.front().size());
  for (const Vec& x : xs) add_inplace(acc, x);
  return scale(1.0 / static_cast<double>(xs.size()), acc);
}

Vec weiszfeld_step(const std::vector<Vec>& points, const SpaceSpec& space,
                   const Vec& y) {
  require_points(points, "weiszfeld_step");
  if (y.size() != points.front().size()) {
    throw std::invalid_argument("weiszfeld_step: iterate dimension mismatch");
  }
  const std::size_t d = y.size();
  Vec target = zeros(d);  // sum p_i / d_i over non-coincident points
  Vec resid = zeros(d);   // sum (p_i - y) / d_i
  double wsum = 0.0;      // sum 1 / d_i
  std::size_t coincident = 0;
  for (const Vec& pnt : points) {
    const double dist = norm(space, sub(pnt, y));
    if (dist <= kVertexSnap) {
      ++coincident;
      continue;
    }
    axpy_inplace(target, 1.0 / dist, pnt);
    axpy_inplace(resid, 1.0 / dist, sub(pnt, y));
    wsum += 1.0 / dist;
  }
  if (coincident == points.size()) return y;
  Vec plain = scale(1.0 / wsum, target);
  if (coincident == 0) return plain;
  const double pull = norm(space, resid);
  const double eta = static_cast<double>(coincident);
  if (pull <= eta) return y;  // the vertex itself is a minimizer
  const double frac = eta / pull;
  return add(scale(1.0 - frac, plain), scale(frac, y));
}

Vec geometric_median(const std::vector<Vec>& points, const SpaceSpec& space,
                     double tol, int max_iter) {
  require_points(points, "geometric_median");
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument("geometric_median: need tol > 0, max_iter >= 1");
  }
  Vec y = coordinatewise_median(points);
  for (int iter = 0; iter < max_iter; ++iter) {
    Vec next = weiszfeld_step(points, space, y);
    const double step = norm(space, sub(next, y));
    y = std::move(next);
    if (step <= tol * std::max(1.0, norm(space, y))) return y;
  }
  throw ConvergenceError("geometric_median: not converged after " +
                             std::to_string(max_iter) + " iterations",
                         std::move(y));
}

int gmom_block_count(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("gmom_block_count: delta must be in (0,1)");
  }
  const double target = std::log(1.0 / delta);
  const int b = static_cast<int>(std::floor(target / psi(7.0 / 18.0, 0.1))) + 1;
  if (static_cast<double>(b) > 3.5 * target + 1.0) {
    throw std::logic_error("gmom_block_count: bound 3.5 ln(1/delta)+1 violated");
  }
  return b;
}

Vec gmom(const std::vector<Vec>& points, int blocks, const SpaceSpec& space,
         double tol, int max_iter) {
  require_points(points, "gmom");
  const std::size_t n = points.size();
  if (blocks < 1 || static_cast<std::size_t>(blocks) > n) {
    throw std::invalid_argument("gmom: need 1 <= blocks <= n, got blocks=" +
                                std::to_string(blocks) + " with n=" +
                                std::to_string(n));
  }
  if (blocks == 1) return sample_mean(points);
  std::vector<Vec> means;
  means.reserve(static_cast<std::size_t>(blocks));
  const std::size_t nb = static_cast<std::size_t>(blocks);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = (b * n) / nb;
    const std::size_t hi = ((b + 1) * n) / nb;
    means.push_back(
        sample_mean(std::vector<Vec>(points.begin() + static_cast<std::ptrdiff_t>(lo),
                                     points.begin() + static_cast<std::ptrdiff_t>(hi))));
  }
  return geometric_median(means, space, tol, max_iter);
}

TruncatedMeanResult truncated_mean(const std::vector<Vec>& xs,
                                   const EstimatorConfig& config,
                                   const SpaceSpec& space) {
  if (static_cast<int64_t>(xs.size()) <= config.k) {
    throw std::invalid_argument(
        "truncated_mean: need more samples than the center count (n=" +
        std::to_string(xs.size()) + ", k=" + std::to_string(config.k) + ")");
  }
  StreamingTruncatedMean stream(space, config);
  for (const Vec& x : xs) stream.update(x);
  return stream.result();
}

StreamingTruncatedMean::StreamingTruncatedMean(SpaceSpec space,
                                               EstimatorConfig config)
    : space_(std::move(space)), config_(std::move(config)) {
  if (!(config_.lambda > 0.0) || !std::isfinite(config_.lambda)) {
    throw std::invalid_argument("truncated mean: lambda must be positive");
  }
  if (config_.k < 0) {
    throw std::invalid_argument("truncated mean: k must be nonnegative");
  }
  if (!(config_.gmom_delta > 0.0) || !(config_.gmom_delta < 1.0)) {
    throw std::invalid_argument("truncated mean: gmom_delta must be in (0,1)");
  }
  if (config_.k == 0) config_.center_method = CenterMethod::Zero;
  if (config_.k == 0) form_center();
}

void StreamingTruncatedMean::form_center() {
  switch (config_.center_method) {
    case CenterMethod::Zero:
      center_ = zeros(space_.dim);
      break;
    case CenterMethod::SampleMean:
      center_ = sample_mean(buffer_);
      break;
    case CenterMethod::GMoM:
      center_ = gmom(buffer_, gmom_block_count(config_.gmom_delta), space_);
      break;
  }
  buffer_.clear();
  buffer_.shrink_to_fit();
  acc_ = zeros(space_.dim);
  center_ready_ = true;
}

void StreamingTruncatedMean::update(const Vec& x) {
  if (static_cast<int64_t>(x.size()) != space_.dim) {
    throw std::invalid_argument("truncated mean: sample dimension mismatch");
  }
  validate_finite(x);
  ++seen_;
  if (!center_ready_) {
    if (config_.center_method != CenterMethod::Zero) buffer_.push_back(x);
    if (seen_ == config_.k) form_center();
    return;  // sample consumed by the center
  }
  add_inplace(acc_, clip(space_, sub(x, center_), config_.lambda));
  ++count_;
}

Vec StreamingTruncatedMean::estimate() const {
  if (!center_ready_ || count_ == 0) {
    throw StateError("truncated mean: no samples accumulated yet (n=" +
                     std::to_string(seen_) + ", k=" +
                     std::to_string(config_.k) + ")");
  }
  return add(scale(1.0 / static_cast<double>(count_), acc_), center_);
}

TruncatedMeanResult StreamingTruncatedMean::result() const {
  return TruncatedMeanResult{estimate(), center_, seen_, config_.k};
}

const Vec& StreamingTruncatedMean::center() const {
  if (!center_ready_) {
    throw StateError("truncated mean: center not formed yet");
  }
  return center_;
}

StitchedEstimator::StitchedEstimator(SpaceSpec space, StitchParams params)
    : space_(std::move(space)), params_(std::move(params)) {
  if (!(params_.delta > 0.0) || !(params_.delta < 1.0)) {
    throw std::invalid_argument("stitched estimator: delta must be in (0,1)");
  }
  if (!params_.assm.central) {
    throw std::invalid_argument(
        "stitched estimator: needs a central moment assumption");
  }
  if (!(params_.assm.p > 1.0) || !(params_.assm.p <= 2.0) ||
      !(params_.assm.v > 0.0) || !std::isfinite(params_.assm.v)) {
    throw std::invalid_argument(
        "stitched estimator: need p in (1,2] and finite v > 0");
  }
  if (!(params_.gmom_delta > 0.0) || !(params_.gmom_delta < 1.0)) {
    throw std::invalid_argument("stitched estimator: gmom_delta must be in (0,1)");
  }
  cfg_ = StitchConfig::make(params_.s, params_.k_schedule);
  j_min_ = std::bit_width(static_cast<uint64_t>(cfg_.n0)) - 1;
  epochs_.resize(63);
  for (int j = j_min_; j < 63; ++j) {
    const int64_t kj = cfg_.k_schedule(j);
    if (kj < 0) {
      throw std::invalid_argument("stitched estimator: k_schedule(" +
                                  std::to_string(j) + ") is negative");
    }
    epochs_[static_cast<std::size_t>(j)].k = kj;
    kmax_ = std::max(kmax_, kj);
  }
  if (params_.center_method == CenterMethod::SampleMean) {
    prefix_sum_ = zeros(space_.dim);
  }
}

void StitchedEstimator::open_epoch(int j) {
  Epoch& e = epochs_[static_cast<std::size_t>(j)];
  if (e.k == 0) {
    e.center = zeros(space_.dim);
  } else {
    switch (params_.center_method) {
      case CenterMethod::Zero:
        e.center = zeros(space_.dim);
        break;
      case CenterMethod::SampleMean:
        e.center = scale(1.0 / static_cast<double>(e.k), prefix_sum_);
        break;
      case CenterMethod::GMoM: {
        std::vector<Vec> head(prefix_buf_.begin(),
                              prefix_buf_.begin() +
                                  static_cast<std::ptrdiff_t>(e.k));
        e.center = gmom(head, gmom_block_count(params_.gmom_delta), space_);
        break;
      }
    }
  }
  const double p = params_.assm.p;
  const double b = beta(space_);
  const double hj = stitch_h(cfg_, j);
  const double dj = params_.delta / hj;
  const double r = params_.rate(dj / 2.0, e.k, params_.assm, space_);
  const double cfac = b * c_p_combined(space_, p) *
                      (params_.assm.v + std::pow(r, p));
  e.lambda =
      std::pow(b * std::log(4.0 / dj) / (std::ldexp(1.0, j) * cfac), 1.0 / p);
  e.acc = zeros(space_.dim);
  e.count = 0;
  e.open = true;
}

void StitchedEstimator::update(const Vec& x) {
  if (static_cast<int64_t>(x.size()) != space_.dim) {
    throw std::invalid_argument("stitched estimator: sample dimension mismatch");
  }
  validate_finite(x);
  ++n_;
  // Open every epoch whose accumulation starts with this sample, using the
  // prefix state of the previous n-1 samples for its center.
  for (int j = j_min_; j < 63; ++j) {
    Epoch& e = epochs_[static_cast<std::size_t>(j)];
    if (!e.open && !e.dropped && e.k == n_ - 1) open_epoch(j);
  }
  if (params_.center_method == CenterMethod::SampleMean) {
    add_inplace(prefix_sum_, x);
  } else if (params_.center_method == CenterMethod::GMoM &&
             static_cast<int64_t>(prefix_buf_.size()) < kmax_) {
    prefix_buf_.push_back(x);
  }
  if (!prefix_buf_.empty() && n_ >= kmax_ + 1 &&
      params_.center_method == CenterMethod::GMoM) {
    // every center that needs raw samples has been formed
    bool all_open = true;
    for (int j = j_min_; j < 63; ++j) {
      const Epoch& e = epochs_[static_cast<std::size_t>(j)];
      if (!e.open && !e.dropped) all_open = false;
    }
    if (all_open) {
      prefix_buf_.clear();
      prefix_buf_.shrink_to_fit();
    }
  }
  for (int j = j_min_; j < 63; ++j) {
    Epoch& e = epochs_[static_cast<std::size_t>(j)];
    if (e.open && !e.dropped) {
      add_inplace(e.acc, clip(space_, sub(x, e.center), e.lambda));
      ++e.count;
    }
  }
  // Epochs below the active one can never be queried again.
  const int jcur = std::bit_width(static_cast<uint64_t>(n_)) - 1;
  for (int j = j_min_; j < jcur; ++j) {
    Epoch& e = epochs_[static_cast<std::size_t>(j)];
    if (!e.dropped) {
      e.dropped = true;
      e.open = false;
      Vec().swap(e.center);
      Vec().swap(e.acc);
    }
  }
}

int StitchedEstimator::current_epoch() const {
  if (n_ == 0) throw StateError("stitched estimator: no samples yet");
  return std::bit_width(static_cast<uint64_t>(n_)) - 1;
}

const StitchedEstimator::Epoch& StitchedEstimator::checked_epoch(int j) const {
  if (j < j_min_ || j > 62) {
    throw std::invalid_argument("stitched estimator: epoch " +
                                std::to_string(j) + " out of range [" +
                                std::to_string(j_min_) + ",62]");
  }
  return epochs_[static_cast<std::size_t>(j)];
}

int64_t StitchedEstimator::epoch_k(int j) const { return checked_epoch(j).k; }

double StitchedEstimator::epoch_lambda(int j) const {
  const Epoch& e = checked_epoch(j);
  if (!e.open) {
    throw StateError("stitched estimator: epoch " + std::to_string(j) +
                     " not open yet");
  }
  return e.lambda;
}

Vec StitchedEstimator::estimate() const {
  if (n_ < cfg_.n0) {
    throw StateError("stitched estimator: estimate needs n >= " +
                     std::to_string(cfg_.n0) + " samples, have " +
                     std::to_string(n_));
  }
  const int j = std::bit_width(static_cast<uint64_t>(n_)) - 1;
  const Epoch& e = checked_epoch(j);
  if (!e.open || e.count == 0) {
    throw StateError("stitched estimator: active epoch " + std::to_string(j) +
                     " has no accumulated samples");
  }
  return add(scale(1.0 / static_cast<double>(e.count), e.acc), e.center);
}

}  // namespace htmean

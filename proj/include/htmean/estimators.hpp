#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "htmean/bounds.hpp"
#include "htmean/constants.hpp"
#include "htmean/space.hpp"

namespace htmean {

// How the naive center Z_k is built from the first k samples.
enum class CenterMethod { Zero, SampleMean, GMoM };

std::string to_string(CenterMethod m);
CenterMethod center_method_from_string(const std::string& s);

// Iteration budget exhausted; carries the best iterate found so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Vec best);
  const Vec& best() const noexcept { return best_; }

 private:
  Vec best_;
};

// Estimator queried before it has a defined value (e.g. no samples past the
// center phase yet).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Coordinatewise average, accumulated in arrival order.
Vec sample_mean(const std::vector<Vec>& xs);

// One modified Weiszfeld update. Points within 1e-12 of y are treated as
// coincident vertices: if the residual pull from the remaining points does not
// exceed the vertex multiplicity, y is a minimizer and is returned unchanged;
// otherwise the step is shortened accordingly (Vardi-Zhang rule).
Vec weiszfeld_step(const std::vector<Vec>& points, const SpaceSpec& space,
                   const Vec& y);

// Minimizer of y -> sum_i ||p_i - y||, via Weiszfeld iteration started at the
// coordinatewise median. Stops when successive iterates differ by at most
// tol * max(1, ||y||); throws ConvergenceError after max_iter updates.
Vec geometric_median(const std::vector<Vec>& points, const SpaceSpec& space,
                     double tol = 1e-10, int max_iter = 10000);

// Block count B = floor(ln(1/delta) / psi(7/18, 0.1)) + 1, which always
// satisfies B <= 3.5 ln(1/delta) + 1.
int gmom_block_count(double delta);

// Geometric median-of-means: partition into `blocks` contiguous blocks with
// sizes differing by at most one, take block sample means, return their
// geometric median.
Vec gmom(const std::vector<Vec>& points, int blocks, const SpaceSpec& space,
         double tol = 1e-10, int max_iter = 10000);

// Parameters of the centered truncated-mean estimator. k = 0 always means
// Z_0 = 0, regardless of center_method.
struct EstimatorConfig {
  double lambda = 1.0;
  int64_t k = 0;
  CenterMethod center_method = CenterMethod::Zero;
  double gmom_delta = 1e-4;  // sizes GMoM blocks for the center
};

struct TruncatedMeanResult {
  Vec estimate;
  Vec center;
  int64_t n = 0;
  int64_t k = 0;
};

// mu_hat(k, lambda, Z_k): build the center from the first k samples, then
// average the clipped centered residuals of samples k+1..n and re-add the
// center. Requires n > k.
TruncatedMeanResult truncated_mean(const std::vector<Vec>& xs,
                                   const EstimatorConfig& config,
                                   const SpaceSpec& space);

// Online form of truncated_mean. Feeding x_1..x_n and calling estimate()
// reproduces the batch call on the same prefix bit for bit (same summation
// order). estimate() before the center exists, or with zero accumulated
// samples, throws StateError.
class StreamingTruncatedMean {
 public:
  StreamingTruncatedMean(SpaceSpec space, EstimatorConfig config);

  void update(const Vec& x);
  Vec estimate() const;
  TruncatedMeanResult result() const;

  bool center_ready() const noexcept { return center_ready_; }
  const Vec& center() const;  // StateError while still collecting
  int64_t seen() const noexcept { return seen_; }
  int64_t accumulated() const noexcept { return count_; }
  const EstimatorConfig& config() const noexcept { return config_; }

 private:
  void form_center();
  SpaceSpec space_;
  EstimatorConfig config_;
  std::vector<Vec> buffer_;  // first k samples, freed once the center exists
  bool center_ready_ = false;
  Vec center_;
  Vec acc_;
  int64_t count_ = 0;
  int64_t seen_ = 0;
};

// Tuning of the epoch-stitched estimator. Epoch j covers n in [2^j, 2^{j+1});
// its center uses the first k(j) samples and its truncation level is
//   lambda_j = (beta ln(4/delta_j) / (2^j c_j))^{1/p},
//   c_j = (beta frak_c + 2^{p-1} K_p)(v + r(delta_j/2, k(j))^p),
// with delta_j = delta / h(j), h(x) = (x+1)^s zeta(s).
struct StitchParams {
  double delta = 0.05;
  MomentAssumption assm;  // central
  RateFunction rate = RateFunction::sample_mean();
  double s = 2.0;
  CenterMethod center_method = CenterMethod::SampleMean;
  double gmom_delta = 1e-4;
  std::function<int64_t(int64_t)> k_schedule;  // default k(j) = j
};

// Maintains one truncated-mean accumulator per epoch; estimate() returns the
// active epoch's value. Epoch j starts accumulating at sample k(j)+1, so its
// center never sees its own samples; epochs below the active one are freed.
class StitchedEstimator {
 public:
  StitchedEstimator(SpaceSpec space, StitchParams params);

  void update(const Vec& x);
  // Active epoch's centered truncated mean; StateError before n0 samples or
  // if the active epoch has nothing accumulated.
  Vec estimate() const;

  int64_t n() const noexcept { return n_; }
  int64_t n0() const noexcept { return cfg_.n0; }
  int current_epoch() const;  // floor(log2 n); StateError at n = 0
  int64_t epoch_k(int j) const;
  double epoch_lambda(int j) const;  // StateError before epoch j opens
  const StitchConfig& stitch_config() const noexcept { return cfg_; }

 private:
  struct Epoch {
    int64_t k = 0;
    bool open = false;
    bool dropped = false;
    double lambda = 0.0;
    Vec center;
    Vec acc;
    int64_t count = 0;
  };

  void open_epoch(int j);
  const Epoch& checked_epoch(int j) const;

  SpaceSpec space_;
  StitchParams params_;
  StitchConfig cfg_;
  int64_t n_ = 0;
  int j_min_ = 1;               // epochs below floor(log2 n0) are never queried
  int64_t kmax_ = 0;            // largest k(j) over retained epochs
  std::vector<Epoch> epochs_;   // indexed by j = 0..62
  Vec prefix_sum_;              // running sum of all samples (SampleMean centers)
  std::vector<Vec> prefix_buf_; // raw first-kmax samples (GMoM centers)
};

}  // namespace htmean

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "htmean/datagen.hpp"
#include "htmean/estimators.hpp"
#include "htmean/space.hpp"
#include "htmean/truncation.hpp"

using namespace htmean;

namespace {

const SpaceSpec kE2 = SpaceSpec::euclidean(2);

double objective(const std::vector<Vec>& pts, const SpaceSpec& s,
                 const Vec& y) {
  double f = 0.0;
  for (const Vec& p : pts) f += norm(s, sub(p, y));
  return f;
}

std::vector<Vec> random_points(Rng& rng, int n, int d, double spread) {
  std::vector<Vec> pts(n, Vec(d));
  for (Vec& p : pts)
    for (double& c : p) c = spread * (2.0 * rng.unit() - 1.0);
  return pts;
}

// Brute-force geometric median: dense grid over the bounding box, then
// shrinking coordinate descent around the best grid point.
Vec grid_refine_median(const std::vector<Vec>& pts, const SpaceSpec& s) {
  double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
  for (const Vec& p : pts) {
    lo0 = std::min(lo0, p[0]);
    hi0 = std::max(hi0, p[0]);
    lo1 = std::min(lo1, p[1]);
    hi1 = std::max(hi1, p[1]);
  }
  Vec best{lo0, lo1};
  double fbest = 1e300;
  const int g = 60;
  for (int i = 0; i <= g; ++i)
    for (int j = 0; j <= g; ++j) {
      const Vec y{lo0 + (hi0 - lo0) * i / g, lo1 + (hi1 - lo1) * j / g};
      const double f = objective(pts, s, y);
      if (f < fbest) {
        fbest = f;
        best = y;
      }
    }
  double step = std::max(hi0 - lo0, hi1 - lo1) / g;
  while (step > 1e-7) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int c = 0; c < 2; ++c)
        for (const double dir : {-1.0, 1.0}) {
          Vec y = best;
          y[c] += dir * step;
          const double f = objective(pts, s, y);
          if (f < fbest - 1e-15) {
            fbest = f;
            best = y;
            moved = true;
          }
        }
    }
    step *= 0.5;
  }
  return best;
}

}  // namespace

TEST_CASE("sample mean") {
  CHECK(sample_mean({{1.0, 0.0}, {3.0, 0.0}}) == Vec{2.0, 0.0});
  CHECK(sample_mean({{5.0, -1.0}}) == Vec{5.0, -1.0});
  CHECK_THROWS_AS(sample_mean({}), std::invalid_argument);
}

TEST_CASE("geometric median: exact symmetric cases") {
  const Vec m1 =
      geometric_median({{0.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}, {1.0, -1.0}}, kE2);
  CHECK(m1[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(m1[1]) < 1e-8);

  // 1-D median on an embedded axis
  const Vec m2 = geometric_median({{0.0, 0.0}, {1.0, 0.0}, {10.0, 0.0}}, kE2);
  CHECK(m2[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(m2[1]) < 1e-8);

  // Fermat point of an equilateral triangle is its centroid
  const Vec m3 = geometric_median(
      {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.86602540378443864676}}, kE2);
  CHECK(m3[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(m3[1] == doctest::Approx(0.288675134594812882).epsilon(1e-7));

  // two points: any point on the segment is optimal; the iteration starts and
  // stays at the midpoint
  const Vec m4 = geometric_median({{0.0, 0.0}, {4.0, 2.0}}, kE2);
  CHECK(m4[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(m4[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("geometric median: data point can be the minimizer") {
  // middle of three collinear points; the vertex rule must hold there
  const Vec m =
      geometric_median({{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}, kE2);
  CHECK(std::abs(m[0]) < 1e-10);
  CHECK(std::abs(m[1]) < 1e-10);
  // objective at the returned point is no worse than at nearby probes
  const std::vector<Vec> pts{{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  const double f0 = objective(pts, kE2, m);
  CHECK(f0 <= objective(pts, kE2, {0.01, 0.0}) + 1e-12);
  CHECK(f0 <= objective(pts, kE2, {0.0, 0.01}) + 1e-12);
}

TEST_CASE("geometric median vs grid oracle (random instances)") {
  Rng rng(99, 0);
  for (int inst = 0; inst < 5; ++inst) {
    const std::vector<Vec> pts = random_points(rng, 5, 2, 3.0);
    const Vec got = geometric_median(pts, kE2);
    const Vec want = grid_refine_median(pts, kE2);
    CHECK(norm(kE2, sub(got, want)) < 1e-4);
  }
}

TEST_CASE("weiszfeld step never increases the euclidean objective") {
  // the majorization argument behind this is specific to the euclidean norm
  Rng rng(7, 3);
  for (int inst = 0; inst < 50; ++inst) {
    const std::vector<Vec> pts = random_points(rng, 7, 2, 2.0);
    Vec y{4.0 * rng.unit() - 2.0, 4.0 * rng.unit() - 2.0};
    for (int it = 0; it < 20; ++it) {
      const Vec next = weiszfeld_step(pts, kE2, y);
      CHECK(objective(pts, kE2, next) <= objective(pts, kE2, y) + 1e-12);
      y = next;
    }
  }
}

TEST_CASE("lp iteration converges to a balance-condition fixed point") {
  // in l^alpha the step is not monotone, but it still settles at a point
  // where the unit residual directions cancel
  Rng rng(7, 4);
  const SpaceSpec s = SpaceSpec::lp(3.0, 2);
  for (int inst = 0; inst < 20; ++inst) {
    const std::vector<Vec> pts = random_points(rng, 7, 2, 2.0);
    const Vec y = geometric_median(pts, s);
    Vec resid = {0.0, 0.0};
    double coincident = 0.0;
    for (const Vec& pnt : pts) {
      const double dist = norm(s, sub(pnt, y));
      if (dist <= 1e-9) {
        coincident += 1.0;  // vertex rule: pull must not exceed multiplicity
        continue;
      }
      axpy_inplace(resid, 1.0 / dist, sub(pnt, y));
    }
    CHECK(norm(s, resid) <= coincident + 1e-7);
  }
}

TEST_CASE("convergence failure carries the best iterate") {
  Rng rng(1234, 0);
  const std::vector<Vec> pts = random_points(rng, 9, 2, 5.0);
  try {
    geometric_median(pts, kE2, 1e-300, 2);  // unreachable tolerance
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best().size() == 2);
    // the carried iterate is already a decent minimizer
    const Vec want = grid_refine_median(pts, kE2);
    CHECK(norm(kE2, sub(e.best(), want)) < 1.0);
  }
}

TEST_CASE("gmom block count") {
  CHECK(gmom_block_count(1e-4) == 32);
  CHECK(gmom_block_count(0.5) == 3);
  // just below the one-block boundary delta = e^{-psi}
  CHECK(gmom_block_count(std::exp(-0.291588262512928542) * 0.999999) == 2);
  for (const double d : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 0.9}) {
    CHECK(gmom_block_count(d) <= 3.5 * std::log(1.0 / d) + 1.0);
    CHECK(gmom_block_count(d) >= 1);
  }
  CHECK_THROWS_AS(gmom_block_count(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gmom_block_count(1.0), std::invalid_argument);
}

TEST_CASE("gmom degenerate block counts") {
  Rng rng(5, 5);
  const std::vector<Vec> pts = random_points(rng, 12, 2, 2.0);
  CHECK(gmom(pts, 1, kE2) == sample_mean(pts));
  CHECK(gmom(pts, 12, kE2) == geometric_median(pts, kE2));
  CHECK_THROWS_AS(gmom(pts, 13, kE2), std::invalid_argument);
  CHECK_THROWS_AS(gmom(pts, 0, kE2), std::invalid_argument);
}

TEST_CASE("gmom near-equal contiguous partition") {
  // n=90, B=32: sizes a of 3 and b of 2 must satisfy 3a+2b=90, a+b=32,
  // whose unique solution is a=26, b=6 -- regardless of arrangement.
  const int n = 90, B = 32;
  int threes = 0, twos = 0;
  for (int b = 0; b < B; ++b) {
    const int lo = (b * n) / B, hi = ((b + 1) * n) / B;
    const int sz = hi - lo;
    CHECK((sz == 2 || sz == 3));
    (sz == 3 ? threes : twos)++;
  }
  CHECK(threes == 26);
  CHECK(twos == 6);
  // behavioral pin of the floor partition on scalars {0,0,9}, B=2:
  // blocks [0,1) and [1,3) -> means {0, 4.5} -> midpoint 2.25
  const Vec g = gmom({{0.0}, {0.0}, {9.0}}, 2, SpaceSpec::euclidean(1));
  CHECK(g[0] == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("truncated mean: hand-checked values") {
  const SpaceSpec e1 = SpaceSpec::euclidean(1);
  EstimatorConfig ec;
  ec.lambda = 0.1;
  ec.k = 0;
  // {0, 1, 100} at radius 10: clipped to {0, 1, 10}
  const TruncatedMeanResult r =
      truncated_mean({{0.0}, {1.0}, {100.0}}, ec, e1);
  CHECK(r.estimate[0] == 3.6666666666666665);  // 11/3 exactly
  CHECK(r.center == Vec{0.0});
  CHECK(r.n == 3);
  CHECK(r.k == 0);

  // truncation inactive -> sample mean of the tail samples
  ec.lambda = 1e-6;
  ec.k = 1;
  ec.center_method = CenterMethod::SampleMean;
  const TruncatedMeanResult r2 =
      truncated_mean({{4.0}, {1.0}, {2.0}, {9.0}}, ec, e1);
  CHECK(r2.center == Vec{4.0});
  CHECK(r2.estimate[0] == doctest::Approx(4.0).epsilon(1e-12));

  // lambda -> infinity clips residuals to ~0: estimate -> center
  ec.lambda = 1e12;
  const TruncatedMeanResult r3 =
      truncated_mean({{4.0}, {1.0}, {2.0}, {9.0}}, ec, e1);
  CHECK(std::abs(r3.estimate[0] - 4.0) < 1e-10);
}

TEST_CASE("truncated mean: domain errors") {
  const SpaceSpec e1 = SpaceSpec::euclidean(1);
  EstimatorConfig ec;
  ec.k = 3;
  ec.center_method = CenterMethod::SampleMean;
  CHECK_THROWS_AS(truncated_mean({{1.0}, {2.0}}, ec, e1),
                  std::invalid_argument);  // n <= k
  EstimatorConfig bad;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(truncated_mean({{1.0}}, bad, e1), std::invalid_argument);
  EstimatorConfig badk;
  badk.k = -1;
  CHECK_THROWS_AS(truncated_mean({{1.0}}, badk, e1), std::invalid_argument);
}

TEST_CASE("k=0 always means a zero center") {
  const SpaceSpec e1 = SpaceSpec::euclidean(1);
  EstimatorConfig a;
  a.lambda = 0.5;
  a.k = 0;
  a.center_method = CenterMethod::GMoM;  // ignored at k=0
  EstimatorConfig b = a;
  b.center_method = CenterMethod::Zero;
  const std::vector<Vec> xs{{1.0}, {5.0}, {-2.0}};
  CHECK(truncated_mean(xs, a, e1).estimate ==
        truncated_mean(xs, b, e1).estimate);
}

TEST_CASE("estimate stays within 1/lambda of the center") {
  Rng rng(31, 2);
  GeneratorSpec g;
  g.kind = GenKind::LomaxSphere;
  g.a = 1.75;
  g.dim = 2;
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<Vec> xs = generate(g, 40, 1000, rep);
    EstimatorConfig ec;
    ec.lambda = 0.05 + rng.unit();
    ec.k = 8;
    ec.center_method = CenterMethod::SampleMean;
    const TruncatedMeanResult r = truncated_mean(xs, ec, kE2);
    CHECK(norm(kE2, sub(r.estimate, r.center)) <= 1.0 / ec.lambda + 1e-12);
  }
}

TEST_CASE("streaming equals batch bit for bit at every prefix") {
  GeneratorSpec g;
  g.kind = GenKind::LomaxSphere;
  g.a = 1.75;
  g.dim = 3;
  const SpaceSpec s = SpaceSpec::euclidean(3);
  const CenterMethod methods[] = {CenterMethod::Zero, CenterMethod::SampleMean,
                                  CenterMethod::GMoM};
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<Vec> xs = generate(g, 60, 777, rep);
    for (const CenterMethod cm : methods) {
      EstimatorConfig ec;
      ec.lambda = 0.3;
      ec.k = cm == CenterMethod::Zero ? 0 : 10;
      ec.center_method = cm;
      ec.gmom_delta = 0.2;
      StreamingTruncatedMean stream(s, ec);
      for (std::size_t n = 1; n <= xs.size(); ++n) {
        stream.update(xs[n - 1]);
        if (static_cast<int64_t>(n) <= ec.k) {
          CHECK_THROWS_AS(stream.estimate(), StateError);
          continue;
        }
        const std::vector<Vec> prefix(xs.begin(), xs.begin() + n);
        CHECK(stream.estimate() == truncated_mean(prefix, ec, s).estimate);
      }
    }
  }
}

TEST_CASE("streaming state errors") {
  EstimatorConfig ec;
  ec.lambda = 1.0;
  ec.k = 2;
  ec.center_method = CenterMethod::SampleMean;
  StreamingTruncatedMean stream(kE2, ec);
  CHECK_THROWS_AS(stream.estimate(), StateError);
  CHECK_THROWS_AS(stream.center(), StateError);
  stream.update({1.0, 0.0});
  stream.update({2.0, 0.0});
  CHECK(stream.center_ready());
  CHECK(stream.center() == Vec{1.5, 0.0});
  CHECK_THROWS_AS(stream.estimate(), StateError);  // n == k, nothing accumulated
  stream.update({3.0, 0.0});
  CHECK(stream.accumulated() == 1);
  CHECK_NOTHROW(stream.estimate());
}

TEST_CASE("translation equivariance for data-driven centers") {
  GeneratorSpec g;
  g.kind = GenKind::LomaxSphere;
  g.a = 1.75;
  g.dim = 2;
  Rng rng(606, 0);
  for (const CenterMethod cm :
       {CenterMethod::SampleMean, CenterMethod::GMoM}) {
    for (int rep = 0; rep < 10; ++rep) {
      const std::vector<Vec> xs = generate(g, 50, 2222, rep);
      const Vec c{20.0 * rng.unit() - 10.0, 20.0 * rng.unit() - 10.0};
      std::vector<Vec> shifted = xs;
      for (Vec& x : shifted) add_inplace(x, c);
      EstimatorConfig ec;
      ec.lambda = 0.2;
      ec.k = 12;
      ec.center_method = cm;
      ec.gmom_delta = 0.2;
      const Vec base = truncated_mean(xs, ec, kE2).estimate;
      const Vec moved = truncated_mean(shifted, ec, kE2).estimate;
      CHECK(norm(kE2, sub(moved, add(base, c))) < 1e-9);
    }
  }
}

TEST_CASE("degenerate stream sits at the mean with zero distance") {
  EstimatorConfig ec;
  ec.lambda = 2.0;
  ec.k = 3;
  ec.center_method = CenterMethod::SampleMean;
  StreamingTruncatedMean stream(kE2, ec);
  const Vec mu{1.5, -2.5};
  for (int i = 0; i < 30; ++i) stream.update(mu);
  CHECK(stream.estimate() == mu);
}

TEST_CASE("stitched estimator: constant stream is exact") {
  StitchParams sp;
  sp.delta = 0.05;
  sp.assm = MomentAssumption{1.5, 2.0, true};
  StitchedEstimator est(kE2, sp);
  const Vec c{3.0, -1.0};
  for (int n = 1; n <= 40; ++n) {
    est.update(c);
    if (n >= est.n0()) CHECK(est.estimate() == c);
  }
}

TEST_CASE("stitched estimator matches the batch form within an epoch") {
  GeneratorSpec g;
  g.kind = GenKind::LomaxSphere;
  g.a = 1.75;
  g.dim = 2;
  const std::vector<Vec> xs = generate(g, 40, 909, 4);
  StitchParams sp;
  sp.delta = 0.05;
  sp.assm = MomentAssumption{1.5, 2.0, true};
  sp.center_method = CenterMethod::SampleMean;
  StitchedEstimator est(kE2, sp);
  for (std::size_t n = 1; n <= xs.size(); ++n) {
    est.update(xs[n - 1]);
    if (static_cast<int64_t>(n) < est.n0()) continue;
    const int j = est.current_epoch();
    EstimatorConfig ec;
    ec.lambda = est.epoch_lambda(j);
    ec.k = est.epoch_k(j);
    ec.center_method = CenterMethod::SampleMean;
    const std::vector<Vec> prefix(xs.begin(), xs.begin() + n);
    CHECK(est.estimate() == truncated_mean(prefix, ec, kE2).estimate);
  }
}

TEST_CASE("stitched epoch rollover stays consistent on both sides") {
  GeneratorSpec g;
  g.kind = GenKind::GaussianSphere;
  g.dim = 2;
  const std::vector<Vec> xs = generate(g, 33, 11, 0);
  StitchParams sp;
  sp.delta = 0.1;
  sp.assm = MomentAssumption{2.0, 1.0, true};
  StitchedEstimator est(kE2, sp);
  Vec before, after;
  int j_before = -1, j_after = -1;
  for (std::size_t n = 1; n <= 32; ++n) {
    est.update(xs[n - 1]);
    if (n == 31) {
      before = est.estimate();
      j_before = est.current_epoch();
    }
    if (n == 32) {
      after = est.estimate();
      j_after = est.current_epoch();
    }
  }
  CHECK(j_before == 4);
  CHECK(j_after == 5);
  // both sides equal their own batch definition
  EstimatorConfig e4;
  e4.k = est.epoch_k(4);
  e4.center_method = CenterMethod::SampleMean;
  // epoch 4 was dropped at n=32; reconstruct its lambda via a fresh run
  StitchParams sp2 = sp;
  StitchedEstimator probe(kE2, sp2);
  for (std::size_t n = 1; n <= 31; ++n) probe.update(xs[n - 1]);
  e4.lambda = probe.epoch_lambda(4);
  const std::vector<Vec> p31(xs.begin(), xs.begin() + 31);
  CHECK(before == truncated_mean(p31, e4, kE2).estimate);
  EstimatorConfig e5;
  e5.k = est.epoch_k(5);
  e5.lambda = est.epoch_lambda(5);
  e5.center_method = CenterMethod::SampleMean;
  const std::vector<Vec> p32(xs.begin(), xs.begin() + 32);
  CHECK(after == truncated_mean(p32, e5, kE2).estimate);
}

TEST_CASE("stitched estimator state and domain errors") {
  StitchParams sp;
  sp.assm = MomentAssumption{1.5, 1.0, true};
  StitchedEstimator est(kE2, sp);
  CHECK(est.n0() == 2);
  CHECK_THROWS_AS(est.estimate(), StateError);
  est.update({1.0, 1.0});
  CHECK_THROWS_AS(est.estimate(), StateError);  // n=1 < n0
  est.update({1.0, 1.0});
  CHECK_NOTHROW(est.estimate());
  CHECK_THROWS_AS(est.epoch_lambda(40), StateError);  // epoch not open yet

  StitchParams bad = sp;
  bad.delta = 0.0;
  CHECK_THROWS_AS(StitchedEstimator(kE2, bad), std::invalid_argument);
  StitchParams raw = sp;
  raw.assm.central = false;
  CHECK_THROWS_AS(StitchedEstimator(kE2, raw), std::invalid_argument);
  StitchParams bigp = sp;
  bigp.assm.p = 2.5;
  CHECK_THROWS_AS(StitchedEstimator(kE2, bigp), std::invalid_argument);
}

TEST_CASE("center method string round trip") {
  for (const CenterMethod m :
       {CenterMethod::Zero, CenterMethod::SampleMean, CenterMethod::GMoM}) {
    CHECK(center_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(center_method_from_string("median"), std::invalid_argument);
}

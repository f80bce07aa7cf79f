#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "htmean/constants.hpp"

using namespace htmean;

namespace {
const SpaceSpec kH2 = SpaceSpec::euclidean(2);
const SpaceSpec kL3 = SpaceSpec::lp(3.0, 2);
}  // namespace

TEST_CASE("holder conjugate") {
  CHECK(holder_conjugate(2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(holder_conjugate(1.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(holder_conjugate(1.25) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(holder_conjugate(1.0), std::invalid_argument);
}

TEST_CASE("k_p frozen values") {
  CHECK(k_p(2.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(k_p(1.5) ==
        doctest::Approx(0.384900179459750509672765853668).epsilon(1e-14));
  CHECK(k_p(1.25) ==
        doctest::Approx(0.534992243981137619202586458607).epsilon(1e-14));
  CHECK(k_p(1.75) ==
        doctest::Approx(0.30267695927080333676130757184).epsilon(1e-14));
}

TEST_CASE("k_p strictly decreasing and inside (0,1) on the p-grid") {
  double prev = 1.0;
  for (int i = 0; i <= 99; ++i) {
    const double p = 1.01 + (2.0 - 1.01) * i / 99.0;
    const double v = k_p(p);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(k_p(1.0), std::invalid_argument);
  CHECK_THROWS_AS(k_p(2.5), std::invalid_argument);
}

TEST_CASE("frak_c frozen values") {
  // Hilbert, p=2, rho=1: (e^2-3)/2
  CHECK(frak_c(kH2, 2.0, 1.0) ==
        doctest::Approx(2.19452804946532511361521373029).epsilon(1e-13));
  // default rho = 1/beta = 1 on Hilbert
  CHECK(frak_c(kH2, 2.0) == frak_c(kH2, 2.0, 1.0));
  CHECK(frak_c(kH2, 2.0, 0.5) ==
        doctest::Approx(1.43656365691809047072057494271).epsilon(1e-13));
  // non-Hilbert uses 2^{p+1}; default rho = 1/sqrt(2)
  CHECK(frak_c(kL3, 1.5) ==
        doctest::Approx(4.805601817475982901707519118).epsilon(1e-13));
  CHECK_THROWS_AS(frak_c(kH2, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(frak_c(kH2, 2.0, -1.0), std::invalid_argument);
}

TEST_CASE("combined constants") {
  CHECK(c_p_combined(kH2, 2.0) ==
        doctest::Approx(2.69452804946532511361521373029).epsilon(1e-13));
  CHECK(c_p_combined(kL3, 1.5) ==
        doctest::Approx(5.19050199693573341138028497167).epsilon(1e-13));
  CHECK(frak_b(kH2, 2.0) ==
        doctest::Approx(4.64286812172417847030607865347).epsilon(1e-13));
  CHECK(frak_b(kH2, 1.5) ==
        doctest::Approx(4.66348743986790783799653796828).epsilon(1e-13));
}

TEST_CASE("stitched prefactor term stays in (2,3)") {
  for (int i = 0; i <= 200; ++i) {
    const double p = 1.0 + (i + 1) / 201.0;  // (1, 2]
    const double pre = std::pow(2.0, (p - 1.0) / p) + std::pow(2.0, 1.0 / p);
    CHECK(pre > 2.0);
    CHECK(pre < 3.0);
  }
}

TEST_CASE("psi and c_alpha") {
  CHECK(psi(7.0 / 18.0, 0.1) ==
        doctest::Approx(0.291588262512928542350460712127).epsilon(1e-13));
  CHECK(c_alpha(7.0 / 18.0) == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(c_alpha(0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(c_alpha(0.5), std::invalid_argument);
  CHECK_THROWS_AS(psi(0.1, 0.2), std::invalid_argument);  // gamma >= alpha
  CHECK_THROWS_AS(psi(1.0, 0.1), std::invalid_argument);
}

TEST_CASE("big-p reduction via Jensen") {
  const MomentAssumption big{4.0, 16.0, true};
  const MomentAssumption red = reduce_big_p(big);
  CHECK(red.p == 2.0);
  CHECK(red.v == doctest::Approx(4.0).epsilon(1e-14));  // 16^{2/4}
  CHECK(red.central);
  const MomentAssumption raw{3.0, 8.0, false};
  const MomentAssumption redr = reduce_big_p(raw);
  CHECK(redr.v == doctest::Approx(4.0).epsilon(1e-14));  // 8^{2/3}
  CHECK_FALSE(redr.central);
  CHECK_THROWS_AS(reduce_big_p(MomentAssumption{2.0, 1.0, true}),
                  std::invalid_argument);
}

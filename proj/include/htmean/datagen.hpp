#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "htmean/space.hpp"

namespace htmean {

enum class GenKind { LomaxSphere, GaussianSphere, MartingaleScale };

std::string to_string(GenKind k);
GenKind gen_kind_from_string(const std::string& s);

// Spherically symmetric heavy-tailed sample laws: X = mean_offset + sigma * Y * U
// with U uniform on the unit sphere. Y is Lomax(a) (density a(1+x)^{-(a+1)})
// for LomaxSphere and MartingaleScale, |N(0,1)| for GaussianSphere.
// MartingaleScale makes sigma a bounded predictable function of the previous
// sample, sigma_m = clamp(0.5 + |tanh(mart_coeff * sum(X_{m-1}) / sqrt(d))|,
// sigma_min, sigma_max); the others use sigma = 1.
struct GeneratorSpec {
  GenKind kind = GenKind::LomaxSphere;
  double a = 1.75;
  int64_t dim = 1;
  Vec mean_offset;  // empty = origin
  double mart_coeff = 1.0;
  double sigma_min = 0.5;
  double sigma_max = 1.5;
};

void validate_spec(const GeneratorSpec& spec);

// Deterministic stream: the same (seed, stream) pair reproduces the exact
// sample sequence on any platform and under any worker count. xoshiro256++
// state seeded via splitmix64 over seed and stream; uniforms live on (0,1];
// normals via the polar method (one spare cached).
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream);
  uint64_t next_u64();
  double unit();
  double normal();

 private:
  uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Inverse-CDF Lomax draw: x = U^{-1/a} - 1.
double sample_lomax(Rng& rng, double a);

// Uniform direction on the unit sphere in R^d (normalized Gaussian vector).
Vec sample_sphere(Rng& rng, int64_t d);

std::vector<Vec> generate(const GeneratorSpec& spec, int64_t n, Rng& rng);
std::vector<Vec> generate(const GeneratorSpec& spec, int64_t n, uint64_t seed,
                          uint64_t stream);

// True mean of the law (= mean_offset, padded to dim).
Vec generator_mean(const GeneratorSpec& spec);

// Conditional centered p-th moment bound v = sup E[||X - mu||^p | past]:
// Lomax magnitudes give Gamma(p+1)Gamma(a-p)/Gamma(a) (finite iff p < a),
// |N(0,1)| magnitudes give 2^{p/2}Gamma((p+1)/2)/sqrt(pi); MartingaleScale
// multiplies the Lomax value by sigma_max^p.
double moment_v(const GeneratorSpec& spec, double p);

}  // namespace htmean

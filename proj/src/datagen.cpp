#include "htmean/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace htmean {

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::string to_string(GenKind k) {
  switch (k) {
    case GenKind::LomaxSphere:
      return "lomax_sphere";
    case GenKind::GaussianSphere:
      return "gaussian_sphere";
    case GenKind::MartingaleScale:
      return "martingale_scale";
  }
  throw std::invalid_argument("unknown generator kind");
}

GenKind gen_kind_from_string(const std::string& s) {
  if (s == "lomax_sphere") return GenKind::LomaxSphere;
  if (s == "gaussian_sphere") return GenKind::GaussianSphere;
  if (s == "martingale_scale") return GenKind::MartingaleScale;
  throw std::invalid_argument(
      "unknown generator kind '" + s +
      "' (expected lomax_sphere|gaussian_sphere|martingale_scale)");
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.dim < 1) {
    throw std::invalid_argument("generator: dim must be >= 1");
  }
  if (spec.kind != GenKind::GaussianSphere &&
      (!(spec.a > 1.0) || !std::isfinite(spec.a))) {
    throw std::invalid_argument(
        "generator: Lomax shape a must be finite and > 1");
  }
  if (!spec.mean_offset.empty() &&
      static_cast<int64_t>(spec.mean_offset.size()) != spec.dim) {
    throw std::invalid_argument("generator: mean_offset dimension mismatch");
  }
  if (spec.kind == GenKind::MartingaleScale) {
    if (!(spec.sigma_min > 0.0) || !(spec.sigma_max >= spec.sigma_min) ||
        !std::isfinite(spec.sigma_max) || !std::isfinite(spec.mart_coeff)) {
      throw std::invalid_argument(
          "generator: need 0 < sigma_min <= sigma_max and finite mart_coeff");
    }
  }
}

Rng::Rng(uint64_t seed, uint64_t stream) {
  uint64_t a = seed;
  uint64_t b = stream ^ 0xD3833E804F4C574BULL;
  for (int i = 0; i < 4; ++i) s_[i] = splitmix64(a) ^ splitmix64(b);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // xoshiro needs nonzero state
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::unit() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * unit() - 1.0;
    v = 2.0 * unit() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double sample_lomax(Rng& rng, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("sample_lomax: a must be > 0");
  return std::pow(rng.unit(), -1.0 / a) - 1.0;
}

Vec sample_sphere(Rng& rng, int64_t d) {
  if (d < 1) throw std::invalid_argument("sample_sphere: d must be >= 1");
  Vec u(static_cast<std::size_t>(d));
  for (;;) {
    for (double& c : u) c = rng.normal();
    const double nrm = euclidean_norm(u);
    if (nrm > 0.0 && std::isfinite(nrm)) {
      for (double& c : u) c /= nrm;
      return u;
    }
  }
}

std::vector<Vec> generate(const GeneratorSpec& spec, int64_t n, Rng& rng) {
  validate_spec(spec);
  if (n < 0) throw std::invalid_argument("generate: n must be >= 0");
  const Vec offset = generator_mean(spec);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  Vec prev = zeros(spec.dim);  // X_0 for the scale recursion
  const double wcoef = spec.mart_coeff / std::sqrt(static_cast<double>(spec.dim));
  for (int64_t m = 0; m < n; ++m) {
    const double mag = spec.kind == GenKind::GaussianSphere
                           ? std::abs(rng.normal())
                           : sample_lomax(rng, spec.a);
    const Vec dir = sample_sphere(rng, spec.dim);
    double sigma = 1.0;
    if (spec.kind == GenKind::MartingaleScale) {
      double t = 0.0;
      for (double c : prev) t += c;
      sigma = std::clamp(0.5 + std::abs(std::tanh(wcoef * t)), spec.sigma_min,
                         spec.sigma_max);
    }
    Vec x = add(offset, scale(sigma * mag, dir));
    if (spec.kind == GenKind::MartingaleScale) prev = x;
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vec> generate(const GeneratorSpec& spec, int64_t n, uint64_t seed,
                          uint64_t stream) {
  Rng rng(seed, stream);
  return generate(spec, n, rng);
}

Vec generator_mean(const GeneratorSpec& spec) {
  if (spec.mean_offset.empty()) return zeros(spec.dim);
  if (static_cast<int64_t>(spec.mean_offset.size()) != spec.dim) {
    throw std::invalid_argument("generator: mean_offset dimension mismatch");
  }
  return spec.mean_offset;
}

double moment_v(const GeneratorSpec& spec, double p) {
  validate_spec(spec);
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("moment_v: p must be finite and > 0");
  }
  if (spec.kind == GenKind::GaussianSphere) {
    // E|N(0,1)|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
    return std::exp(0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1.0))) /
           std::sqrt(M_PI);
  }
  if (!(p < spec.a)) {
    throw std::domain_error("moment_v: E Y^p infinite for p >= a (p=" +
                            std::to_string(p) + ", a=" + std::to_string(spec.a) +
                            ")");
  }
  const double lomax =
      std::exp(std::lgamma(p + 1.0) + std::lgamma(spec.a - p) -
               std::lgamma(spec.a));
  if (spec.kind == GenKind::MartingaleScale) {
    return lomax * std::pow(spec.sigma_max, p);
  }
  return lomax;
}

}  // namespace htmean

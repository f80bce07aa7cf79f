#include "htmean/space.hpp"

#include <cmath>
#include <stdexcept>

namespace htmean {

SpaceSpec SpaceSpec::euclidean(int dim) {
  if (dim < 1) throw std::invalid_argument("space dim must be >= 1");
  SpaceSpec s;
  s.kind = SpaceKind::Euclidean;
  s.alpha = 2.0;
  s.dim = dim;
  return s;
}

SpaceSpec SpaceSpec::lp(double alpha, int dim) {
  if (dim < 1) throw std::invalid_argument("space dim must be >= 1");
  if (!(alpha >= 2.0) || !std::isfinite(alpha))
    throw std::invalid_argument("lp space needs alpha >= 2");
  SpaceSpec s;
  s.kind = SpaceKind::Lp;
  s.alpha = alpha;
  s.dim = dim;
  return s;
}

double norm(const SpaceSpec& space, const Vec& x) {
  if (static_cast<int>(x.size()) != space.dim)
    throw std::invalid_argument("norm: vector dim " + std::to_string(x.size()) +
                                " != space dim " + std::to_string(space.dim));
  if (space.kind == SpaceKind::Euclidean || space.alpha == 2.0) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::sqrt(s);
  }
  double s = 0.0;
  for (double c : x) s += std::pow(std::fabs(c), space.alpha);
  return std::pow(s, 1.0 / space.alpha);
}

double beta(const SpaceSpec& space) {
  if (space.kind == SpaceKind::Euclidean) return 1.0;
  return std::sqrt(space.alpha - 1.0);
}

bool is_hilbert(const SpaceSpec& space) {
  return space.kind == SpaceKind::Euclidean || space.alpha == 2.0;
}

std::string to_string(SpaceKind kind) {
  return kind == SpaceKind::Euclidean ? "euclidean" : "lp";
}

Vec zeros(int dim) { return Vec(static_cast<size_t>(dim), 0.0); }

static void check_dims(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

Vec add(const Vec& a, const Vec& b) {
  check_dims(a, b, "add");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  check_dims(a, b, "sub");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(double c, const Vec& a) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

void add_inplace(Vec& a, const Vec& b) {
  check_dims(a, b, "add_inplace");
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void axpy_inplace(Vec& a, double c, const Vec& b) {
  check_dims(a, b, "axpy_inplace");
  for (size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

double dot(const Vec& a, const Vec& b) {
  check_dims(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double euclidean_norm(const Vec& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

void validate_finite(const Vec& x) {
  for (double c : x)
    if (!std::isfinite(c))
      throw std::invalid_argument("non-finite coordinate in input vector");
}

void validate_points(const std::vector<Vec>& xs) {
  if (xs.empty()) throw std::invalid_argument("empty point set");
  const size_t d = xs.front().size();
  for (const Vec& x : xs) {
    if (x.size() != d)
      throw std::invalid_argument("inconsistent dimensions in point set");
    validate_finite(x);
  }
}

}  // namespace htmean

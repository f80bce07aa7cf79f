#pragma once

#include <string>
#include <vector>

namespace htmean {

using Vec = std::vector<double>;

enum class SpaceKind { Euclidean, Lp };

// Finite-dimensional sample space with a (2,beta)-smooth norm: Euclidean
// (beta = 1) or l^alpha with alpha >= 2 (beta = sqrt(alpha - 1)).
struct SpaceSpec {
  SpaceKind kind = SpaceKind::Euclidean;
  double alpha = 2.0;  // only meaningful for Lp
  int dim = 1;

  static SpaceSpec euclidean(int dim);
  static SpaceSpec lp(double alpha, int dim);
};

double norm(const SpaceSpec& space, const Vec& x);
double beta(const SpaceSpec& space);
bool is_hilbert(const SpaceSpec& space);

std::string to_string(SpaceKind kind);

// Plain vector arithmetic. All binary ops throw std::invalid_argument on
// dimension mismatch.
Vec zeros(int dim);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double c, const Vec& a);
void add_inplace(Vec& a, const Vec& b);
void axpy_inplace(Vec& a, double c, const Vec& b);  // a += c*b
double dot(const Vec& a, const Vec& b);
double euclidean_norm(const Vec& x);

// Throws if any coordinate is NaN/Inf or dims are inconsistent.
void validate_points(const std::vector<Vec>& xs);
void validate_finite(const Vec& x);

}  // namespace htmean

#pragma once

// Flat semi-Euclidean spaces E^{n+k}_k: n positive directions followed by k
// negative ones. The time coordinate of Minkowski space E^{n+1}_1 is last.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>

#include "geolab/errors.hpp"

namespace geolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class SemiSpace {
 public:
  SemiSpace(int positives, int negatives) : n_(positives), k_(negatives) {
    if (positives < 1 || negatives < 0)
      throw DimensionMismatch("SemiSpace needs n >= 1 and k >= 0");
  }

  /// E^{n+1}_1 with `spatial` positive directions and one time direction.
  static SemiSpace minkowski(int spatial) { return SemiSpace(spatial, 1); }

  int positives() const noexcept { return n_; }
  int negatives() const noexcept { return k_; }
  int dim() const noexcept { return n_ + k_; }

  /// Diagonal entry of the metric in the standard basis.
  double sign(int i) const noexcept { return i < n_ ? 1.0 : -1.0; }

  void require(const Vec& v) const {
    if (v.size() != dim())
      throw DimensionMismatch("vector of length " + std::to_string(v.size()) +
                              " in a space of dimension " + std::to_string(dim()));
  }

  friend bool operator==(const SemiSpace& a, const SemiSpace& b) {
    return a.n_ == b.n_ && a.k_ == b.k_;
  }

 private:
  int n_;
  int k_;
};

inline double inner(const SemiSpace& space, const Vec& a, const Vec& b) {
  space.require(a);
  space.require(b);
  const int n = space.positives();
  return a.head(n).dot(b.head(n)) - a.tail(space.negatives()).dot(b.tail(space.negatives()));
}

inline double inner_square(const SemiSpace& space, const Vec& a) { return inner(space, a, a); }

/// Negates the last k coordinates. inner(w, x) == euclid_flip(w).dot(x).
inline Vec euclid_flip(const SemiSpace& space, const Vec& w) {
  space.require(w);
  Vec out = w;
  out.tail(space.negatives()) *= -1.0;
  return out;
}

/// Metric raising of a covector given in coordinates. For a diagonal
/// signature metric this is the same coordinate operation as euclid_flip.
inline Vec raise(const SemiSpace& space, const Vec& covector) { return euclid_flip(space, covector); }

enum class Causal { spacelike, timelike, null, zero };

inline std::string_view to_string(Causal c) {
  switch (c) {
    case Causal::spacelike: return "spacelike";
    case Causal::timelike: return "timelike";
    case Causal::null: return "null";
    case Causal::zero: return "zero";
  }
  return "?";
}

/// Null band |<v,v>| <= 1e-9 * max(1, |v|^2_euclid).
inline double null_tolerance(const Vec& v) { return 1e-9 * std::max(1.0, v.squaredNorm()); }

inline Causal causal_character(const SemiSpace& space, const Vec& v) {
  space.require(v);
  if (v.isZero(0.0)) return Causal::zero;
  const double q = inner_square(space, v);
  if (std::abs(q) <= null_tolerance(v)) return Causal::null;
  return q > 0.0 ? Causal::spacelike : Causal::timelike;
}

}  // namespace geolab

#pragma once

// Double-description conversion: extreme rays and lineality space of the
// polyhedral cone {x : a_i . x >= 0}. Works over double (with a relative
// incidence tolerance) or over an exact field such as cpp_rational.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <type_traits>
#include <vector>

namespace geolab::dd {

template <class Scalar>
using Vector = std::vector<Scalar>;

template <class Scalar>
struct Cone {
  std::vector<Vector<Scalar>> rays;
  std::vector<Vector<Scalar>> lines;  // basis of the lineality space
};

namespace detail {

template <class Scalar>
Scalar dot(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  Scalar s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class Scalar>
Scalar abs_of(const Scalar& x) {
  return x < 0 ? Scalar(-x) : x;
}

template <class Scalar>
Scalar max_abs(const Vector<Scalar>& a) {
  Scalar m = 0;
  for (const Scalar& x : a) m = std::max(m, abs_of(x));
  return m;
}

/// Floating rays are kept at unit max-norm; exact rays are left alone.
template <class Scalar>
void normalize(Vector<Scalar>& v) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    const Scalar m = max_abs(v);
    if (m > 0)
      for (Scalar& x : v) x /= m;
  }
}

template <class Scalar>
struct Tolerance {
  double rel = 0.0;
  bool zero(const Scalar& s, const Vector<Scalar>& a, const Vector<Scalar>& r) const {
    if constexpr (std::is_floating_point_v<Scalar>)
      return std::abs(s) <= rel * max_abs(a) * max_abs(r) * static_cast<double>(a.size());
    else
      return s == 0;
  }
};

/// Rank of the given rows by Gaussian elimination with partial pivoting.
template <class Scalar>
int rank_of(std::vector<Vector<Scalar>> m, double rel) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  Scalar scale = 0;
  for (const auto& r : m) scale = std::max(scale, max_abs(r));
  int rank = 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(m.size()); ++c) {
    std::size_t piv = rank;
    for (std::size_t i = rank; i < m.size(); ++i)
      if (abs_of(m[i][c]) > abs_of(m[piv][c])) piv = i;
    bool negligible;
    if constexpr (std::is_floating_point_v<Scalar>)
      negligible = std::abs(m[piv][c]) <= rel * scale * static_cast<double>(cols);
    else
      negligible = m[piv][c] == 0;
    if (negligible) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      const Scalar f = m[i][c] / m[rank][c];
      if (f == 0) continue;
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Extreme rays and lines of {x in R^d : rows[i] . x >= 0}. Adjacent rays are
/// combined with the algebraic test: the rows tight at both must have rank
/// d - (number of lines) - 2.
template <class Scalar>
Cone<Scalar> double_description(const std::vector<Vector<Scalar>>& rows, int d, double rel_tol = 1e-9) {
  using V = Vector<Scalar>;
  const detail::Tolerance<Scalar> tol{rel_tol};
  Cone<Scalar> out;
  for (int i = 0; i < d; ++i) {
    V e(d, Scalar(0));
    e[i] = 1;
    out.lines.push_back(e);
  }
  struct Ray {
    V v;
    std::vector<std::size_t> zeros;  // processed rows tight at v (sorted)
  };
  std::vector<Ray> rays;
  std::vector<std::size_t> processed;

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const V& a = rows[k];
    if (detail::max_abs(a) == 0) continue;  // trivially satisfied

    // A line not orthogonal to a becomes a ray; the others are projected.
    std::size_t pivot = out.lines.size();
    Scalar best = 0;
    for (std::size_t i = 0; i < out.lines.size(); ++i) {
      const Scalar s = detail::dot(a, out.lines[i]);
      if (!tol.zero(s, a, out.lines[i]) && detail::abs_of(s) > best) {
        best = detail::abs_of(s);
        pivot = i;
      }
    }
    if (pivot < out.lines.size()) {
      V l = out.lines[pivot];
      Scalar al = detail::dot(a, l);
      if (al < 0) {
        for (Scalar& x : l) x = -x;
        al = -al;
      }
      out.lines.erase(out.lines.begin() + static_cast<std::ptrdiff_t>(pivot));
      for (V& m : out.lines) {
        const Scalar f = detail::dot(a, m) / al;
        for (int j = 0; j < d; ++j) m[j] -= f * l[j];
      }
      for (Ray& r : rays) {
        const Scalar f = detail::dot(a, r.v) / al;
        for (int j = 0; j < d; ++j) r.v[j] -= f * l[j];
        detail::normalize(r.v);
        r.zeros.push_back(k);
      }
      rays.push_back({l, processed});
      detail::normalize(rays.back().v);
      processed.push_back(k);
      continue;
    }

    std::vector<std::size_t> pos, neg;
    std::vector<Scalar> val(rays.size());
    std::vector<Ray> next;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      val[i] = detail::dot(a, rays[i].v);
      if (tol.zero(val[i], a, rays[i].v)) {
        Ray r = rays[i];
        r.zeros.push_back(k);
        next.push_back(std::move(r));
      } else if (val[i] > 0) {
        pos.push_back(i);
        next.push_back(rays[i]);
      } else {
        neg.push_back(i);
      }
    }
    const int needed = d - static_cast<int>(out.lines.size()) - 2;
    for (std::size_t ip : pos) {
      for (std::size_t in : neg) {
        std::vector<std::size_t> common;
        std::set_intersection(rays[ip].zeros.begin(), rays[ip].zeros.end(), rays[in].zeros.begin(),
                              rays[in].zeros.end(), std::back_inserter(common));
        if (static_cast<int>(common.size()) < needed) continue;
        if (needed > 0) {
          std::vector<V> tight;
          for (std::size_t j : common) tight.push_back(rows[j]);
          if (detail::rank_of(tight, rel_tol) != needed) continue;
        }
        V v(d);
        for (int j = 0; j < d; ++j) v[j] = val[ip] * rays[in].v[j] - val[in] * rays[ip].v[j];
        detail::normalize(v);
        common.push_back(k);
        next.push_back({std::move(v), std::move(common)});
      }
    }
    rays = std::move(next);
    processed.push_back(k);
  }
  for (Ray& r : rays) out.rays.push_back(std::move(r.v));
  return out;
}

using Rational = boost::multiprecision::cpp_rational;

/// Exact conversion of double input (every double is a rational).
inline Cone<Rational> double_description_exact(const std::vector<Vector<double>>& rows, int d) {
  std::vector<Vector<Rational>> q;
  for (const auto& r : rows) q.emplace_back(r.begin(), r.end());
  return double_description<Rational>(q, d);
}

}  // namespace geolab::dd

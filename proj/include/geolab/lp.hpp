#pragma once

// Small dense linear programs: two-phase tableau simplex with Dantzig pricing
// that falls back to Bland's rule after a run of degenerate pivots.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace geolab::lp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double inf = std::numeric_limits<double>::infinity();

enum class Sense { le, ge, eq };
enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "?";
}

struct Row {
  Vec coeffs;
  Sense sense;
  double rhs;
};

/// optimize c.x subject to rows and lower <= x <= upper (infinite bounds allowed).
/// Variables default to x >= 0.
struct Problem {
  explicit Problem(int n)
      : objective(Vec::Zero(n)), lower(Vec::Zero(n)), upper(Vec::Constant(n, inf)) {}

  int size() const { return static_cast<int>(objective.size()); }
  void add_row(Vec coeffs, Sense sense, double rhs) {
    if (coeffs.size() != objective.size()) throw std::invalid_argument("lp: row length mismatch");
    rows.push_back({std::move(coeffs), sense, rhs});
  }
  void free(int i) {
    lower(i) = -inf;
    upper(i) = inf;
  }
  void bounds(int i, double lo, double hi) {
    lower(i) = lo;
    upper(i) = hi;
  }

  Vec objective;
  bool maximize = false;
  std::vector<Row> rows;
  Vec lower;
  Vec upper;
};

struct Solution {
  Status status = Status::infeasible;
  Vec x;
  double value = 0.0;

  bool optimal() const noexcept { return status == Status::optimal; }
};

struct Options {
  double tol = 1e-9;
  std::size_t max_pivots = 50000;
  std::size_t degenerate_streak = 50;  // switch to Bland after this many
};

namespace detail {

// Tableau for min c.z, A z = b, z >= 0, b >= 0, with row 0 holding reduced costs.
class Tableau {
 public:
  Tableau(const Mat& A, const Vec& b, const Options& opts) : opts_(opts) {
    m_ = static_cast<int>(A.rows());
    n_ = static_cast<int>(A.cols());
    // columns: n_ structural, m_ artificial, rhs
    t_ = Mat::Zero(m_ + 1, n_ + m_ + 1);
    t_.block(1, 0, m_, n_) = A;
    t_.block(1, n_, m_, m_) = Mat::Identity(m_, m_);
    t_.block(1, n_ + m_, m_, 1) = b;
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  /// Phase 1: minimizes the sum of artificials.
  Status phase_one() {
    Vec cost = Vec::Zero(n_ + m_);
    cost.segment(n_, m_).setOnes();
    set_cost(cost);
    const Status s = iterate(n_ + m_);
    if (s != Status::optimal) return s;
    if (-t_(0, n_ + m_) > opts_.tol * std::max(1.0, t_.col(n_ + m_).tail(m_).lpNorm<Eigen::Infinity>()))
      return Status::infeasible;
    // Drive remaining artificial columns out of the basis where possible.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int best = -1;
      double mag = opts_.tol;
      for (int j = 0; j < n_; ++j)
        if (std::abs(t_(i + 1, j)) > mag) {
          mag = std::abs(t_(i + 1, j));
          best = j;
        }
      if (best >= 0) pivot(i, best);
      // otherwise the row is redundant; its artificial stays basic at zero.
    }
    return Status::optimal;
  }

  Status phase_two(const Vec& c) {
    Vec cost = Vec::Zero(n_ + m_);
    cost.head(n_) = c;
    set_cost(cost);
    return iterate(n_);
  }

  Vec primal() const {
    Vec z = Vec::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) z(basis_[i]) = t_(i + 1, n_ + m_);
    return z;
  }

 private:
  void set_cost(const Vec& cost) {
    t_.row(0).setZero();
    t_.row(0).head(n_ + m_) = cost.transpose();
    for (int i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) t_.row(0) -= cb * t_.row(i + 1);
    }
  }

  void pivot(int r, int c) {
    t_.row(r + 1) /= t_(r + 1, c);
    for (int i = 0; i <= m_; ++i)
      if (i != r + 1 && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r + 1);
    basis_[r] = c;
  }

  // Columns >= `limit` never enter (artificials in phase 2).
  Status iterate(int limit) {
    std::size_t degenerate = 0;
    const int rhs = n_ + m_;
    for (std::size_t it = 0; it < opts_.max_pivots; ++it) {
      const bool bland = degenerate >= opts_.degenerate_streak;
      int enter = -1;
      double best = -opts_.tol;
      for (int j = 0; j < limit; ++j) {
        if (t_(0, j) < best) {
          enter = j;
          if (bland) break;
          best = t_(0, j);
        }
      }
      if (enter < 0) return Status::optimal;
      int leave = -1;
      double ratio = inf;
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i + 1, enter);
        if (a <= 1e-12) continue;
        const double q = t_(i + 1, rhs) / a;
        if (q < ratio - 1e-12 || (std::abs(q - ratio) <= 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave < 0) return Status::unbounded;
      degenerate = ratio <= opts_.tol ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
    return Status::iteration_limit;
  }

  Options opts_;
  int m_ = 0;
  int n_ = 0;
  Mat t_;
  std::vector<int> basis_;
};

}  // namespace detail

inline Solution solve(const Problem& prob, const Options& opts = {}) {
  const int n = prob.size();
  // Map each original variable onto nonnegative standard variables:
  // x = offset + sign * z[pos] (- z[neg] for free variables).
  struct Map {
    int pos = -1, neg = -1;
    double offset = 0.0, sign = 1.0;
  };
  std::vector<Map> map(n);
  int cols = 0;
  std::vector<std::pair<int, double>> caps;  // z[pos] <= width
  for (int i = 0; i < n; ++i) {
    const double lo = prob.lower(i), hi = prob.upper(i);
    if (lo > hi) return {Status::infeasible, Vec(), 0.0};
    Map& mp = map[i];
    if (std::isfinite(lo)) {
      mp = {cols++, -1, lo, 1.0};
      if (std::isfinite(hi)) caps.emplace_back(mp.pos, hi - lo);
    } else if (std::isfinite(hi)) {
      mp = {cols++, -1, hi, -1.0};
    } else {
      mp.pos = cols++;
      mp.neg = cols++;
    }
  }
  const int structural = cols;
  const int m = static_cast<int>(prob.rows.size() + caps.size());
  int slacks = static_cast<int>(caps.size());
  for (const Row& r : prob.rows)
    if (r.sense != Sense::eq) ++slacks;

  Mat A = Mat::Zero(m, structural + slacks);
  Vec b(m);
  int row = 0, slack = structural;
  for (const Row& r : prob.rows) {
    double rhs = r.rhs;
    for (int i = 0; i < n; ++i) {
      const double a = r.coeffs(i);
      if (a == 0.0) continue;
      rhs -= a * map[i].offset;
      A(row, map[i].pos) += a * map[i].sign;
      if (map[i].neg >= 0) A(row, map[i].neg) -= a;
    }
    if (r.sense == Sense::le) A(row, slack++) = 1.0;
    if (r.sense == Sense::ge) A(row, slack++) = -1.0;
    b(row++) = rhs;
  }
  for (const auto& [col, width] : caps) {
    A(row, col) = 1.0;
    A(row, slack++) = 1.0;
    b(row++) = width;
  }
  for (int i = 0; i < m; ++i) {
    // unit max-norm rows with nonnegative right-hand side
    double scale = A.row(i).lpNorm<Eigen::Infinity>();
    if (scale == 0.0) scale = 1.0;
    if (b(i) < 0.0) scale = -scale;
    A.row(i) /= scale;
    b(i) /= scale;
  }

  Vec c = Vec::Zero(A.cols());
  const double dir = prob.maximize ? -1.0 : 1.0;
  for (int i = 0; i < n; ++i) {
    c(map[i].pos) += dir * prob.objective(i) * map[i].sign;
    if (map[i].neg >= 0) c(map[i].neg) -= dir * prob.objective(i);
  }

  detail::Tableau tab(A, b, opts);
  Solution sol;
  sol.status = tab.phase_one();
  if (sol.status != Status::optimal) return sol;
  sol.status = tab.phase_two(c);
  const Vec z = tab.primal();
  sol.x.resize(n);
  for (int i = 0; i < n; ++i) {
    sol.x(i) = map[i].offset + map[i].sign * z(map[i].pos);
    if (map[i].neg >= 0) sol.x(i) -= z(map[i].neg);
  }
  sol.value = prob.objective.dot(sol.x);
  return sol;
}

}  // namespace geolab::lp

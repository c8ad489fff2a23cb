#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mergesim/decision.hpp"
#include "mergesim/longitudinal.hpp"

namespace mergesim {

/// Row-major dense matrix for small bimatrix games.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw std::invalid_argument("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }
  static DenseMatrix from(const Matrix2& m) {
    return DenseMatrix{{m[0][0], m[0][1]}, {m[1][0], m[1][1]}};
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Mixed strategy profile; `row` for the row player (A), `col` for the column player (B).
struct Equilibrium {
  std::vector<double> row;
  std::vector<double> col;
  SolverPath path = SolverPath::LemkeHowson;
};

namespace nash_detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double max_abs(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  for (double x : b.data()) m = std::max(m, std::abs(x));
  return m;
}

inline void check_game(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("nash: empty game");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("nash: payoff matrices differ in shape");
  for (double x : a.data())
    if (!std::isfinite(x)) throw std::invalid_argument("nash: non-finite payoff");
  for (double x : b.data())
    if (!std::isfinite(x)) throw std::invalid_argument("nash: non-finite payoff");
}

// Equations  basic + sum(coeff * nonbasic) = rhs  over variables indexed by
// label. `slack_first` is the first label of the initial (slack) basis.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t vars, std::size_t slack_first)
      : rows_(rows), vars_(vars), slack_first_(slack_first),
        coef_(rows * (vars + 1), 0.0), basis_(rows) {
    for (std::size_t r = 0; r < rows; ++r) {
      basis_[r] = slack_first + r;
      at(r, slack_first + r) = 1.0;
      rhs(r) = 1.0;
    }
  }

  double& at(std::size_t r, std::size_t c) { return coef_[r * (vars_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return coef_[r * (vars_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, vars_); }
  double rhs(std::size_t r) const { return at(r, vars_); }

  // Lexicographic minimum-ratio test; returns the leaving label, or nullopt if
  // the entering column has no positive entry.
  std::optional<std::size_t> pivot(std::size_t entering) {
    constexpr double kPivotEps = 1e-12;
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (at(r, entering) <= kPivotEps) continue;
      if (!best || lex_less(r, *best, entering)) best = r;
    }
    if (!best) return std::nullopt;
    const std::size_t pr = *best;
    const double piv = at(pr, entering);
    for (std::size_t c = 0; c <= vars_; ++c) at(pr, c) /= piv;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, entering);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= vars_; ++c) at(r, c) -= f * at(pr, c);
      at(r, entering) = 0.0;
    }
    const std::size_t leaving = basis_[pr];
    basis_[pr] = entering;
    return leaving;
  }

  std::vector<double> values(std::size_t first_label, std::size_t count) const {
    std::vector<double> out(count, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::size_t lbl = basis_[r];
      if (lbl >= first_label && lbl < first_label + count)
        out[lbl - first_label] = std::max(0.0, rhs(r));
    }
    return out;
  }

 private:
  bool lex_less(std::size_t r1, std::size_t r2, std::size_t e) const {
    const double p1 = at(r1, e), p2 = at(r2, e);
    auto cmp = [&](double a, double b) {
      const double x = a / p1, y = b / p2;
      const double tol = 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
      if (x < y - tol) return -1;
      if (x > y + tol) return 1;
      return 0;
    };
    if (int c = cmp(rhs(r1), rhs(r2)); c != 0) return c < 0;
    for (std::size_t k = 0; k < rows_; ++k) {
      const std::size_t col = slack_first_ + k;
      if (int c = cmp(at(r1, col), at(r2, col)); c != 0) return c < 0;
    }
    return r1 < r2;
  }

  std::size_t rows_, vars_, slack_first_;
  std::vector<double> coef_;
  std::vector<std::size_t> basis_;
};

// Dense Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> m,
                                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (std::abs(m[piv][c]) < 1e-12) return std::nullopt;
    std::swap(m[piv], m[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= m[i][i];
  return b;
}

// Mixture over `support` of the opponent that makes every strategy in
// `own_support` equally good for the player whose payoffs are pay(own, opp).
template <typename Pay>
std::optional<std::vector<double>> indifference_mixture(const std::vector<std::size_t>& own_support,
                                                        const std::vector<std::size_t>& opp_support,
                                                        std::size_t opp_count, Pay pay) {
  const std::size_t k = own_support.size();
  std::vector<std::vector<double>> m(k + 1, std::vector<double>(k + 1, 0.0));
  std::vector<double> rhs(k + 1, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) m[r][c] = pay(own_support[r], opp_support[c]);
    m[r][k] = -1.0;
  }
  for (std::size_t c = 0; c < k; ++c) m[k][c] = 1.0;
  rhs[k] = 1.0;
  auto sol = solve_linear(std::move(m), std::move(rhs));
  if (!sol) return std::nullopt;
  std::vector<double> mix(opp_count, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if ((*sol)[c] < -1e-12) return std::nullopt;
    mix[opp_support[c]] = std::max(0.0, (*sol)[c]);
  }
  return mix;
}

inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<bool(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (fn(idx)) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace nash_detail

/// Row player's expected payoff per pure strategy against column mixture `y`.
inline std::vector<double> row_payoffs(const DenseMatrix& a, const std::vector<double>& y) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * y[j];
  return out;
}

/// Column player's expected payoff per pure strategy against row mixture `x`.
inline std::vector<double> col_payoffs(const DenseMatrix& b, const std::vector<double>& x) {
  std::vector<double> out(b.cols(), 0.0);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out[j] += b(i, j) * x[i];
  return out;
}

/// Largest gain either player can obtain by a unilateral pure deviation.
inline double nash_regret(const DenseMatrix& a, const DenseMatrix& b, const std::vector<double>& x,
                          const std::vector<double>& y) {
  const auto pr = row_payoffs(a, y);
  const auto pc = col_payoffs(b, x);
  const double vr = nash_detail::dot(x, pr);
  const double vc = nash_detail::dot(y, pc);
  return std::max(*std::max_element(pr.begin(), pr.end()) - vr,
                  *std::max_element(pc.begin(), pc.end()) - vc);
}

inline bool is_epsilon_nash(const DenseMatrix& a, const DenseMatrix& b, const std::vector<double>& x,
                            const std::vector<double>& y, double eps) {
  auto is_mixture = [](const std::vector<double>& p) {
    double s = 0.0;
    for (double q : p) {
      if (q < -1e-12 || !std::isfinite(q)) return false;
      s += q;
    }
    return std::abs(s - 1.0) <= 1e-9;
  };
  return is_mixture(x) && is_mixture(y) && nash_regret(a, b, x, y) <= eps;
}

/// Equal-size support enumeration. Finds an equilibrium of every 2x2 game
/// (pure profiles are the size-1 supports); larger degenerate games may have
/// none with equal-size supports.
inline std::optional<Equilibrium> support_enumeration(const DenseMatrix& a, const DenseMatrix& b) {
  nash_detail::check_game(a, b);
  const std::size_t m = a.rows(), n = a.cols();
  const double eps = 1e-9 * std::max(1.0, nash_detail::max_abs(a, b));
  std::optional<Equilibrium> found;
  for (std::size_t k = 1; k <= std::min(m, n) && !found; ++k) {
    nash_detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& rows) {
      nash_detail::for_each_subset(n, k, [&](const std::vector<std::size_t>& cols) {
        // y makes the row player indifferent over `rows`; x likewise for columns.
        auto y = nash_detail::indifference_mixture(rows, cols, n,
                                                   [&](std::size_t i, std::size_t j) { return a(i, j); });
        if (!y) return false;
        auto x = nash_detail::indifference_mixture(cols, rows, m,
                                                   [&](std::size_t j, std::size_t i) { return b(i, j); });
        if (!x) return false;
        if (!is_epsilon_nash(a, b, *x, *y, eps)) return false;
        found = Equilibrium{*x, *y, SolverPath::SupportEnumeration};
        return true;
      });
      return found.has_value();
    });
  }
  return found;
}

/// Lemke-Howson complementary pivoting from the given dropped label (labels
/// 0..m-1 are row strategies, m..m+n-1 column strategies). Payoffs are shifted
/// positive internally. If pivoting fails or the result does not verify, the
/// game is solved by support enumeration and `path` says so.
inline Equilibrium lemke_howson(const DenseMatrix& a, const DenseMatrix& b,
                                std::size_t initial_label = 0) {
  nash_detail::check_game(a, b);
  const std::size_t m = a.rows(), n = a.cols();
  if (initial_label >= m + n) throw std::invalid_argument("lemke_howson: label out of range");

  double lo = 0.0;
  for (double v : a.data()) lo = std::min(lo, v);
  for (double v : b.data()) lo = std::min(lo, v);
  const double shift = 1.0 - lo;

  // P: B'^T x + s = 1   (labels: x_i -> i, s_j -> m + j)
  // Q: r + A' y = 1     (labels: r_i -> i, y_j -> m + j)
  nash_detail::Tableau P(n, m + n, m);
  nash_detail::Tableau Q(m, m + n, 0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) P.at(j, i) = b(i, j) + shift;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Q.at(i, m + j) = a(i, j) + shift;

  const double eps = 1e-9 * std::max(1.0, nash_detail::max_abs(a, b));
  std::size_t entering = initial_label;
  bool in_p = initial_label < m;
  bool ok = false;
  const std::size_t max_pivots = 64 * (m + n);
  for (std::size_t it = 0; it < max_pivots; ++it) {
    auto leaving = (in_p ? P : Q).pivot(entering);
    if (!leaving) break;
    if (*leaving == initial_label) {
      ok = true;
      break;
    }
    entering = *leaving;
    in_p = !in_p;
  }

  if (ok) {
    auto x = P.values(0, m);
    auto y = Q.values(m, n);
    const double sx = std::accumulate(x.begin(), x.end(), 0.0);
    const double sy = std::accumulate(y.begin(), y.end(), 0.0);
    if (sx > 0.0 && sy > 0.0) {
      for (double& v : x) v /= sx;
      for (double& v : y) v /= sy;
      if (is_epsilon_nash(a, b, x, y, eps)) return Equilibrium{x, y, SolverPath::LemkeHowson};
    }
  }
  if (auto e = support_enumeration(a, b)) return *e;
  throw std::runtime_error("lemke_howson: no equilibrium found");
}

inline Equilibrium lemke_howson(const Matrix2& a, const Matrix2& b, std::size_t initial_label = 0) {
  return lemke_howson(DenseMatrix::from(a), DenseMatrix::from(b), initial_label);
}

}  // namespace mergesim

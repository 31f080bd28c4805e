#include "crn/exact.hpp"

#include <boost/integer/common_factor.hpp>
#include <limits>
#include <stdexcept>

namespace crn {

RationalMatrix::RationalMatrix(const IntMatrix& m)
    : rows_(static_cast<std::size_t>(m.rows())), cols_(static_cast<std::size_t>(m.cols())), data_(rows_ * cols_) {
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = Rational(m(i, j));
}

RationalMatrix RationalMatrix::transposed() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

EchelonForm reduced_row_echelon(RationalMatrix m) {
  EchelonForm out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t pivot = row;
    while (pivot < m.rows() && m(pivot, col) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != row)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(pivot, j), m(row, j));
    const Rational inv = Rational(1) / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      const Rational factor = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= factor * m(row, j);
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.reduced = std::move(m);
  return out;
}

std::size_t exact_rank(const IntMatrix& m) { return reduced_row_echelon(RationalMatrix(m)).pivots.size(); }

void normalize_sign(IntVector& v) {
  for (long long x : v) {
    if (x == 0) continue;
    if (x < 0)
      for (long long& y : v) y = -y;
    return;
  }
}

IntVector primitive_integer_vector(const std::vector<Rational>& v) {
  BigInt lcm = 1;
  for (const Rational& x : v) {
    if (x == 0) continue;
    lcm = boost::integer::lcm(lcm, BigInt(boost::multiprecision::denominator(x)));
  }
  std::vector<BigInt> scaled;
  scaled.reserve(v.size());
  BigInt g = 0;
  for (const Rational& x : v) {
    BigInt s = boost::multiprecision::numerator(x) * (lcm / boost::multiprecision::denominator(x));
    g = boost::integer::gcd(g, BigInt(abs(s)));
    scaled.push_back(std::move(s));
  }
  IntVector out;
  out.reserve(v.size());
  for (const BigInt& s : scaled) {
    const BigInt q = g == 0 ? BigInt(0) : BigInt(s / g);
    if (abs(q) > BigInt(std::numeric_limits<long long>::max()))
      throw std::overflow_error("integer vector entry exceeds 64 bits");
    out.push_back(q.convert_to<long long>());
  }
  return out;
}

std::vector<IntVector> integer_kernel(const IntMatrix& m) {
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  const EchelonForm ef = reduced_row_echelon(RationalMatrix(m));
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : ef.pivots) is_pivot[p] = true;

  std::vector<IntVector> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols);
    v[free] = 1;
    for (std::size_t i = 0; i < ef.pivots.size(); ++i) v[ef.pivots[i]] = -ef.reduced(i, free);
    IntVector iv = primitive_integer_vector(v);
    normalize_sign(iv);
    basis.push_back(std::move(iv));
  }
  return basis;
}

namespace {

// Tableau with the objective stored as the last row; rhs is the last column.
struct Tableau {
  std::size_t m = 0;      // constraint rows
  std::size_t width = 0;  // variable columns
  std::vector<std::vector<Rational>> t;
  std::vector<std::size_t> basis;

  Rational& rhs(std::size_t i) { return t[i][width]; }

  void pivot(std::size_t row, std::size_t col) {
    const Rational inv = Rational(1) / t[row][col];
    for (Rational& x : t[row]) x *= inv;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == row || t[i][col] == 0) continue;
      const Rational f = t[i][col];
      for (std::size_t j = 0; j <= width; ++j)
        if (t[row][j] != 0) t[i][j] -= f * t[row][j];
    }
    basis[row] = col;
  }

  // Returns false when unbounded.
  bool optimize(std::size_t allowed_cols) {
    auto& cost = t[m];
    for (;;) {
      std::size_t enter = allowed_cols;
      for (std::size_t j = 0; j < allowed_cols; ++j)
        if (cost[j] < 0) {
          enter = j;
          break;
        }
      if (enter == allowed_cols) return true;
      std::size_t leave = m;
      Rational best;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= 0) continue;
        Rational ratio = t[i][width] / t[i][enter];
        if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const RationalMatrix& a, std::vector<Rational> b, const std::vector<Rational>& c) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("solve_lp: dimension mismatch");

  Tableau tab;
  tab.m = m;
  tab.width = n + m;
  tab.t.assign(m + 1, std::vector<Rational>(tab.width + 1));
  tab.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = b[i] < 0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = flip ? Rational(-a(i, j)) : a(i, j);
    tab.t[i][n + i] = 1;
    tab.rhs(i) = flip ? Rational(-b[i]) : b[i];
    tab.basis[i] = n + i;
  }
  // Phase I: minimize the sum of artificials.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= tab.width; ++j)
      if (j < n || j == tab.width) tab.t[m][j] -= tab.t[i][j];
  tab.optimize(tab.width);

  LpResult result;
  if (tab.t[m][tab.width] != 0) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; rows that cannot be
  // pivoted are redundant and dropped.
  for (std::size_t i = 0; i < tab.m;) {
    if (tab.basis[i] < n) {
      ++i;
      continue;
    }
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j)
      if (tab.t[i][j] != 0) {
        col = j;
        break;
      }
    if (col < n) {
      tab.pivot(i, col);
      ++i;
    } else {
      tab.t.erase(tab.t.begin() + static_cast<std::ptrdiff_t>(i));
      tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
      --tab.m;
    }
  }

  // Phase II objective in reduced form.
  auto& cost = tab.t[tab.m];
  std::fill(cost.begin(), cost.end(), Rational(0));
  for (std::size_t j = 0; j < n; ++j) cost[j] = c[j];
  for (std::size_t i = 0; i < tab.m; ++i) {
    const Rational cb = c[tab.basis[i]];
    if (cb == 0) continue;
    for (std::size_t j = 0; j <= tab.width; ++j) cost[j] -= cb * tab.t[i][j];
  }
  if (!tab.optimize(n)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < tab.m; ++i) result.x[tab.basis[i]] = tab.rhs(i);
  result.objective = 0;
  for (std::size_t j = 0; j < n; ++j) result.objective += c[j] * result.x[j];
  return result;
}

}  // namespace crn

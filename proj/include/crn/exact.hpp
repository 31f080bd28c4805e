#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>

namespace crn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = std::vector<long long>;

// Dense row-major matrix over the rationals. Small sizes only (stoichiometry).
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit RationalMatrix(const IntMatrix& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RationalMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

struct EchelonForm {
  RationalMatrix reduced;           // only the first pivots.size() rows are non-zero
  std::vector<std::size_t> pivots;  // pivot column of each non-zero row, increasing
};

EchelonForm reduced_row_echelon(RationalMatrix m);

std::size_t exact_rank(const IntMatrix& m);

/// Basis of ker(m) over the integers. One vector per free column of the
/// reduced row echelon form, in increasing free-column order; each vector is
/// primitive and its first non-zero entry is positive.
std::vector<IntVector> integer_kernel(const IntMatrix& m);

/// Scales a rational vector to a primitive integer vector with the same
/// direction (sign preserved). The zero vector maps to zeros.
IntVector primitive_integer_vector(const std::vector<Rational>& v);

/// Flips sign so that the first non-zero entry is positive.
void normalize_sign(IntVector& v);

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<Rational> x;
  Rational objective;
};

/// minimize c.x subject to A x = b, x >= 0, exactly.
/// Two-phase tableau simplex with Bland's rule, so it always terminates.
LpResult solve_lp(const RationalMatrix& a, std::vector<Rational> b, const std::vector<Rational>& c);

}  // namespace crn

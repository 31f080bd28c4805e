#include <doctest.h>

#include <numeric>
#include <random>

#include <Eigen/SVD>

#include "crn/exact.hpp"

using namespace crn;

namespace {

IntMatrix random_int_matrix(std::mt19937_64& g, int rows, int cols, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  IntMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(g);
  return m;
}

// Numerical rank by singular values: an independent oracle for small integer matrices.
std::size_t svd_rank(const IntMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.cast<double>());
  const auto& s = svd.singularValues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s[i] > 1e-9 * std::max(1.0, s[0]);
  return r;
}

}  // namespace

TEST_CASE("reduced row echelon form of a known matrix") {
  IntMatrix m(2, 3);
  m << 2, 4, 6, 1, 3, 5;
  const auto ef = reduced_row_echelon(RationalMatrix(m));
  REQUIRE(ef.pivots == std::vector<std::size_t>{0, 1});
  CHECK(ef.reduced(0, 0) == 1);
  CHECK(ef.reduced(0, 1) == 0);
  CHECK(ef.reduced(0, 2) == -1);
  CHECK(ef.reduced(1, 2) == 2);
}

TEST_CASE("exact rank agrees with singular value rank") {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = 1 + trial % 5, cols = 1 + (trial / 5) % 6;
    IntMatrix m = random_int_matrix(g, rows, cols, -2, 2);
    if (trial % 3 == 0 && rows > 1) m.row(rows - 1) = m.row(0) - 2 * m.row(rows - 2);
    CHECK(exact_rank(m) == svd_rank(m));
  }
}

TEST_CASE("integer kernel vectors are primitive, sign-normalized solutions") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + trial % 4, cols = 2 + trial % 5;
    const IntMatrix m = random_int_matrix(g, rows, cols, -3, 3);
    const auto ker = integer_kernel(m);
    CHECK(ker.size() == static_cast<std::size_t>(cols) - exact_rank(m));
    for (const auto& v : ker) {
      Eigen::Matrix<long long, Eigen::Dynamic, 1> x(cols);
      for (int j = 0; j < cols; ++j) x[j] = v[static_cast<std::size_t>(j)];
      CHECK((m * x).isZero());
      long long gcd = 0, first = 0;
      for (auto e : v) {
        gcd = std::gcd(gcd, std::llabs(e));
        if (first == 0) first = e;
      }
      CHECK(gcd == 1);
      CHECK(first > 0);
    }
    // Independent: the kernel matrix has full column rank.
    if (!ker.empty()) {
      IntMatrix k(cols, static_cast<Eigen::Index>(ker.size()));
      for (std::size_t c = 0; c < ker.size(); ++c)
        for (int j = 0; j < cols; ++j) k(j, static_cast<Eigen::Index>(c)) = ker[c][static_cast<std::size_t>(j)];
      CHECK(exact_rank(k) == ker.size());
    }
  }
}

TEST_CASE("primitive integer vector keeps direction") {
  const std::vector<Rational> v{Rational(1, 2), Rational(-3, 4), 0};
  CHECK(primitive_integer_vector(v) == IntVector{2, -3, 0});
  CHECK(primitive_integer_vector({0, 0}) == IntVector{0, 0});
  IntVector w{0, -2, 1};
  normalize_sign(w);
  CHECK(w == IntVector{0, 2, -1});
}

TEST_CASE("linear programs: optimal, infeasible, unbounded") {
  // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
  RationalMatrix a(2, 4);
  a(0, 0) = 1, a(0, 1) = 2, a(0, 2) = 1;
  a(1, 0) = 3, a(1, 1) = 1, a(1, 3) = 1;
  auto r = solve_lp(a, {4, 6}, {-1, -1, 0, 0});
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == Rational(-14, 5));
  CHECK(r.x[0] == Rational(8, 5));
  CHECK(r.x[1] == Rational(6, 5));

  RationalMatrix b(1, 2);
  b(0, 0) = 1, b(0, 1) = 1;
  CHECK(solve_lp(b, {-1}, {0, 0}).status == LpStatus::Infeasible);

  RationalMatrix c(1, 2);
  c(0, 0) = 1, c(0, 1) = -1;
  CHECK(solve_lp(c, {0}, {-1, 0}).status == LpStatus::Unbounded);
}

TEST_CASE("degenerate linear program with redundant rows terminates") {
  RationalMatrix a(3, 3);
  a(0, 0) = 1, a(0, 1) = 1, a(0, 2) = 1;
  a(1, 0) = 2, a(1, 1) = 2, a(1, 2) = 2;
  a(2, 0) = 1, a(2, 1) = -1;
  auto r = solve_lp(a, {1, 2, 0}, {0, 0, 1});
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == 0);
  CHECK(r.x[0] == Rational(1, 2));
  CHECK(r.x[1] == Rational(1, 2));
}

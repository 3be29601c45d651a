#pragma once

// Generators and independent oracles shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "blocktri/block_tridiag.hpp"
#include "blocktri/random.hpp"

namespace blocktri::testing {

inline Index uniform_size(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline ComplexMatrix conjugated(const ComplexMatrix& u, const ComplexMatrix& t) {
  return u * t * u.adjoint();
}

/// E_{i,j} with 1-based indices.
inline ComplexMatrix unit_matrix(Index n, Index i, Index j) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(i - 1, j - 1) = 1.0;
  return e;
}

/// Plain triple loop product, independent of Eigen's kernels.
inline ComplexMatrix naive_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c = ComplexMatrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

/// Bottleneck distance by brute force over all permutations (small sizes).
inline double brute_force_matching(const ComplexVector& a, const ComplexVector& b) {
  std::vector<Index> perm(static_cast<size_t>(a.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a(i) - b(perm[static_cast<size_t>(i)])));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Roots of the characteristic polynomial of a 2x2 matrix.
inline std::pair<Complex, Complex> eigenvalues_2x2(const ComplexMatrix& m) {
  const Complex tr = m(0, 0) + m(1, 1);
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Complex disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

inline ComplexVector from_list(std::initializer_list<Complex> values) {
  ComplexVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (Complex x : values) v(i++) = x;
  return v;
}

/// Blocks with Gaussian entries scaled so that every block of level n has
/// norm at most bound(n) = 2^-n.
inline BlockTridiagOperator random_operator(const BlockSchedule& s, Rng& rng) {
  std::vector<ComplexMatrix> diag, upper, lower;
  const auto scaled = [](ComplexMatrix m, double bound) {
    const double nm = operator_norm(m);
    return nm > 0.0 ? ComplexMatrix(m * (bound / nm)) : m;
  };
  for (int n = 1; n <= s.levels(); ++n) {
    const double bound = std::ldexp(1.0, -n);
    diag.push_back(scaled(random_complex_matrix(s.size(n), s.size(n), rng), bound));
    if (n < s.levels()) {
      upper.push_back(
          scaled(random_complex_matrix(s.size(n), s.size(n + 1), rng), bound));
      lower.push_back(
          scaled(random_complex_matrix(s.size(n + 1), s.size(n), rng), bound));
    }
  }
  return BlockTridiagOperator::from_blocks(s, std::move(diag), std::move(upper),
                                           std::move(lower));
}

/// Dense assembly of the first n levels written out entry by entry.
inline ComplexMatrix assemble_by_hand(const BlockTridiagOperator& op, int n) {
  const BlockSchedule& s = op.schedule();
  ComplexMatrix m = ComplexMatrix::Zero(s.cumsum(n), s.cumsum(n));
  for (int j = 1; j <= n; ++j) {
    const Index o = s.offset(j);
    const ComplexMatrix& c = op.diag_block(j);
    for (Index r = 0; r < c.rows(); ++r)
      for (Index q = 0; q < c.cols(); ++q) m(o + r, o + q) = c(r, q);
    if (j < n) {
      const Index o2 = s.offset(j + 1);
      const ComplexMatrix& a = op.upper_block(j);
      const ComplexMatrix& b = op.lower_block(j);
      for (Index r = 0; r < a.rows(); ++r)
        for (Index q = 0; q < a.cols(); ++q) m(o + r, o2 + q) = a(r, q);
      for (Index r = 0; r < b.rows(); ++r)
        for (Index q = 0; q < b.cols(); ++q) m(o2 + r, o + q) = b(r, q);
    }
  }
  return m;
}

}  // namespace blocktri::testing

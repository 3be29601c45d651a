#include "blocktri/random.hpp"

#include <Eigen/QR>

namespace blocktri {

ComplexMatrix random_complex_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

ComplexMatrix random_unitary(Index n, Rng& rng) {
  const ComplexMatrix g = random_complex_matrix(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const double mod = std::abs(r(j, j));
    if (mod > 0.0) q.col(j) *= r(j, j) / mod;
  }
  return q;
}

ComplexMatrix random_upper_triangular(Index n, Rng& rng) {
  ComplexMatrix t = random_complex_matrix(n, n, rng);
  t.triangularView<Eigen::StrictlyLower>().setZero();
  return t;
}

}  // namespace blocktri

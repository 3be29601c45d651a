#pragma once

// Dense complex linear algebra used by every other module: norms, spectra,
// Schur forms, nilpotency tests and the shift / corner generator matrices.

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blocktri {

using Complex = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using ComplexMatrix = DenseMatrix<Complex>;
using ComplexVector = DenseVector<Complex>;

/// Raised when operands have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the Schur iteration does not converge or its result fails
/// the residual checks. Carries the offending residual.
class SchurFailure : public std::runtime_error {
 public:
  SchurFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct Tolerances {
  double unit = 1e-10;   // unitarity
  double tri = 1e-10;    // strictly-lower mass
  double recon = 1e-10;  // reconstruction, relative to the input norm
  double nil = 1e-8;     // nilpotency
};

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string(what) + ": matrix must be square, got " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
}

template <typename DerivedA, typename DerivedB>
void require_same_square(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b,
                         const char* what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows())
    throw DimensionError(std::string(what) + ": size mismatch " +
                         std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
}

/// Largest singular value.
template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  using Plain = typename Derived::PlainObject;
  const Plain m = a;
  if (m.isZero(0.0)) return 0.0;
  Eigen::BDCSVD<Plain> svd(m);
  return svd.singularValues()(0);
}

/// Largest entry modulus.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Largest modulus strictly below the diagonal.
template <typename Derived>
double strictly_lower_max(const Eigen::MatrixBase<Derived>& a) {
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = j + 1; i < a.rows(); ++i)
      worst = std::max(worst, std::abs(a(i, j)));
  return worst;
}

/// max |a^* a - I|, entrywise.
template <typename Derived>
double unitarity_residual(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  const Plain gram = a.adjoint() * a;
  return max_abs(gram - Plain::Identity(gram.rows(), gram.cols()));
}

template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a,
                const Eigen::MatrixBase<DerivedB>& b) {
  require_same_square(a, b, "commutator");
  using Plain = typename DerivedA::PlainObject;
  Plain result = a * b;
  result.noalias() -= b * a;
  return result;
}

template <typename Derived>
typename Derived::PlainObject matrix_power(const Eigen::MatrixBase<Derived>& a,
                                           Index k) {
  require_square(a, "matrix_power");
  using Plain = typename Derived::PlainObject;
  Plain result = Plain::Identity(a.rows(), a.cols());
  Plain base = a;
  while (k > 0) {
    if (k & 1) result = (result * base).eval();
    k >>= 1;
    if (k > 0) base = (base * base).eval();
  }
  return result;
}

/// Upper shift: ones on the first superdiagonal.
ComplexMatrix shift_matrix(Index n);
/// Single one in the bottom-left corner.
ComplexMatrix corner_unit(Index n);

ComplexMatrix block_diagonal(std::span<const ComplexMatrix> blocks);

/// Eigenvalues with multiplicity.
///
/// The nonzero pattern of `a` is first split into strongly connected
/// components; the spectrum is the union of the spectra of the induced
/// principal submatrices (block-triangular permutation). Components of size
/// one contribute their diagonal entry exactly, so structurally triangular
/// and structurally nilpotent matrices get exact spectra. Remaining
/// components go through the complex Schur iteration.
ComplexVector eigenvalues(const ComplexMatrix& a);

/// Eigenvalues from a single dense Schur iteration, with no structural
/// reduction.
ComplexVector dense_eigenvalues(const ComplexMatrix& a);

struct SpectralRadius {
  double value = 0.0;       // max modulus over eigenvalues (authoritative)
  double gelfand_n = 0.0;   // ||a^N||^(1/N)
  double gelfand_2n = 0.0;  // ||a^(2N)||^(1/(2N))
};

SpectralRadius spectral_radius(const ComplexMatrix& a);

/// True iff the N-th power of a/||a|| has norm at most `tol`; N is the
/// dimension. The zero matrix is nilpotent.
bool is_nilpotent(const ComplexMatrix& a, double tol = 1e-8);

struct SchurForm {
  ComplexMatrix unitary;
  ComplexMatrix upper;
};

struct SchurResiduals {
  double unitarity = 0.0;
  double strictly_lower = 0.0;
  double reconstruction = 0.0;  // max |U T U^* - a|
};

SchurResiduals schur_residuals(const ComplexMatrix& a, const SchurForm& form);

/// Complex Schur decomposition a = U T U^*. The returned `upper` is exactly
/// upper triangular; the discarded strictly-lower mass is checked against
/// `tol.tri * (1 + ||T||)` before zeroing. Throws SchurFailure when the
/// iteration fails or a residual exceeds its tolerance.
SchurForm schur(const ComplexMatrix& a, const Tolerances& tol = {});

/// Reorders the diagonal of a Schur form with adjacent unitary swaps so that
/// `before(x, y)` holds for no later-earlier pair. The form stays a valid
/// Schur decomposition of the same matrix.
void reorder_schur(SchurForm& form,
                   const std::function<bool(Complex, Complex)>& before);

/// Nonincreasing modulus, ties by (real, imaginary) ascending.
bool modulus_descending(Complex x, Complex y);

/// Bottleneck matching distance between two multisets of equal size:
/// min over bijections of the largest pairwise distance.
double spectrum_distance(const ComplexVector& a, const ComplexVector& b);

}  // namespace blocktri

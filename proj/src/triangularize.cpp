#include "blocktri/triangularize.hpp"

#include "blocktri/random.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace blocktri {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::triangularizable:
      return "triangularizable";
    case Verdict::refuted:
      return "refuted";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

ComplexMatrix evaluate_word(const Word& word, const ComplexMatrix& a,
                            const ComplexMatrix& b) {
  require_same_square(a, b, "evaluate_word");
  ComplexMatrix p = ComplexMatrix::Identity(a.rows(), a.cols());
  for (char letter : word) {
    if (letter == 'x')
      p = (p * a).eval();
    else if (letter == 'y')
      p = (p * b).eval();
    else
      throw std::invalid_argument("evaluate_word: letters must be x or y");
  }
  return p;
}

namespace {

// Right-kernel basis of m: right singular vectors whose singular value is at
// most kernel_tol * max(sigma_max, floor_scale).
ComplexMatrix numerical_kernel(const ComplexMatrix& m, double kernel_tol,
                               double floor_scale) {
  const Index d = m.cols();
  if (d == 0) return ComplexMatrix(m.cols(), 0);
  if (m.rows() == 0 || m.isZero(0.0))
    return ComplexMatrix::Identity(d, d);
  Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double threshold = kernel_tol * std::max(sv(0), floor_scale);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

bool lex_less(Complex x, Complex y) {
  if (x.real() != y.real()) return x.real() < y.real();
  return x.imag() < y.imag();
}

std::vector<Complex> sorted_lex(const ComplexVector& values) {
  std::vector<Complex> out(values.data(), values.data() + values.size());
  std::stable_sort(out.begin(), out.end(), lex_less);
  return out;
}

double eigen_residual(const ComplexMatrix& a, const ComplexVector& v) {
  const ComplexVector av = a * v;
  return (av - v * v.dot(av)).norm();
}

// Shifted inverse iteration on a fixed combination a/|a| + alpha b/|b|.
// A common eigenvector of a and b is an eigenvector of the combination, so
// a few steps from a nearby candidate recover it to working precision.
ComplexVector refine_common(const ComplexMatrix& a, const ComplexMatrix& b,
                            double na, double nb, ComplexVector v) {
  const Complex alpha(0.7, 0.45);
  const Index n = a.rows();
  const ComplexMatrix m =
      a / (na > 0.0 ? na : 1.0) + alpha * b / (nb > 0.0 ? nb : 1.0);
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  for (int step = 0; step < 3; ++step) {
    const Complex shift = v.dot(m * v) + Complex(1e-14, 1e-14);
    ComplexVector w = (m - shift * eye).partialPivLu().solve(v);
    if (!w.allFinite() || w.norm() == 0.0) break;
    v = w.normalized();
  }
  return v;
}

}  // namespace

ComplexMatrix shemesh_subspace(const ComplexMatrix& a, const ComplexMatrix& b,
                               double kernel_tol) {
  require_same_square(a, b, "shemesh_subspace");
  const Index n = a.rows();
  const double na = operator_norm(a), nb = operator_norm(b);

  ComplexMatrix v = numerical_kernel(commutator(a, b), kernel_tol, na * nb);
  // Shrink to the largest subspace that a and b map into itself.
  while (v.cols() > 0) {
    const Index d = v.cols();
    const ComplexMatrix proj =
        ComplexMatrix::Identity(n, n) - v * v.adjoint();
    ComplexMatrix stacked(2 * n, d);
    stacked.topRows(n) = proj * (a * v);
    stacked.bottomRows(n) = proj * (b * v);
    const ComplexMatrix k = numerical_kernel(stacked, kernel_tol, na + nb);
    if (k.cols() == d) break;
    v = (v * k).eval();
    // Re-orthonormalize to keep the projector accurate.
    if (v.cols() > 0) {
      Eigen::HouseholderQR<ComplexMatrix> qr(v);
      v = qr.householderQ() * ComplexMatrix::Identity(n, v.cols());
    }
  }
  return v;
}

std::optional<ComplexVector> common_eigenvector(const ComplexMatrix& a,
                                                const ComplexMatrix& b,
                                                double tol, double kernel_tol) {
  require_same_square(a, b, "common_eigenvector");
  const Index n = a.rows();
  if (n == 0) return std::nullopt;
  const double na = operator_norm(a), nb = operator_norm(b);

  const ComplexMatrix basis = shemesh_subspace(a, b, kernel_tol);
  if (basis.cols() == 0) return std::nullopt;

  const ComplexMatrix a_n = basis.adjoint() * a * basis;
  const ComplexMatrix b_n = basis.adjoint() * b * basis;
  const Index d = basis.cols();

  for (Complex lambda : sorted_lex(eigenvalues(a_n))) {
    const ComplexMatrix eig_a = numerical_kernel(
        a_n - lambda * ComplexMatrix::Identity(d, d), kernel_tol, na);
    if (eig_a.cols() == 0) continue;
    // The eigenspace of a_n is b_n-invariant because they commute on N.
    const ComplexMatrix b_e = eig_a.adjoint() * b_n * eig_a;
    const Index e = b_e.rows();
    for (Complex mu : sorted_lex(eigenvalues(b_e))) {
      const ComplexMatrix shifted = b_e - mu * ComplexMatrix::Identity(e, e);
      ComplexVector y;
      if (shifted.isZero(0.0)) {
        y = ComplexVector::Unit(e, 0);
      } else {
        Eigen::BDCSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
        y = svd.matrixV().col(e - 1);
      }
      ComplexVector v = basis * (eig_a * y);
      v.normalize();
      const auto score = [&](const ComplexVector& x) {
        return std::max(eigen_residual(a, x) / (na > 0.0 ? na : 1.0),
                        eigen_residual(b, x) / (nb > 0.0 ? nb : 1.0));
      };
      const ComplexVector refined = refine_common(a, b, na, nb, v);
      if (score(refined) < score(v)) v = refined;
      if (eigen_residual(a, v) <= tol * na && eigen_residual(b, v) <= tol * nb)
        return v;
    }
  }
  return std::nullopt;
}

TriangularizationCertificate simultaneous_triangularize(
    const ComplexMatrix& a, const ComplexMatrix& b,
    const TriangularizeOptions& options) {
  require_same_square(a, b, "simultaneous_triangularize");
  const Index n = a.rows();
  TriangularizationCertificate cert;

  ComplexMatrix ta = a, tb = b;
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  bool deflated_all = true;
  for (Index depth = 0; depth + 1 < n; ++depth) {
    const Index m = n - depth;
    const auto v = common_eigenvector(ta.bottomRightCorner(m, m),
                                      tb.bottomRightCorner(m, m),
                                      options.eig_tol, options.kernel_tol);
    if (!v) {
      deflated_all = false;
      break;
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(*v);
    const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m, m);
    for (ComplexMatrix* t : {&ta, &tb}) {
      t->bottomRows(m) = (q.adjoint() * t->bottomRows(m)).eval();
      t->rightCols(m) = (t->rightCols(m) * q).eval();
    }
    u.rightCols(m) = (u.rightCols(m) * q).eval();
    ++cert.deflated;
  }

  if (deflated_all) {
    const ComplexMatrix t1 = u.adjoint() * a * u;
    const ComplexMatrix t2 = u.adjoint() * b * u;
    cert.residual = std::max(strictly_lower_max(t1), strictly_lower_max(t2));
    cert.unitarity_residual = unitarity_residual(u);
    cert.witness_unitary = std::move(u);
    const double scale = 1.0 + operator_norm(a) + operator_norm(b);
    if (cert.residual <= options.tol * scale &&
        cert.unitarity_residual <= options.unit_tol)
      cert.verdict = Verdict::triangularizable;
    else
      cert.verdict = Verdict::inconclusive;  // deflated, but not cleanly
    return cert;
  }

  cert.refuting_word = mccoy_sample(a, b, options.max_word_len, options.samples,
                                    options.seed, options.nil_tol);
  cert.verdict =
      cert.refuting_word ? Verdict::refuted : Verdict::inconclusive;
  return cert;
}

namespace {

bool shorter_then_lex(const Word& x, const Word& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  return x < y;
}

// Depth-first walk over all words of exactly `length` letters in
// lexicographic order, reusing prefix products.
std::optional<Word> search_length(const ComplexMatrix& a, const ComplexMatrix& b,
                                  const ComplexMatrix& comm, int length,
                                  double tol) {
  const Index n = a.rows();
  std::vector<ComplexMatrix> prefix(static_cast<size_t>(length) + 1);
  prefix[0] = ComplexMatrix::Identity(n, n);
  Word word(static_cast<size_t>(length), 'x');
  for (int i = 0; i < length; ++i) prefix[i + 1] = prefix[i] * a;

  while (true) {
    if (!is_nilpotent(prefix[length] * comm, tol)) return word;
    // Advance to the next word: rightmost x becomes y, the tail resets to x.
    int pos = length - 1;
    while (pos >= 0 && word[pos] == 'y') --pos;
    if (pos < 0) return std::nullopt;
    word[pos] = 'y';
    prefix[pos + 1] = prefix[pos] * b;
    for (int i = pos + 1; i < length; ++i) {
      word[i] = 'x';
      prefix[i + 1] = prefix[i] * a;
    }
  }
}

}  // namespace

std::optional<Word> mccoy_sample(const ComplexMatrix& a, const ComplexMatrix& b,
                                 int max_word_len, int samples,
                                 std::uint64_t seed, double tol) {
  require_same_square(a, b, "mccoy_sample");
  if (max_word_len < 0) return std::nullopt;
  const ComplexMatrix comm = commutator(a, b);
  if (comm.isZero(0.0)) return std::nullopt;

  const int exhaustive = std::min(max_word_len, exhaustive_word_length);
  for (int length = 0; length <= exhaustive; ++length)
    if (auto w = search_length(a, b, comm, length, tol)) return w;

  if (max_word_len <= exhaustive || samples <= 0) return std::nullopt;

  Rng rng(seed);
  std::uniform_int_distribution<int> pick_length(exhaustive + 1, max_word_len);
  std::bernoulli_distribution pick_letter(0.5);
  std::set<Word, decltype(&shorter_then_lex)> words(&shorter_then_lex);
  for (int s = 0; s < samples; ++s) {
    Word w(static_cast<size_t>(pick_length(rng)), 'x');
    for (char& c : w) c = pick_letter(rng) ? 'y' : 'x';
    words.insert(std::move(w));
  }
  for (const Word& w : words)
    if (!is_nilpotent(evaluate_word(w, a, b) * comm, tol)) return w;
  return std::nullopt;
}

}  // namespace blocktri

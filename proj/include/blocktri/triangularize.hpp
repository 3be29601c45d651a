#pragma once

// Simultaneous (unitary) triangularization of a matrix pair.
//
// The constructive test deflates one common eigenvector at a time. Common
// eigenvectors are searched inside the Shemesh subspace
//
//   N = intersection over 1 <= k, l <= n-1 of ker [a^k, b^l],
//
// which is computed as the largest subspace of ker [a, b] invariant under
// both a and b (the two descriptions coincide). When deflation fails the
// pair is handed to the McCoy word test, which can only refute.

#include <cstdint>
#include <optional>
#include <string>

#include "blocktri/matrix_core.hpp"

namespace blocktri {

/// A word over {x, y}; "xxy" evaluates to a * a * b. The empty word is the
/// identity.
using Word = std::string;

ComplexMatrix evaluate_word(const Word& word, const ComplexMatrix& a,
                            const ComplexMatrix& b);

enum class Verdict { triangularizable, refuted, inconclusive };

const char* to_string(Verdict v);

struct TriangularizationCertificate {
  Verdict verdict = Verdict::inconclusive;
  std::optional<ComplexMatrix> witness_unitary;
  std::optional<Word> refuting_word;
  /// Largest strictly-lower modulus of witness^* {a, b} witness.
  double residual = 0.0;
  double unitarity_residual = 0.0;
  /// Number of common eigenvectors deflated before stopping.
  Index deflated = 0;
};

struct TriangularizeOptions {
  /// Strictly-lower residual allowed, relative to 1 + ||a|| + ||b||.
  double tol = 1e-9;
  double unit_tol = 1e-10;
  /// Common-eigenvector residual, relative to ||a|| and ||b||.
  double eig_tol = 1e-8;
  /// Singular values below kernel_tol * scale are treated as zero.
  double kernel_tol = 1e-8;
  int max_word_len = 8;
  int samples = 128;
  std::uint64_t seed = 0;
  double nil_tol = 1e-8;
};

/// Orthonormal basis of the Shemesh subspace of (a, b); zero columns when
/// the subspace is numerically trivial.
ComplexMatrix shemesh_subspace(const ComplexMatrix& a, const ComplexMatrix& b,
                               double kernel_tol = 1e-8);

/// Unit common eigenvector, or nothing if the Shemesh subspace is trivial.
/// Among candidates the one belonging to the lexicographically smallest
/// eigenvalue of `a` (then of `b`) is returned.
std::optional<ComplexVector> common_eigenvector(const ComplexMatrix& a,
                                                const ComplexMatrix& b,
                                                double tol = 1e-8,
                                                double kernel_tol = 1e-8);

TriangularizationCertificate simultaneous_triangularize(
    const ComplexMatrix& a, const ComplexMatrix& b,
    const TriangularizeOptions& options = {});

/// Words of length up to min(max_word_len, exhaustive_word_length) are
/// enumerated; longer ones up to max_word_len are drawn at random (`samples`
/// of them, from `seed`). Candidates are tried shortest first, then
/// lexicographically with x < y. Returns the first word w for which
/// w(a, b) [a, b] fails is_nilpotent(., tol).
std::optional<Word> mccoy_sample(const ComplexMatrix& a, const ComplexMatrix& b,
                                 int max_word_len, int samples,
                                 std::uint64_t seed, double tol = 1e-8);

inline constexpr int exhaustive_word_length = 10;

}  // namespace blocktri

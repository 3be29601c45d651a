#pragma once

// Triangularizable-plus-quasinilpotent decomposition of a compact operator
// at truncation scale.
//
// A dense T is brought to block-tridiagonal form K = W^* T W on the single
// schedule (1, 2, 6, 18, ...). K splits into S (diagonal and upper blocks)
// and Q (lower blocks). Each diagonal block is Schur-reduced,
// U_n^* C_n U_n = Delta_n, and with U = diag(U_1, U_2, ...) and U_0 = W U:
//
//   U_0^* T U_0 = Delta + Q',   Delta = U^* S U,   Q' = U^* Q U,
//
// where Delta is upper triangular and Q' is strictly block lower
// bidiagonal (hence nilpotent at every corner).

#include <vector>

#include "blocktri/block_tridiag.hpp"
#include "blocktri/commutator_lab.hpp"

namespace blocktri {

struct DecompositionResiduals {
  double unitarity = 0.0;       // max |U_0^* U_0 - I|
  double triangularity = 0.0;   // strictly-lower mass of Delta
  double reconstruction = 0.0;  // max |U_0^* T U_0 - (Delta + Q')| / ||T||
};

struct DecompositionResult {
  BlockSchedule schedule = BlockSchedule::custom({1});
  ComplexMatrix w;   // block-tridiagonalizing basis (identity for providers)
  ComplexMatrix u0;  // W * diag(U_n)
  std::vector<ComplexMatrix> block_unitaries;  // U_n
  std::vector<ComplexMatrix> delta_blocks;     // Delta_n, upper triangular
  std::vector<ComplexMatrix> upper_blocks;     // A'_n = U_n^* A_n U_{n+1}
  std::vector<ComplexMatrix> q_blocks;         // U_{n+1}^* B_n U_n
  DecompositionResiduals residuals;
  double t_norm = 0.0;

  int levels() const { return schedule.levels(); }
  /// Assembled Delta through level n (all levels by default).
  ComplexMatrix delta(int n = 0) const;
  /// Assembled Q' through level n (all levels by default).
  ComplexMatrix quasinilpotent_part(int n = 0) const;
};

/// Dense input. The tridiagonalization target is the single schedule for
/// `levels - 1` levels, with the final level absorbing the rest of the
/// dimension, so t needs size >= 3^(levels-1).
DecompositionResult decompose(const ComplexMatrix& t, int levels);

/// Input already in block-tridiagonal form; uses the operator's first
/// `levels` levels and W = I.
DecompositionResult decompose(const BlockTridiagOperator& k, int levels);

struct QuasinilpotentCertificate {
  SpectralReport report;
  /// Every corner of Q' is zero on and above the block diagonal and below
  /// the first block subdiagonal.
  bool structure_ok = false;
  /// ||Q'_deepest - F_n|| and the predicted max_{n < j < n_max} ||Q'_j||,
  /// for n = 1..n_max-1.
  std::vector<double> approximation_error;
  std::vector<double> predicted_error;
  /// Largest transformed lower-block norm beyond the deepest corner (the
  /// part of Q' the certificate does not see); 0 when n_max covers all.
  double tail_bound = 0.0;
};

QuasinilpotentCertificate quasinilpotent_part_certificate(
    const DecompositionResult& result, int n_max, double tol = 1e-12);

struct DiagonalPart {
  /// Diagonal of each Delta_n: the normal part N, level by level.
  std::vector<ComplexVector> normal_diagonals;
  ComplexMatrix strict_upper;  // Delta - N
  ComplexMatrix lower;         // Q'
  /// Every Delta_n has an exactly zero diagonal.
  bool zero_diagonal = false;
};

DiagonalPart diagonal_part(const DecompositionResult& result);

}  // namespace blocktri

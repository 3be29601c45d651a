#pragma once

// Joint block-tridiagonalization of one or two dense matrices by block
// Krylov growth: V_1 = span{start}, and each new level collects the images
// of the newest level under every A_i and A_i^*, orthonormalized against
// everything found so far.

#include <optional>
#include <span>
#include <vector>

#include "blocktri/block_tridiag.hpp"

namespace blocktri {

enum class TridiagMode {
  /// Levels are exactly the new Krylov directions. When the span stops
  /// growing, a joint reducing subspace has been found; the construction
  /// restarts from the next completion vector with a one-dimensional level.
  adaptive,
  /// Levels are topped up with completion vectors until they reach the
  /// target schedule (pair schedule for two inputs, single for one).
  padded,
};

struct TridiagOptions {
  TridiagMode mode = TridiagMode::adaptive;
  /// Defaults to e_1.
  std::optional<ComplexVector> start;
  /// Padded-mode target sizes. Defaults to the standard schedule for the
  /// number of inputs, continued until the dimension is exhausted.
  std::optional<std::vector<Index>> target_sizes;
  /// New direction accepted iff its norm after orthogonalization exceeds
  /// rank_tol * max_i ||A_i||.
  double rank_tol = 1e-10;
};

struct TridiagResult {
  ComplexMatrix basis;  // N x N, orthonormal columns
  BlockSchedule realized_schedule = BlockSchedule::custom({1});
  std::vector<ComplexMatrix> transformed;  // basis^* A_i basis
  /// Dimension of the first joint reducing subspace found (N if the Krylov
  /// span never stalled before exhausting the space).
  Index stabilized_dimension = 0;
  /// Number of completion vectors inserted.
  Index padded_vectors = 0;
};

TridiagResult block_tridiagonalize(std::span<const ComplexMatrix> ops,
                                   const TridiagOptions& options = {});

/// Sizes following `kind` that exactly fill dimension n; the last level is
/// truncated.
std::vector<Index> schedule_sizes_for_dimension(ScheduleKind kind, Index n);

struct BandResidual {
  double residual = 0.0;  // max modulus outside the block-tridiagonal band
  bool pass = true;
};

/// `schedule` must cover a's dimension exactly or beyond; levels past the
/// dimension are ignored (the last covered level may be partial).
BandResidual verify_block_structure(const ComplexMatrix& a,
                                    const BlockSchedule& schedule, double tol);

}  // namespace blocktri

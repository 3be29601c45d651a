#pragma once

// Block-tridiagonal operator model. An operator is described level by level:
//
//   | C1 A1          |
//   | B1 C2 A2       |
//   |    B2 C3 A3    |
//   |       .  .  .  |
//
// with C_n of size k_n x k_n, A_n of size k_n x k_{n+1} and B_n of size
// k_{n+1} x k_n. Levels are numbered from 1. Blocks are produced lazily by
// provider callbacks and memoized.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "blocktri/matrix_core.hpp"

namespace blocktri {

enum class ScheduleKind { pair, single, custom };

const char* to_string(ScheduleKind kind);

class BlockSchedule {
 public:
  /// pair: k_1 = 1, k_n = 4*5^(n-2); single: k_1 = 1, k_n = 2*3^(n-2).
  static BlockSchedule make(ScheduleKind kind, int levels);
  static BlockSchedule custom(std::vector<Index> sizes);

  ScheduleKind kind() const { return kind_; }
  int levels() const { return static_cast<int>(sizes_.size()); }
  /// k_n
  Index size(int n) const;
  /// K_n = k_1 + ... + k_n, with K_0 = 0.
  Index cumsum(int n) const;
  /// First row index (0-based) of level n.
  Index offset(int n) const { return cumsum(n - 1); }
  Index total() const { return cumsum(levels()); }
  /// Level (1-based) containing the 0-based row index i.
  int level_of(Index i) const;

  const std::vector<Index>& sizes() const { return sizes_; }
  const std::vector<Index>& cumsums() const { return cumsums_; }

  /// Schedule truncated to its first n levels.
  BlockSchedule prefix(int n) const;

  bool operator==(const BlockSchedule& other) const {
    return kind_ == other.kind_ && sizes_ == other.sizes_;
  }

 private:
  BlockSchedule(ScheduleKind kind, std::vector<Index> sizes);

  ScheduleKind kind_;
  std::vector<Index> sizes_;
  std::vector<Index> cumsums_;
};

BlockSchedule make_schedule(ScheduleKind kind, int levels);

class BlockTridiagOperator {
 public:
  using BlockProvider = std::function<ComplexMatrix(int level)>;
  using DecayBound = std::function<double(int level)>;

  /// The decay bound must dominate max(||C_n||, ||A_n||, ||B_n||); that is
  /// checked by decay_report, not on materialization.
  BlockTridiagOperator(BlockSchedule schedule, BlockProvider diag,
                       BlockProvider upper, BlockProvider lower,
                       DecayBound decay_bound);

  static BlockTridiagOperator zero(const BlockSchedule& schedule);

  /// Explicit block lists: `diag` has one entry per level, `upper` and
  /// `lower` one per level except the last. The decay bound is the tail
  /// supremum of the block norms.
  static BlockTridiagOperator from_blocks(const BlockSchedule& schedule,
                                          std::vector<ComplexMatrix> diag,
                                          std::vector<ComplexMatrix> upper,
                                          std::vector<ComplexMatrix> lower);

  /// Reads the blocks of a dense matrix along `schedule`; entries outside
  /// the band are ignored.
  static BlockTridiagOperator from_dense(const ComplexMatrix& m,
                                         const BlockSchedule& schedule);

  /// Block-diagonal operator (all A_n, B_n zero).
  static BlockTridiagOperator block_diagonal(const BlockSchedule& schedule,
                                             std::vector<ComplexMatrix> diag);

  const BlockSchedule& schedule() const { return schedule_; }
  int levels() const { return schedule_.levels(); }

  const ComplexMatrix& diag_block(int n) const;
  /// Defined for n < levels().
  const ComplexMatrix& upper_block(int n) const;
  /// Defined for n < levels().
  const ComplexMatrix& lower_block(int n) const;
  double decay_bound(int n) const;

  /// True when every B_n (n < levels) is exactly zero.
  bool lower_blocks_zero(int through_level) const;

 private:
  struct State;

  BlockSchedule schedule_;
  std::shared_ptr<State> state_;
};

/// Leading K_n x K_n principal submatrix assembled from C_1..C_n,
/// A_1..A_{n-1} and B_1..B_{n-1}. The truncation P_n C P_n is this matrix
/// followed by a zero tail.
ComplexMatrix corner_compression(const BlockTridiagOperator& op, int n);

struct SplitParts {
  BlockTridiagOperator upper_part;  // C_n and A_n, all B_n = 0
  BlockTridiagOperator lower_part;  // B_n only
};

/// Routes blocks into the block-upper-bidiagonal part and the strictly
/// block-lower part. No arithmetic happens, so corners add up exactly.
SplitParts split(const BlockTridiagOperator& op);

/// Corner of a lower part through level n+1 holding B_1..B_n. Throws if
/// `q` has a nonzero C_j or A_j in that range.
ComplexMatrix nilpotent_approximant(const BlockTridiagOperator& q, int n);

struct DecayRow {
  int level = 0;
  double diag_norm = 0.0;
  std::optional<double> upper_norm;  // absent on the last level
  std::optional<double> lower_norm;
  double bound = 0.0;
  bool within_bound = true;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  bool ok = true;
  /// Levels where the declared bound was exceeded or increased.
  std::vector<int> violations;
};

DecayReport decay_report(const BlockTridiagOperator& op, int n_max);

}  // namespace blocktri

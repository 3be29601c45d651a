#pragma once

// Quasinilpotency certificates for commutators of block-tridiagonal
// operators, the shift/corner counterexample family, and the structural
// checks on the strictly block-lower parts of a pair.
//
// Every verdict here is a statement about finite corners. A certified
// report means each requested corner pair was simultaneously
// triangularized and every corner commutator had spectral radius within
// tolerance; it is evidence for, not a proof of, quasinilpotency of the
// infinite operator.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blocktri/block_tridiag.hpp"
#include "blocktri/triangularize.hpp"

namespace blocktri {

enum class ReportVerdict {
  certified_quasinilpotent,
  not_certified,
  refuted_hypothesis,
};

const char* to_string(ReportVerdict v);

struct LevelRecord {
  int level = 0;
  /// Spectral radius of the level commutator (or of the level corner).
  double radius = 0.0;
  /// Operator norm of the same matrix.
  double norm = 0.0;
  /// Triangularization verdict for the corner pair (certify only).
  std::optional<Verdict> hypothesis;
  double hypothesis_residual = 0.0;
  std::optional<Word> refuting_word;
  /// Radius read off the witness basis instead of a dense eigensolve.
  bool radius_from_witness = false;
  /// Hypothesis settled block by block (all lower blocks zero).
  bool block_fast_path = false;
};

struct SpectralReport {
  std::vector<LevelRecord> levels;
  ReportVerdict verdict = ReportVerdict::not_certified;
  std::optional<int> refuted_level;
  double tolerance = 0.0;
  bool decay_ok = true;
  /// Always "truncation": the certificate covers finite corners only.
  std::string scope = "truncation";
};

/// Runs the corner-pair hypothesis at every level n <= n_max. When every
/// lower block of both operators vanishes, levels up to the first diagonal
/// block pair that is not triangularizable use the direct sum of per-block
/// witnesses.
/// A refuted hypothesis says nothing about the commutator itself.
SpectralReport certify_commutator(const BlockTridiagOperator& c,
                                  const BlockTridiagOperator& z, int n_max,
                                  double tol = 1e-9,
                                  const TriangularizeOptions& options = {});

/// Spectral radii of nested corners op_levels(1), ..., op_levels(n_max).
/// Certified iff every radius is <= tol and `decay_ok`.
SpectralReport quasinilpotency_trace(
    const std::function<ComplexMatrix(int)>& op_levels, int n_max, double tol,
    bool decay_ok = true);

/// Corners of `op`, with the decay certificate taken from decay_report.
SpectralReport quasinilpotency_trace(const BlockTridiagOperator& op, int n_max,
                                     double tol);

struct CounterexamplePair {
  BlockSchedule schedule;
  BlockTridiagOperator c_op;  // C_n = shift(k_n) / k_n
  BlockTridiagOperator z_op;  // Z_n = corner(k_n) / k_n
};

CounterexamplePair build_counterexample(const BlockSchedule& schedule);

struct CounterexampleLevel {
  int level = 0;
  Index block_size = 0;
  bool commutator_nilpotent = false;        // (i)
  std::optional<bool> word_spectrum_ok;     // (ii), blocks of size >= 3
  double word_spectrum_distance = 0.0;
  std::optional<bool> corner_refuted;       // (iii)
  std::optional<Word> refuting_word;
  double corner_commutator_radius = 0.0;    // (iv)
  bool radius_zero = false;
  bool pass = false;
};

struct CounterexampleReport {
  std::vector<CounterexampleLevel> levels;
  bool all_pass = false;
  /// Human-readable clause failures, e.g. "level 2 clause (iii)".
  std::vector<std::string> failures;
};

/// Checks per level j <= n_max:
///  (i)   [C_j, Z_j] is nilpotent;
///  (ii)  for k_j >= 3, (k_j C_j)^(k_j - 2) [k_j C_j, k_j Z_j] has spectrum
///        {1, -1, 0, ..., 0} within 1e-9;
///  (iii) the corner pair is refuted whenever some block up to level j has
///        size >= 3 (for the pair schedule: every j >= 2);
///  (iv)  the corner commutator has spectral radius exactly 0.
CounterexampleReport verify_counterexample(const CounterexamplePair& pair,
                                           int n_max,
                                           const TriangularizeOptions& options = {});

/// (k C)^(k-2) [k C, k Z] for the unscaled shift/corner pair of size k.
ComplexMatrix counterexample_word_block(Index k);

struct SpectrumUnionResult {
  bool equal = false;
  double distance = 0.0;
  double threshold = 0.0;
};

/// Compares the spectrum of the block-diagonal assembly (one dense Schur
/// iteration on the whole matrix) with the union of the per-block spectra,
/// within 1e-8 * max block norm.
SpectrumUnionResult spectrum_union_check(std::span<const ComplexMatrix> blocks);

struct StrippedLevel {
  int level = 0;
  double max_word_radius = 0.0;  // over all monomials up to word_len
  bool diagonal_zero = false;    // exact
  bool trace_zero = false;       // exact
  Complex trace = 0.0;
  bool pass = false;
};

struct StrippedReport {
  std::vector<StrippedLevel> levels;
  int word_len = 0;
  bool all_pass = false;
};

/// Strips both operators to their strictly block-lower parts Q1, Q2 and
/// checks per level: monomial words w(Q1, Q2)[Q1, Q2] have radius <= tol,
/// and the diagonal and trace of [Q1, Q2] vanish exactly.
StrippedReport stripped_pair_checks(const BlockTridiagOperator& k1,
                                    const BlockTridiagOperator& k2, int n_max,
                                    double tol = 1e-9, int word_len = 4);

}  // namespace blocktri

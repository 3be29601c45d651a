#include "blocktri/commutator_lab.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace blocktri {

const char* to_string(ReportVerdict v) {
  switch (v) {
    case ReportVerdict::certified_quasinilpotent:
      return "certified_quasinilpotent";
    case ReportVerdict::not_certified:
      return "not_certified";
    case ReportVerdict::refuted_hypothesis:
      return "refuted_hypothesis";
  }
  return "unknown";
}

namespace {

void require_same_schedule(const BlockTridiagOperator& c,
                           const BlockTridiagOperator& z, const char* what) {
  if (!(c.schedule().sizes() == z.schedule().sizes()))
    throw DimensionError(std::string(what) +
                         ": operators do not share a schedule");
}

void require_levels(int n_max, int levels, const char* what) {
  if (n_max < 1 || n_max > levels)
    throw std::out_of_range(std::string(what) + ": n_max " +
                            std::to_string(n_max) + " outside 1.." +
                            std::to_string(levels));
}

double diagonal_radius(const ComplexMatrix& m) {
  return m.rows() == 0 ? 0.0 : m.diagonal().cwiseAbs().maxCoeff();
}

}  // namespace

SpectralReport certify_commutator(const BlockTridiagOperator& c,
                                  const BlockTridiagOperator& z, int n_max,
                                  double tol,
                                  const TriangularizeOptions& options) {
  require_same_schedule(c, z, "certify_commutator");
  require_levels(n_max, c.levels(), "certify_commutator");

  SpectralReport report;
  report.tolerance = tol;
  report.decay_ok =
      decay_report(c, n_max).ok && decay_report(z, n_max).ok;

  // Block fast path: with every lower block zero the corners are block upper
  // triangular, so per-block witnesses assemble into corner witnesses. It
  // covers the levels before the first block pair that fails.
  std::vector<ComplexMatrix> block_witness;
  if (c.lower_blocks_zero(n_max) && z.lower_blocks_zero(n_max)) {
    for (int j = 1; j <= n_max; ++j) {
      auto cert =
          simultaneous_triangularize(c.diag_block(j), z.diag_block(j), options);
      if (cert.verdict != Verdict::triangularizable) break;
      block_witness.push_back(std::move(*cert.witness_unitary));
    }
  }
  const int fast_through = static_cast<int>(block_witness.size());

  bool any_inconclusive = false;
  bool radii_ok = true;
  for (int n = 1; n <= n_max; ++n) {
    const ComplexMatrix cc = corner_compression(c, n);
    const ComplexMatrix zz = corner_compression(z, n);
    const ComplexMatrix comm = commutator(cc, zz);

    LevelRecord rec;
    rec.level = n;
    rec.norm = operator_norm(comm);

    std::optional<ComplexMatrix> witness;
    if (n <= fast_through) {
      rec.block_fast_path = true;
      const ComplexMatrix u = block_diagonal(std::span<const ComplexMatrix>(
          block_witness.data(), static_cast<size_t>(n)));
      rec.hypothesis_residual =
          std::max(strictly_lower_max(u.adjoint() * cc * u),
                   strictly_lower_max(u.adjoint() * zz * u));
      const double scale = 1.0 + operator_norm(cc) + operator_norm(zz);
      rec.hypothesis = rec.hypothesis_residual <= options.tol * scale
                           ? Verdict::triangularizable
                           : Verdict::inconclusive;
      witness = u;
    } else {
      auto cert = simultaneous_triangularize(cc, zz, options);
      rec.hypothesis = cert.verdict;
      rec.hypothesis_residual = cert.residual;
      rec.refuting_word = cert.refuting_word;
      if (cert.verdict == Verdict::triangularizable)
        witness = std::move(cert.witness_unitary);
    }

    if (rec.hypothesis == Verdict::triangularizable && witness) {
      // In the witness basis the commutator is strictly upper triangular up
      // to the hypothesis residual; its spectrum is the diagonal.
      rec.radius = diagonal_radius(witness->adjoint() * comm * *witness);
      rec.radius_from_witness = true;
    } else {
      rec.radius = spectral_radius(comm).value;
    }

    if (rec.hypothesis == Verdict::refuted && !report.refuted_level)
      report.refuted_level = n;
    if (rec.hypothesis == Verdict::inconclusive) any_inconclusive = true;
    if (rec.radius > tol) radii_ok = false;
    report.levels.push_back(std::move(rec));
  }

  if (report.refuted_level)
    report.verdict = ReportVerdict::refuted_hypothesis;
  else if (any_inconclusive || !radii_ok)
    report.verdict = ReportVerdict::not_certified;
  else
    report.verdict = ReportVerdict::certified_quasinilpotent;
  return report;
}

SpectralReport quasinilpotency_trace(
    const std::function<ComplexMatrix(int)>& op_levels, int n_max, double tol,
    bool decay_ok) {
  if (n_max < 1)
    throw std::invalid_argument("quasinilpotency_trace: n_max must be >= 1");
  SpectralReport report;
  report.tolerance = tol;
  report.decay_ok = decay_ok;
  bool radii_ok = true;
  ComplexMatrix previous;
  for (int n = 1; n <= n_max; ++n) {
    ComplexMatrix m = op_levels(n);
    require_square(m, "quasinilpotency_trace");
    if (n > 1 && (m.rows() < previous.rows() ||
                  m.topLeftCorner(previous.rows(), previous.cols()) != previous))
      throw std::invalid_argument(
          "quasinilpotency_trace: level " + std::to_string(n) +
          " does not extend the previous corner");
    LevelRecord rec;
    rec.level = n;
    rec.radius = spectral_radius(m).value;
    rec.norm = operator_norm(m);
    if (rec.radius > tol) radii_ok = false;
    report.levels.push_back(rec);
    previous = std::move(m);
  }
  report.verdict = radii_ok && decay_ok ? ReportVerdict::certified_quasinilpotent
                                        : ReportVerdict::not_certified;
  return report;
}

SpectralReport quasinilpotency_trace(const BlockTridiagOperator& op, int n_max,
                                     double tol) {
  require_levels(n_max, op.levels(), "quasinilpotency_trace");
  const bool decay_ok = decay_report(op, n_max).ok;
  return quasinilpotency_trace(
      [&op](int n) { return corner_compression(op, n); }, n_max, tol,
      decay_ok);
}

CounterexamplePair build_counterexample(const BlockSchedule& schedule) {
  // Tail supremum of 1/k_n dominates both block norms and is nonincreasing.
  std::vector<double> bound(static_cast<size_t>(schedule.levels()));
  for (int n = schedule.levels(); n >= 1; --n) {
    const double own = 1.0 / static_cast<double>(schedule.size(n));
    bound[n - 1] = n == schedule.levels() ? own : std::max(own, bound[n]);
  }
  auto decay = [bound](int n) { return bound[n - 1]; };
  auto zero_upper = [schedule](int n) -> ComplexMatrix {
    return ComplexMatrix::Zero(schedule.size(n), schedule.size(n + 1));
  };
  auto zero_lower = [schedule](int n) -> ComplexMatrix {
    return ComplexMatrix::Zero(schedule.size(n + 1), schedule.size(n));
  };
  BlockTridiagOperator c(
      schedule,
      [schedule](int n) -> ComplexMatrix {
        const Index k = schedule.size(n);
        return shift_matrix(k) / static_cast<double>(k);
      },
      zero_upper, zero_lower, decay);
  BlockTridiagOperator z(
      schedule,
      [schedule](int n) -> ComplexMatrix {
        const Index k = schedule.size(n);
        return corner_unit(k) / static_cast<double>(k);
      },
      zero_upper, zero_lower, decay);
  return {schedule, std::move(c), std::move(z)};
}

ComplexMatrix counterexample_word_block(Index k) {
  const ComplexMatrix a = shift_matrix(k);
  const ComplexMatrix b = corner_unit(k);
  return matrix_power(a, std::max<Index>(k - 2, 0)) * commutator(a, b);
}

CounterexampleReport verify_counterexample(const CounterexamplePair& pair,
                                           int n_max,
                                           const TriangularizeOptions& options) {
  require_levels(n_max, pair.schedule.levels(), "verify_counterexample");
  CounterexampleReport report;
  Index largest_block = 0;
  for (int j = 1; j <= n_max; ++j) {
    CounterexampleLevel lvl;
    lvl.level = j;
    lvl.block_size = pair.schedule.size(j);
    largest_block = std::max(largest_block, lvl.block_size);

    const ComplexMatrix& cj = pair.c_op.diag_block(j);
    const ComplexMatrix& zj = pair.z_op.diag_block(j);
    lvl.commutator_nilpotent = is_nilpotent(commutator(cj, zj), options.nil_tol);

    const Index k = lvl.block_size;
    if (k >= 3) {
      const double kd = static_cast<double>(k);
      const ComplexMatrix kc = kd * cj, kz = kd * zj;
      const ComplexMatrix s = matrix_power(kc, k - 2) * commutator(kc, kz);
      ComplexVector expected = ComplexVector::Zero(k);
      expected(0) = 1.0;
      expected(1) = -1.0;
      lvl.word_spectrum_distance = spectrum_distance(eigenvalues(s), expected);
      lvl.word_spectrum_ok = lvl.word_spectrum_distance <= 1e-9;
    }

    const ComplexMatrix cc = corner_compression(pair.c_op, j);
    const ComplexMatrix zz = corner_compression(pair.z_op, j);
    if (largest_block >= 3) {
      const auto cert = simultaneous_triangularize(cc, zz, options);
      lvl.corner_refuted = cert.verdict == Verdict::refuted;
      lvl.refuting_word = cert.refuting_word;
    }

    lvl.corner_commutator_radius = spectral_radius(commutator(cc, zz)).value;
    lvl.radius_zero = lvl.corner_commutator_radius == 0.0;

    lvl.pass = lvl.commutator_nilpotent && lvl.word_spectrum_ok.value_or(true) &&
               lvl.corner_refuted.value_or(true) && lvl.radius_zero;
    const std::string prefix = "level " + std::to_string(j) + " clause ";
    if (!lvl.commutator_nilpotent) report.failures.push_back(prefix + "(i)");
    if (!lvl.word_spectrum_ok.value_or(true))
      report.failures.push_back(prefix + "(ii)");
    if (!lvl.corner_refuted.value_or(true))
      report.failures.push_back(prefix + "(iii)");
    if (!lvl.radius_zero) report.failures.push_back(prefix + "(iv)");
    report.levels.push_back(std::move(lvl));
  }
  report.all_pass = report.failures.empty();
  return report;
}

SpectrumUnionResult spectrum_union_check(std::span<const ComplexMatrix> blocks) {
  SpectrumUnionResult r;
  Index total = 0;
  double max_norm = 0.0;
  for (const auto& b : blocks) {
    require_square(b, "spectrum_union_check");
    total += b.rows();
    max_norm = std::max(max_norm, operator_norm(b));
  }
  ComplexVector from_blocks(total);
  Index pos = 0;
  for (const auto& b : blocks) {
    from_blocks.segment(pos, b.rows()) = eigenvalues(b);
    pos += b.rows();
  }
  const ComplexVector assembled = dense_eigenvalues(block_diagonal(blocks));
  r.distance = spectrum_distance(assembled, from_blocks);
  r.threshold = 1e-8 * max_norm;
  r.equal = r.distance <= r.threshold;
  return r;
}

StrippedReport stripped_pair_checks(const BlockTridiagOperator& k1,
                                    const BlockTridiagOperator& k2, int n_max,
                                    double tol, int word_len) {
  require_same_schedule(k1, k2, "stripped_pair_checks");
  require_levels(n_max, k1.levels(), "stripped_pair_checks");
  const BlockTridiagOperator q1 = split(k1).lower_part;
  const BlockTridiagOperator q2 = split(k2).lower_part;

  StrippedReport report;
  report.word_len = word_len;
  report.all_pass = true;
  for (int n = 1; n <= n_max; ++n) {
    const ComplexMatrix a = corner_compression(q1, n);
    const ComplexMatrix b = corner_compression(q2, n);
    const ComplexMatrix comm = commutator(a, b);

    StrippedLevel lvl;
    lvl.level = n;
    lvl.diagonal_zero = comm.diagonal().isZero(0.0);
    lvl.trace = comm.trace();
    lvl.trace_zero = lvl.trace == Complex(0.0);

    // All monomials up to word_len, grown one letter at a time.
    std::vector<ComplexMatrix> frontier{ComplexMatrix::Identity(a.rows(), a.cols())};
    for (int len = 0; len <= word_len; ++len) {
      std::vector<ComplexMatrix> next;
      for (const auto& w : frontier) {
        lvl.max_word_radius =
            std::max(lvl.max_word_radius, spectral_radius(w * comm).value);
        if (len < word_len) {
          next.push_back(w * a);
          next.push_back(w * b);
        }
      }
      frontier = std::move(next);
    }
    lvl.pass = lvl.diagonal_zero && lvl.trace_zero && lvl.max_word_radius <= tol;
    report.all_pass = report.all_pass && lvl.pass;
    report.levels.push_back(lvl);
  }
  return report;
}

}  // namespace blocktri

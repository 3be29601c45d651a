#include "blocktri/structure_decomp.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "blocktri/tridiagonalize.hpp"

namespace blocktri {

namespace {

ComplexMatrix assemble(const BlockSchedule& schedule, int n,
                       const std::vector<ComplexMatrix>* diag,
                       const std::vector<ComplexMatrix>* upper,
                       const std::vector<ComplexMatrix>* lower) {
  const Index size = schedule.cumsum(n);
  ComplexMatrix out = ComplexMatrix::Zero(size, size);
  for (int j = 1; j <= n; ++j) {
    const Index o = schedule.offset(j), k = schedule.size(j);
    if (diag) out.block(o, o, k, k) = (*diag)[j - 1];
    if (j < n) {
      const Index o2 = schedule.offset(j + 1), k2 = schedule.size(j + 1);
      if (upper) out.block(o, o2, k, k2) = (*upper)[j - 1];
      if (lower) out.block(o2, o, k2, k) = (*lower)[j - 1];
    }
  }
  return out;
}

int resolve_level(int n, int levels, const char* what) {
  if (n == 0) return levels;
  if (n < 1 || n > levels)
    throw std::out_of_range(std::string(what) + ": level " + std::to_string(n) +
                            " outside 1.." + std::to_string(levels));
  return n;
}

DecompositionResult decompose_blocks(const BlockTridiagOperator& k, int levels,
                                     ComplexMatrix w, const ComplexMatrix& t) {
  DecompositionResult r;
  r.schedule = k.schedule().prefix(levels);
  r.w = std::move(w);
  r.t_norm = operator_norm(t);

  for (int n = 1; n <= levels; ++n) {
    SchurForm form;
    try {
      form = schur(k.diag_block(n));
    } catch (const SchurFailure& e) {
      throw SchurFailure("decompose: diagonal block " + std::to_string(n) +
                             ": " + e.what(),
                         e.residual());
    }
    reorder_schur(form, modulus_descending);
    form.upper.triangularView<Eigen::StrictlyLower>().setZero();
    r.block_unitaries.push_back(std::move(form.unitary));
    r.delta_blocks.push_back(std::move(form.upper));
  }
  for (int n = 1; n < levels; ++n) {
    const ComplexMatrix& un = r.block_unitaries[n - 1];
    const ComplexMatrix& un1 = r.block_unitaries[n];
    r.upper_blocks.push_back(un.adjoint() * k.upper_block(n) * un1);
    r.q_blocks.push_back(un1.adjoint() * k.lower_block(n) * un);
  }

  const ComplexMatrix u = block_diagonal(r.block_unitaries);
  r.u0 = r.w * u;
  r.residuals.unitarity = unitarity_residual(r.u0);
  const ComplexMatrix delta = r.delta();
  r.residuals.triangularity = strictly_lower_max(delta);
  const ComplexMatrix mismatch =
      r.u0.adjoint() * t * r.u0 - (delta + r.quasinilpotent_part());
  r.residuals.reconstruction =
      max_abs(mismatch) / (r.t_norm > 0.0 ? r.t_norm : 1.0);
  return r;
}

}  // namespace

ComplexMatrix DecompositionResult::delta(int n) const {
  n = resolve_level(n, levels(), "delta");
  return assemble(schedule, n, &delta_blocks, &upper_blocks, nullptr);
}

ComplexMatrix DecompositionResult::quasinilpotent_part(int n) const {
  n = resolve_level(n, levels(), "quasinilpotent_part");
  return assemble(schedule, n, nullptr, nullptr, &q_blocks);
}

DecompositionResult decompose(const ComplexMatrix& t, int levels) {
  require_square(t, "decompose");
  if (levels < 1) throw std::invalid_argument("decompose: levels must be >= 1");
  const Index n = t.rows();
  std::vector<Index> targets =
      BlockSchedule::make(ScheduleKind::single, levels).sizes();
  const Index head = std::accumulate(targets.begin(), targets.end() - 1, Index{0});
  if (head + targets.back() > n)
    throw DimensionError("decompose: dimension " + std::to_string(n) +
                         " is smaller than the " + std::to_string(levels) +
                         "-level single schedule");
  targets.back() = n - head;

  TridiagOptions options;
  options.mode = TridiagMode::padded;
  options.target_sizes = targets;
  const ComplexMatrix ops[] = {t};
  TridiagResult tri = block_tridiagonalize(ops, options);
  if (tri.realized_schedule.sizes() != targets)
    throw std::logic_error("decompose: realized schedule differs from target");

  const BlockSchedule schedule = BlockSchedule::custom(targets);
  const BlockTridiagOperator k =
      BlockTridiagOperator::from_dense(tri.transformed[0], schedule);
  return decompose_blocks(k, levels, std::move(tri.basis), t);
}

DecompositionResult decompose(const BlockTridiagOperator& k, int levels) {
  if (levels < 1 || levels > k.levels())
    throw std::out_of_range("decompose: levels outside provider range");
  const ComplexMatrix t = corner_compression(k, levels);
  return decompose_blocks(k, levels,
                          ComplexMatrix::Identity(t.rows(), t.cols()), t);
}

QuasinilpotentCertificate quasinilpotent_part_certificate(
    const DecompositionResult& result, int n_max, double tol) {
  n_max = resolve_level(n_max, result.levels(), "quasinilpotent_part_certificate");
  QuasinilpotentCertificate cert;
  const BlockSchedule& s = result.schedule;

  const ComplexMatrix deepest = result.quasinilpotent_part(n_max);
  cert.structure_ok = true;
  for (Index j = 0; j < deepest.cols(); ++j)
    for (Index i = 0; i < deepest.rows(); ++i)
      if (s.level_of(i) != s.level_of(j) + 1 && deepest(i, j) != Complex(0.0))
        cert.structure_ok = false;

  cert.report = quasinilpotency_trace(
      [&result](int n) { return result.quasinilpotent_part(n); }, n_max, tol);

  // F_n keeps Q'_1..Q'_n; compare against the deepest corner.
  std::vector<double> block_norms;
  for (const auto& q : result.q_blocks) block_norms.push_back(operator_norm(q));
  for (int n = 1; n < n_max; ++n) {
    ComplexMatrix embedded = ComplexMatrix::Zero(deepest.rows(), deepest.cols());
    const Index size = s.cumsum(n + 1);
    embedded.topLeftCorner(size, size) = result.quasinilpotent_part(n + 1);
    cert.approximation_error.push_back(operator_norm(deepest - embedded));
    double predicted = 0.0;
    for (int j = n + 1; j < n_max; ++j)
      predicted = std::max(predicted, block_norms[j - 1]);
    cert.predicted_error.push_back(predicted);
  }
  for (int j = n_max; j < result.levels(); ++j)
    cert.tail_bound = std::max(cert.tail_bound, block_norms[j - 1]);
  return cert;
}

DiagonalPart diagonal_part(const DecompositionResult& result) {
  DiagonalPart part;
  part.zero_diagonal = true;
  for (int n = 1; n <= result.levels(); ++n) {
    const ComplexMatrix& d = result.delta_blocks[n - 1];
    ComplexVector diag = d.diagonal();
    if (!diag.isZero(0.0)) part.zero_diagonal = false;
    part.normal_diagonals.push_back(std::move(diag));
  }
  part.strict_upper = result.delta();
  part.strict_upper.diagonal().setZero();
  part.lower = result.quasinilpotent_part();
  return part;
}

}  // namespace blocktri

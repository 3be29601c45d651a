#include "blocktri/tridiagonalize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace blocktri {

std::vector<Index> schedule_sizes_for_dimension(ScheduleKind kind, Index n) {
  if (kind == ScheduleKind::custom)
    throw std::invalid_argument(
        "schedule_sizes_for_dimension: custom kind has no rule");
  const Index ratio = kind == ScheduleKind::pair ? 5 : 3;
  std::vector<Index> sizes;
  Index total = 0;
  Index next = 1;
  while (total < n) {
    const Index k = std::min(next, n - total);
    sizes.push_back(k);
    total += k;
    next = sizes.size() == 1 ? ratio - 1 : next * ratio;
  }
  return sizes;
}

namespace {

class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(Index n) : q_(ComplexMatrix::Zero(n, n)) {}

  Index count() const { return count_; }
  const ComplexMatrix& matrix() const { return q_; }

  // Modified Gram-Schmidt with one reorthogonalization pass. Returns the
  // residual norm; the vector is appended when that norm exceeds `threshold`.
  double try_append(ComplexVector v, double threshold) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < count_; ++j)
        v -= q_.col(j) * q_.col(j).dot(v);
    const double norm = v.norm();
    if (norm > threshold && count_ < q_.cols()) {
      q_.col(count_++) = v / norm;
    }
    return norm;
  }

  // Residual norm of e_j against the current span.
  double residual_of_unit(Index j) const {
    ComplexVector v = ComplexVector::Zero(q_.rows());
    v(j) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Index c = 0; c < count_; ++c) v -= q_.col(c) * q_.col(c).dot(v);
    return v.norm();
  }

  // Lowest-index standard basis vector whose residual carries at least half
  // the average remaining mass; such an index always exists.
  void append_completion() {
    const Index n = q_.rows();
    const double cutoff =
        std::sqrt(0.5 * static_cast<double>(n - count_) / static_cast<double>(n));
    for (Index j = 0; j < n; ++j) {
      if (residual_of_unit(j) >= cutoff) {
        ComplexVector e = ComplexVector::Zero(n);
        e(j) = 1.0;
        try_append(e, 0.0);
        return;
      }
    }
    throw std::logic_error("append_completion: no completion vector found");
  }

 private:
  ComplexMatrix q_;
  Index count_ = 0;
};

}  // namespace

TridiagResult block_tridiagonalize(std::span<const ComplexMatrix> ops,
                                   const TridiagOptions& options) {
  if (ops.empty() || ops.size() > 2)
    throw std::invalid_argument(
        "block_tridiagonalize: expects one or two operators");
  for (const auto& a : ops) {
    require_same_square(ops[0], a, "block_tridiagonalize");
    if (!a.allFinite())
      throw std::invalid_argument("block_tridiagonalize: non-finite input");
  }
  const Index n = ops[0].rows();
  if (n == 0) throw DimensionError("block_tridiagonalize: empty matrix");

  ComplexVector start = ComplexVector::Zero(n);
  if (options.start) {
    if (options.start->size() != n)
      throw DimensionError("block_tridiagonalize: start vector size mismatch");
    start = *options.start;
  } else {
    start(0) = 1.0;
  }
  if (start.norm() == 0.0)
    throw std::invalid_argument("block_tridiagonalize: zero start vector");

  const std::vector<Index> targets =
      options.target_sizes
          ? *options.target_sizes
          : schedule_sizes_for_dimension(
                ops.size() == 2 ? ScheduleKind::pair : ScheduleKind::single, n);

  double scale = 0.0;
  for (const auto& a : ops) scale = std::max(scale, operator_norm(a));
  const double threshold = options.rank_tol * scale;

  TridiagResult result;
  result.stabilized_dimension = n;
  bool stalled = false;

  OrthonormalBasis basis(n);
  basis.try_append(start, 0.0);
  std::vector<Index> sizes{1};
  Index level_begin = 0;

  while (basis.count() < n) {
    const Index level_end = basis.count();
    const ComplexMatrix newest =
        basis.matrix().middleCols(level_begin, level_end - level_begin);
    for (const auto& a : ops) {
      for (const ComplexMatrix& image :
           {ComplexMatrix(a * newest), ComplexMatrix(a.adjoint() * newest)}) {
        for (Index c = 0; c < image.cols(); ++c)
          basis.try_append(image.col(c), threshold);
      }
    }
    const Index grown = basis.count() - level_end;

    if (options.mode == TridiagMode::padded) {
      const size_t next_level = sizes.size();
      const Index target =
          next_level < targets.size() ? targets[next_level] : n - level_end;
      while (basis.count() - level_end < std::min(target, n - level_end)) {
        basis.append_completion();
        ++result.padded_vectors;
      }
    } else if (grown == 0) {
      if (!stalled) {
        stalled = true;
        result.stabilized_dimension = level_end;
      }
      basis.append_completion();
      ++result.padded_vectors;
    }
    sizes.push_back(basis.count() - level_end);
    level_begin = level_end;
  }

  result.basis = basis.matrix();
  result.realized_schedule = BlockSchedule::custom(std::move(sizes));
  for (const auto& a : ops)
    result.transformed.push_back(result.basis.adjoint() * a * result.basis);
  return result;
}

BandResidual verify_block_structure(const ComplexMatrix& a,
                                    const BlockSchedule& schedule,
                                    double tol) {
  require_square(a, "verify_block_structure");
  const Index n = a.rows();
  if (schedule.total() < n)
    throw DimensionError("verify_block_structure: schedule covers " +
                         std::to_string(schedule.total()) + " of " +
                         std::to_string(n) + " rows");
  std::vector<int> level(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) level[i] = schedule.level_of(i);

  BandResidual r;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (std::abs(level[i] - level[j]) > 1)
        r.residual = std::max(r.residual, std::abs(a(i, j)));
  r.pass = r.residual < tol;
  return r;
}

}  // namespace blocktri

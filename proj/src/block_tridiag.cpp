#include "blocktri/block_tridiag.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace blocktri {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::pair:
      return "pair";
    case ScheduleKind::single:
      return "single";
    case ScheduleKind::custom:
      return "custom";
  }
  return "unknown";
}

BlockSchedule::BlockSchedule(ScheduleKind kind, std::vector<Index> sizes)
    : kind_(kind), sizes_(std::move(sizes)) {
  cumsums_.reserve(sizes_.size());
  Index total = 0;
  for (Index k : sizes_) {
    if (k < 1)
      throw std::invalid_argument("BlockSchedule: block sizes must be positive");
    total += k;
    cumsums_.push_back(total);
  }
}

BlockSchedule BlockSchedule::make(ScheduleKind kind, int levels) {
  if (levels < 1)
    throw std::invalid_argument("make_schedule: levels must be >= 1");
  if (kind == ScheduleKind::custom)
    throw std::invalid_argument(
        "make_schedule: custom kind requires explicit sizes");
  const Index ratio = kind == ScheduleKind::pair ? 5 : 3;
  const Index first = kind == ScheduleKind::pair ? 4 : 2;
  // K_n = ratio^(n-1) must fit comfortably in an Index.
  if (levels > (kind == ScheduleKind::pair ? 24 : 36))
    throw std::invalid_argument("make_schedule: too many levels");
  std::vector<Index> sizes{1};
  Index k = first;
  for (int n = 2; n <= levels; ++n) {
    sizes.push_back(k);
    k *= ratio;
  }
  return BlockSchedule(kind, std::move(sizes));
}

BlockSchedule BlockSchedule::custom(std::vector<Index> sizes) {
  if (sizes.empty())
    throw std::invalid_argument("BlockSchedule::custom: no levels");
  return BlockSchedule(ScheduleKind::custom, std::move(sizes));
}

Index BlockSchedule::size(int n) const {
  if (n < 1 || n > levels())
    throw std::out_of_range("BlockSchedule: level " + std::to_string(n) +
                            " outside 1.." + std::to_string(levels()));
  return sizes_[n - 1];
}

Index BlockSchedule::cumsum(int n) const {
  if (n == 0) return 0;
  if (n < 0 || n > levels())
    throw std::out_of_range("BlockSchedule: level " + std::to_string(n) +
                            " outside 0.." + std::to_string(levels()));
  return cumsums_[n - 1];
}

int BlockSchedule::level_of(Index i) const {
  auto it = std::upper_bound(cumsums_.begin(), cumsums_.end(), i);
  if (i < 0 || it == cumsums_.end())
    throw std::out_of_range("BlockSchedule: index beyond schedule");
  return static_cast<int>(it - cumsums_.begin()) + 1;
}

BlockSchedule BlockSchedule::prefix(int n) const {
  if (n < 1 || n > levels())
    throw std::out_of_range("BlockSchedule::prefix: bad level count");
  return BlockSchedule(kind_,
                       std::vector<Index>(sizes_.begin(), sizes_.begin() + n));
}

BlockSchedule make_schedule(ScheduleKind kind, int levels) {
  return BlockSchedule::make(kind, levels);
}

struct BlockTridiagOperator::State {
  BlockProvider diag, upper, lower;
  DecayBound bound;
  std::mutex mutex;
  std::map<int, ComplexMatrix> diag_cache, upper_cache, lower_cache;
};

BlockTridiagOperator::BlockTridiagOperator(BlockSchedule schedule,
                                           BlockProvider diag,
                                           BlockProvider upper,
                                           BlockProvider lower,
                                           DecayBound decay_bound)
    : schedule_(std::move(schedule)), state_(std::make_shared<State>()) {
  if (!diag || !upper || !lower || !decay_bound)
    throw std::invalid_argument("BlockTridiagOperator: missing provider");
  state_->diag = std::move(diag);
  state_->upper = std::move(upper);
  state_->lower = std::move(lower);
  state_->bound = std::move(decay_bound);
}

namespace {

const ComplexMatrix& materialize(std::mutex& mutex,
                                 std::map<int, ComplexMatrix>& cache,
                                 const BlockTridiagOperator::BlockProvider& fn,
                                 int n, Index rows, Index cols,
                                 const char* name) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  ComplexMatrix block = fn(n);
  if (block.rows() != rows || block.cols() != cols)
    throw DimensionError(std::string(name) + " block at level " +
                         std::to_string(n) + " is " +
                         std::to_string(block.rows()) + "x" +
                         std::to_string(block.cols()) + ", schedule wants " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  if (!block.allFinite())
    throw std::invalid_argument(std::string(name) + " block at level " +
                                std::to_string(n) + " has non-finite entries");
  return cache.emplace(n, std::move(block)).first->second;
}

void check_level(int n, int lo, int hi, const char* what) {
  if (n < lo || n > hi)
    throw std::out_of_range(std::string(what) + ": level " +
                            std::to_string(n) + " outside provider range " +
                            std::to_string(lo) + ".." + std::to_string(hi));
}

std::function<double(int)> tail_supremum(std::vector<double> norms) {
  for (int i = static_cast<int>(norms.size()) - 2; i >= 0; --i)
    norms[i] = std::max(norms[i], norms[i + 1]);
  return [norms = std::move(norms)](int n) {
    return n - 1 < static_cast<int>(norms.size()) ? norms[n - 1] : 0.0;
  };
}

}  // namespace

const ComplexMatrix& BlockTridiagOperator::diag_block(int n) const {
  check_level(n, 1, levels(), "diag_block");
  return materialize(state_->mutex, state_->diag_cache, state_->diag, n,
                     schedule_.size(n), schedule_.size(n), "diagonal");
}

const ComplexMatrix& BlockTridiagOperator::upper_block(int n) const {
  check_level(n, 1, levels() - 1, "upper_block");
  return materialize(state_->mutex, state_->upper_cache, state_->upper, n,
                     schedule_.size(n), schedule_.size(n + 1), "upper");
}

const ComplexMatrix& BlockTridiagOperator::lower_block(int n) const {
  check_level(n, 1, levels() - 1, "lower_block");
  return materialize(state_->mutex, state_->lower_cache, state_->lower, n,
                     schedule_.size(n + 1), schedule_.size(n), "lower");
}

double BlockTridiagOperator::decay_bound(int n) const {
  check_level(n, 1, levels(), "decay_bound");
  return state_->bound(n);
}

bool BlockTridiagOperator::lower_blocks_zero(int through_level) const {
  for (int n = 1; n < std::min(through_level, levels()); ++n)
    if (!lower_block(n).isZero(0.0)) return false;
  return true;
}

BlockTridiagOperator BlockTridiagOperator::zero(const BlockSchedule& schedule) {
  return BlockTridiagOperator(
      schedule,
      [schedule](int n) -> ComplexMatrix {
        return ComplexMatrix::Zero(schedule.size(n), schedule.size(n));
      },
      [schedule](int n) -> ComplexMatrix {
        return ComplexMatrix::Zero(schedule.size(n), schedule.size(n + 1));
      },
      [schedule](int n) -> ComplexMatrix {
        return ComplexMatrix::Zero(schedule.size(n + 1), schedule.size(n));
      },
      [](int) { return 0.0; });
}

BlockTridiagOperator BlockTridiagOperator::from_blocks(
    const BlockSchedule& schedule, std::vector<ComplexMatrix> diag,
    std::vector<ComplexMatrix> upper, std::vector<ComplexMatrix> lower) {
  const auto levels = static_cast<size_t>(schedule.levels());
  if (diag.size() != levels || upper.size() + 1 != levels ||
      lower.size() + 1 != levels)
    throw DimensionError("from_blocks: block counts do not match schedule");
  std::vector<double> norms(levels, 0.0);
  for (size_t i = 0; i < levels; ++i) {
    norms[i] = operator_norm(diag[i]);
    if (i + 1 < levels)
      norms[i] = std::max(
          {norms[i], operator_norm(upper[i]), operator_norm(lower[i])});
  }
  auto d = std::make_shared<std::vector<ComplexMatrix>>(std::move(diag));
  auto u = std::make_shared<std::vector<ComplexMatrix>>(std::move(upper));
  auto l = std::make_shared<std::vector<ComplexMatrix>>(std::move(lower));
  return BlockTridiagOperator(
      schedule, [d](int n) { return (*d)[n - 1]; },
      [u](int n) { return (*u)[n - 1]; }, [l](int n) { return (*l)[n - 1]; },
      tail_supremum(std::move(norms)));
}

BlockTridiagOperator BlockTridiagOperator::from_dense(
    const ComplexMatrix& m, const BlockSchedule& schedule) {
  require_square(m, "from_dense");
  if (schedule.total() != m.rows())
    throw DimensionError("from_dense: schedule covers " +
                         std::to_string(schedule.total()) + " rows, matrix has " +
                         std::to_string(m.rows()));
  std::vector<ComplexMatrix> diag, upper, lower;
  for (int n = 1; n <= schedule.levels(); ++n) {
    const Index o = schedule.offset(n), k = schedule.size(n);
    diag.push_back(m.block(o, o, k, k));
    if (n < schedule.levels()) {
      const Index o2 = schedule.offset(n + 1), k2 = schedule.size(n + 1);
      upper.push_back(m.block(o, o2, k, k2));
      lower.push_back(m.block(o2, o, k2, k));
    }
  }
  return from_blocks(schedule, std::move(diag), std::move(upper),
                     std::move(lower));
}

BlockTridiagOperator BlockTridiagOperator::block_diagonal(
    const BlockSchedule& schedule, std::vector<ComplexMatrix> diag) {
  std::vector<ComplexMatrix> upper, lower;
  for (int n = 1; n < schedule.levels(); ++n) {
    upper.push_back(ComplexMatrix::Zero(schedule.size(n), schedule.size(n + 1)));
    lower.push_back(ComplexMatrix::Zero(schedule.size(n + 1), schedule.size(n)));
  }
  return from_blocks(schedule, std::move(diag), std::move(upper),
                     std::move(lower));
}

ComplexMatrix corner_compression(const BlockTridiagOperator& op, int n) {
  check_level(n, 1, op.levels(), "corner_compression");
  const BlockSchedule& s = op.schedule();
  ComplexMatrix out = ComplexMatrix::Zero(s.cumsum(n), s.cumsum(n));
  for (int j = 1; j <= n; ++j) {
    const Index o = s.offset(j), k = s.size(j);
    out.block(o, o, k, k) = op.diag_block(j);
    if (j < n) {
      const Index o2 = s.offset(j + 1), k2 = s.size(j + 1);
      out.block(o, o2, k, k2) = op.upper_block(j);
      out.block(o2, o, k2, k) = op.lower_block(j);
    }
  }
  return out;
}

SplitParts split(const BlockTridiagOperator& op) {
  const BlockSchedule& s = op.schedule();
  auto zero_lower = [s](int n) -> ComplexMatrix {
    return ComplexMatrix::Zero(s.size(n + 1), s.size(n));
  };
  auto zero_upper = [s](int n) -> ComplexMatrix {
    return ComplexMatrix::Zero(s.size(n), s.size(n + 1));
  };
  auto zero_diag = [s](int n) -> ComplexMatrix {
    return ComplexMatrix::Zero(s.size(n), s.size(n));
  };
  auto bound = [op](int n) { return op.decay_bound(n); };
  BlockTridiagOperator upper_part(
      s, [op](int n) { return op.diag_block(n); },
      [op](int n) { return op.upper_block(n); }, zero_lower, bound);
  BlockTridiagOperator lower_part(s, zero_diag, zero_upper,
                                  [op](int n) { return op.lower_block(n); },
                                  bound);
  return {std::move(upper_part), std::move(lower_part)};
}

ComplexMatrix nilpotent_approximant(const BlockTridiagOperator& q, int n) {
  check_level(n + 1, 2, q.levels(), "nilpotent_approximant");
  for (int j = 1; j <= n + 1; ++j) {
    if (!q.diag_block(j).isZero(0.0) || (j <= n && !q.upper_block(j).isZero(0.0)))
      throw std::invalid_argument(
          "nilpotent_approximant: operator has nonzero diagonal or upper "
          "blocks (not a lower part)");
  }
  return corner_compression(q, n + 1);
}

DecayReport decay_report(const BlockTridiagOperator& op, int n_max) {
  check_level(n_max, 1, op.levels(), "decay_report");
  DecayReport report;
  double previous_bound = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    DecayRow row;
    row.level = n;
    row.diag_norm = operator_norm(op.diag_block(n));
    double worst = row.diag_norm;
    if (n < op.levels()) {
      row.upper_norm = operator_norm(op.upper_block(n));
      row.lower_norm = operator_norm(op.lower_block(n));
      worst = std::max({worst, *row.upper_norm, *row.lower_norm});
    }
    row.bound = op.decay_bound(n);
    // Relative slack for norms computed in floating point.
    const double slack = 1e-12 * std::max(1.0, row.bound);
    row.within_bound = worst <= row.bound + slack && row.bound >= 0.0 &&
                       row.bound <= previous_bound;
    previous_bound = row.bound;
    if (!row.within_bound) {
      report.ok = false;
      report.violations.push_back(n);
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace blocktri

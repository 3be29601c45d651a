#include <gtest/gtest.h>

#include "blocktri/tridiagonalize.hpp"
#include "support.hpp"

namespace blocktri {
namespace {

TridiagResult run(std::vector<ComplexMatrix> ops, TridiagMode mode,
                  std::optional<ComplexVector> start = std::nullopt) {
  TridiagOptions options;
  options.mode = mode;
  options.start = std::move(start);
  return block_tridiagonalize(ops, options);
}

void expect_valid(const std::vector<ComplexMatrix>& ops, const TridiagResult& r) {
  EXPECT_LT(unitarity_residual(r.basis), 1e-10);
  ASSERT_EQ(r.transformed.size(), ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double na = operator_norm(ops[i]);
    const BandResidual band = verify_block_structure(
        r.transformed[i], r.realized_schedule, 1e-10 * (1.0 + na));
    EXPECT_TRUE(band.pass) << "band residual " << band.residual;
    EXPECT_LE(max_abs(ComplexMatrix(r.basis.adjoint() * ops[i] * r.basis -
                                    r.transformed[i])),
              1e-12 * (1.0 + na));
  }
}

TEST(BlockTridiagonalize, DiagonalStabilizesAtDimensionOne) {
  const ComplexMatrix d = testing::from_list({1.0, 2.0, 3.0, 4.0}).asDiagonal();
  const TridiagResult r = run({d}, TridiagMode::adaptive);
  EXPECT_EQ(r.stabilized_dimension, 1);
  EXPECT_EQ(r.realized_schedule.sizes(), (std::vector<Index>{1, 1, 1, 1}));
  expect_valid({d}, r);
}

TEST(BlockTridiagonalize, SingleGenericReachesSingleSchedule) {
  Rng rng(1);
  const ComplexMatrix a = random_complex_matrix(27, 27, rng);
  const TridiagResult r = run({a}, TridiagMode::padded);
  EXPECT_EQ(r.realized_schedule.sizes(), (std::vector<Index>{1, 2, 6, 18}));
  EXPECT_EQ(r.realized_schedule.cumsums(), (std::vector<Index>{1, 3, 9, 27}));
  expect_valid({a}, r);
}

TEST(BlockTridiagonalize, PairGenericReachesPairSchedule) {
  Rng rng(2);
  const ComplexMatrix a = random_complex_matrix(25, 25, rng);
  const ComplexMatrix b = random_complex_matrix(25, 25, rng);
  const TridiagResult r = run({a, b}, TridiagMode::padded);
  EXPECT_EQ(r.realized_schedule.sizes(), (std::vector<Index>{1, 4, 20}));
  EXPECT_EQ(r.realized_schedule.cumsums(), (std::vector<Index>{1, 5, 25}));
  expect_valid({a, b}, r);
}

TEST(BlockTridiagonalize, AdaptiveGrowthIsKrylovGrowth) {
  Rng rng(3);
  const ComplexMatrix a = random_complex_matrix(27, 27, rng);
  const TridiagResult r = run({a}, TridiagMode::adaptive);
  // Generic growth doubles the newest level until the space is exhausted.
  EXPECT_EQ(r.realized_schedule.sizes(), (std::vector<Index>{1, 2, 4, 8, 12}));
  EXPECT_EQ(r.stabilized_dimension, 27);
  EXPECT_EQ(r.padded_vectors, 0);
}

TEST(BlockTridiagonalize, StartVectorLeadsTheBasis) {
  Rng rng(4);
  const ComplexMatrix a = random_complex_matrix(6, 6, rng);
  const ComplexVector start = random_complex_matrix(6, 1, rng);
  const TridiagResult r = run({a}, TridiagMode::adaptive, start);
  EXPECT_NEAR(std::abs(r.basis.col(0).dot(start.normalized())), 1.0, 1e-14);
}

TEST(BlockTridiagonalize, Errors) {
  const ComplexMatrix a = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix b = ComplexMatrix::Identity(4, 4);
  EXPECT_THROW(run({a, b}, TridiagMode::adaptive), DimensionError);
  EXPECT_THROW(run({a}, TridiagMode::adaptive, ComplexVector::Zero(3)),
               std::invalid_argument);
  EXPECT_THROW(run({a}, TridiagMode::adaptive, ComplexVector::Ones(4)), DimensionError);
  EXPECT_THROW(run({a, a, a}, TridiagMode::adaptive), std::invalid_argument);
  EXPECT_THROW(run({ComplexMatrix::Zero(2, 3)}, TridiagMode::adaptive), DimensionError);
}

TEST(BlockTridiagonalize, ReducingSubspaceRestart) {
  // e1, e2 span a joint reducing subspace of the direct sum below.
  Rng rng(5);
  ComplexMatrix a = ComplexMatrix::Zero(6, 6);
  a.topLeftCorner(2, 2) = random_complex_matrix(2, 2, rng);
  a.bottomRightCorner(4, 4) = random_complex_matrix(4, 4, rng);
  const TridiagResult r = run({a}, TridiagMode::adaptive);
  EXPECT_EQ(r.stabilized_dimension, 2);
  EXPECT_GT(r.padded_vectors, 0);
  expect_valid({a}, r);
}

TEST(BlockTridiagonalize, PropertiesOnRandomInputs) {
  Rng rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = testing::uniform_size(rng, 1, 30);
    const bool pair = trial % 2 == 1;
    std::vector<ComplexMatrix> ops{random_complex_matrix(n, n, rng)};
    if (pair) ops.push_back(random_complex_matrix(n, n, rng));
    const TridiagMode mode = trial % 4 < 2 ? TridiagMode::adaptive : TridiagMode::padded;
    const TridiagResult r = run(ops, mode);
    expect_valid(ops, r);

    const BlockSchedule& s = r.realized_schedule;
    ASSERT_EQ(s.total(), n);
    const Index m = static_cast<Index>(ops.size());
    for (int level = 1; level < s.levels(); ++level)
      EXPECT_LE(s.size(level + 1), 2 * m * s.cumsum(level));

    for (std::size_t i = 0; i < ops.size(); ++i) {
      const double na = operator_norm(ops[i]);
      EXPECT_LE(spectrum_distance(eigenvalues(ops[i]), eigenvalues(r.transformed[i])),
                1e-8 * na);
      // Re-conjugating the inputs by the basis passes at 1e-9.
      EXPECT_TRUE(verify_block_structure(r.basis.adjoint() * ops[i] * r.basis, s,
                                         1e-9 * (1.0 + na))
                      .pass);
    }
  }
}

TEST(BlockTridiagonalize, IdempotentOnBandedInput) {
  Rng rng(7);
  const ComplexMatrix a = random_complex_matrix(25, 25, rng);
  const ComplexMatrix b = random_complex_matrix(25, 25, rng);
  const TridiagResult first = run({a, b}, TridiagMode::padded);
  const TridiagResult second = run(first.transformed, TridiagMode::padded);
  EXPECT_EQ(second.realized_schedule, first.realized_schedule);
  for (const auto& t : second.transformed)
    EXPECT_TRUE(verify_block_structure(t, first.realized_schedule, 1e-9).pass);
}

TEST(VerifyBlockStructure, AllOnesAgainstSingleSchedule) {
  const BandResidual r = verify_block_structure(
      ComplexMatrix::Ones(9, 9), make_schedule(ScheduleKind::single, 3), 1e-10);
  EXPECT_EQ(r.residual, 1.0);
  EXPECT_FALSE(r.pass);
}

TEST(VerifyBlockStructure, MatchesBandMaskOracle) {
  Rng rng(8);
  const BlockSchedule s = make_schedule(ScheduleKind::single, 3);
  const ComplexMatrix m = random_complex_matrix(9, 9, rng);
  // Levels of rows 0..8 under (1, 2, 6), written out.
  const int level[] = {1, 2, 2, 3, 3, 3, 3, 3, 3};
  double oracle = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      if (std::abs(level[i] - level[j]) > 1) oracle = std::max(oracle, std::abs(m(i, j)));
  EXPECT_EQ(verify_block_structure(m, s, 1.0).residual, oracle);
}

TEST(VerifyBlockStructure, OneBlockScheduleAlwaysPasses) {
  Rng rng(9);
  const ComplexMatrix m = random_complex_matrix(7, 7, rng);
  const BandResidual r = verify_block_structure(m, BlockSchedule::custom({7}), 1e-300);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(VerifyBlockStructure, ScheduleTooShort) {
  EXPECT_THROW(verify_block_structure(ComplexMatrix::Zero(9, 9),
                                      make_schedule(ScheduleKind::single, 2), 1.0),
               DimensionError);
}

TEST(ScheduleSizes, TruncatesLastLevel) {
  EXPECT_EQ(schedule_sizes_for_dimension(ScheduleKind::pair, 25),
            (std::vector<Index>{1, 4, 20}));
  EXPECT_EQ(schedule_sizes_for_dimension(ScheduleKind::single, 27),
            (std::vector<Index>{1, 2, 6, 18}));
  EXPECT_EQ(schedule_sizes_for_dimension(ScheduleKind::single, 12),
            (std::vector<Index>{1, 2, 6, 3}));
  EXPECT_EQ(schedule_sizes_for_dimension(ScheduleKind::pair, 1), (std::vector<Index>{1}));
}

}  // namespace
}  // namespace blocktri

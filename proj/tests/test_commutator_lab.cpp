#include <gtest/gtest.h>

#include "blocktri/commutator_lab.hpp"
#include "support.hpp"

namespace blocktri {
namespace {

using testing::random_operator;

// Block-diagonal pair with every level pair a common unitary conjugate of
// upper-triangular matrices.
std::pair<BlockTridiagOperator, BlockTridiagOperator> triangularizable_blocks(
    const BlockSchedule& s, Rng& rng) {
  std::vector<ComplexMatrix> c, z;
  for (int n = 1; n <= s.levels(); ++n) {
    const ComplexMatrix u = random_unitary(s.size(n), rng);
    for (auto* out : {&c, &z}) {
      const ComplexMatrix m = testing::conjugated(u, random_upper_triangular(s.size(n), rng));
      out->push_back(m / (operator_norm(m) * std::pow(2.0, n)));
    }
  }
  return {BlockTridiagOperator::block_diagonal(s, c),
          BlockTridiagOperator::block_diagonal(s, z)};
}

BlockTridiagOperator conjugate_levels(const BlockTridiagOperator& op,
                                      const std::vector<ComplexMatrix>& u) {
  const BlockSchedule& s = op.schedule();
  std::vector<ComplexMatrix> diag, upper, lower;
  for (int n = 1; n <= s.levels(); ++n) {
    const ComplexMatrix& un = u[n - 1];
    diag.push_back(un.adjoint() * op.diag_block(n) * un);
    if (n < s.levels()) {
      upper.push_back(un.adjoint() * op.upper_block(n) * u[n]);
      lower.push_back(u[n].adjoint() * op.lower_block(n) * un);
    }
  }
  return BlockTridiagOperator::from_blocks(s, diag, upper, lower);
}

TEST(CertifyCommutator, CommutingBlocksAreCertified) {
  const BlockSchedule s = make_schedule(ScheduleKind::pair, 3);
  Rng rng(1);
  std::vector<ComplexMatrix> c, z;
  for (int n = 1; n <= 3; ++n) {
    const ComplexMatrix u = random_unitary(s.size(n), rng);
    const ComplexMatrix d1 = random_complex_matrix(s.size(n), 1, rng).asDiagonal();
    const ComplexMatrix d2 = random_complex_matrix(s.size(n), 1, rng).asDiagonal();
    c.push_back(testing::conjugated(u, d1) / std::pow(2.0, n));
    z.push_back(testing::conjugated(u, d2) / std::pow(2.0, n));
  }
  const SpectralReport r = certify_commutator(BlockTridiagOperator::block_diagonal(s, c),
                                              BlockTridiagOperator::block_diagonal(s, z), 3);
  EXPECT_EQ(r.verdict, ReportVerdict::certified_quasinilpotent);
  EXPECT_EQ(r.scope, "truncation");
  for (const auto& lvl : r.levels) {
    EXPECT_LE(lvl.radius, 1e-9);
    EXPECT_TRUE(lvl.block_fast_path);
  }
}

TEST(CertifyCommutator, CounterexampleRefutedAtLevelTwo) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::pair, 3));
  const SpectralReport r = certify_commutator(p.c_op, p.z_op, 3);
  EXPECT_EQ(r.verdict, ReportVerdict::refuted_hypothesis);
  ASSERT_TRUE(r.refuted_level.has_value());
  EXPECT_EQ(*r.refuted_level, 2);
  EXPECT_EQ(r.levels[0].hypothesis, Verdict::triangularizable);
  EXPECT_EQ(r.levels[1].hypothesis, Verdict::refuted);
  EXPECT_EQ(r.levels[2].hypothesis, Verdict::refuted);
  // The commutator itself stays quasinilpotent at every level.
  for (const auto& lvl : r.levels) EXPECT_EQ(lvl.radius, 0.0);
}

TEST(CertifyCommutator, BlockFastPathForTriangularizableBlocks) {
  Rng rng(2);
  const auto [c, z] = triangularizable_blocks(make_schedule(ScheduleKind::pair, 3), rng);
  const SpectralReport r = certify_commutator(c, z, 3);
  EXPECT_EQ(r.verdict, ReportVerdict::certified_quasinilpotent);
  for (const auto& lvl : r.levels) {
    EXPECT_TRUE(lvl.block_fast_path);
    EXPECT_TRUE(lvl.radius_from_witness);
    EXPECT_LE(lvl.radius, 1e-9 * (1.0 + lvl.norm));
  }
}

TEST(CertifyCommutator, DenseTriangularizablePair) {
  const BlockSchedule s = make_schedule(ScheduleKind::single, 3);
  Rng rng(3);
  const ComplexMatrix u = random_unitary(s.total(), rng);
  const ComplexMatrix a = testing::conjugated(u, random_upper_triangular(s.total(), rng));
  const ComplexMatrix b = testing::conjugated(u, random_upper_triangular(s.total(), rng));
  // Only the full corner is guaranteed triangularizable, so certify it as a
  // one-level operator.
  const BlockSchedule one = BlockSchedule::custom({s.total()});
  const SpectralReport r = certify_commutator(BlockTridiagOperator::from_dense(a, one),
                                              BlockTridiagOperator::from_dense(b, one), 1);
  EXPECT_EQ(r.verdict, ReportVerdict::certified_quasinilpotent);
  EXPECT_LE(r.levels[0].radius, 1e-9 * (1.0 + r.levels[0].norm));
}

TEST(CertifyCommutator, InvariantUnderLevelRespectingUnitaries) {
  Rng rng(4);
  const BlockSchedule s = make_schedule(ScheduleKind::pair, 3);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<ComplexMatrix> u;
    for (int n = 1; n <= 3; ++n) u.push_back(random_unitary(s.size(n), rng));
    BlockTridiagOperator c = BlockTridiagOperator::zero(s), z = c;
    if (trial % 2 == 0) {
      std::tie(c, z) = triangularizable_blocks(s, rng);
    } else {
      const CounterexamplePair p = build_counterexample(s);
      c = p.c_op;
      z = p.z_op;
    }
    const SpectralReport r1 = certify_commutator(c, z, 3);
    const SpectralReport r2 =
        certify_commutator(conjugate_levels(c, u), conjugate_levels(z, u), 3);
    EXPECT_EQ(r1.verdict, r2.verdict) << "trial " << trial;
  }
}

TEST(CertifyCommutator, ScheduleMismatchRejected) {
  const auto c = BlockTridiagOperator::zero(make_schedule(ScheduleKind::pair, 2));
  const auto z = BlockTridiagOperator::zero(make_schedule(ScheduleKind::single, 2));
  EXPECT_THROW(certify_commutator(c, z, 2), DimensionError);
  EXPECT_THROW(certify_commutator(c, c, 3), std::out_of_range);
}

TEST(QuasinilpotencyTrace, CounterexampleCommutatorCorners) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::pair, 3));
  const SpectralReport r = quasinilpotency_trace(
      [&](int n) {
        return ComplexMatrix(commutator(corner_compression(p.c_op, n),
                                        corner_compression(p.z_op, n)));
      },
      3, 1e-12);
  EXPECT_EQ(r.verdict, ReportVerdict::certified_quasinilpotent);
  for (int n = 1; n <= 3; ++n) {
    // Oracle: block by block, each commutator block is nilpotent.
    const ComplexMatrix blk =
        commutator(p.c_op.diag_block(n), p.z_op.diag_block(n));
    EXPECT_TRUE(matrix_power(blk, blk.rows()).isZero(0.0));
    EXPECT_EQ(r.levels[n - 1].radius, 0.0);
  }
}

TEST(QuasinilpotencyTrace, InverseLevelDiagonalIsNotCertified) {
  const BlockSchedule s = make_schedule(ScheduleKind::single, 3);
  std::vector<ComplexMatrix> diag;
  for (int n = 1; n <= 3; ++n)
    diag.push_back(ComplexMatrix::Identity(s.size(n), s.size(n)) / static_cast<double>(n));
  const SpectralReport r =
      quasinilpotency_trace(BlockTridiagOperator::block_diagonal(s, diag), 3, 1e-9);
  EXPECT_EQ(r.verdict, ReportVerdict::not_certified);
  for (const auto& lvl : r.levels) EXPECT_NEAR(lvl.radius, 1.0, 1e-12);
}

TEST(QuasinilpotencyTrace, ZeroOperator) {
  const SpectralReport r = quasinilpotency_trace(
      BlockTridiagOperator::zero(make_schedule(ScheduleKind::pair, 3)), 3, 1e-12);
  EXPECT_EQ(r.verdict, ReportVerdict::certified_quasinilpotent);
  EXPECT_TRUE(r.decay_ok);
  for (const auto& lvl : r.levels) EXPECT_EQ(lvl.radius, 0.0);
}

TEST(QuasinilpotencyTrace, DecayFailureBlocksCertificate) {
  const SpectralReport r = quasinilpotency_trace(
      [](int n) { return ComplexMatrix(ComplexMatrix::Zero(n, n)); }, 3, 1e-12, false);
  EXPECT_EQ(r.verdict, ReportVerdict::not_certified);
}

TEST(QuasinilpotencyTrace, RejectsNonNestedCorners) {
  EXPECT_THROW(quasinilpotency_trace(
                   [](int n) {
                     return ComplexMatrix(ComplexMatrix::Constant(n, n, Complex(n)));
                   },
                   2, 1.0),
               std::invalid_argument);
}

TEST(BuildCounterexample, PairScheduleLevelTwo) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::pair, 3));
  EXPECT_EQ(p.c_op.diag_block(2), ComplexMatrix(shift_matrix(4) / 4.0));
  EXPECT_EQ(p.z_op.diag_block(2), ComplexMatrix(corner_unit(4) / 4.0));
  EXPECT_TRUE(p.c_op.lower_blocks_zero(3));
  for (int n = 1; n < 3; ++n) {
    EXPECT_TRUE(p.c_op.upper_block(n).isZero(0.0));
    EXPECT_TRUE(p.z_op.upper_block(n).isZero(0.0));
  }
}

TEST(BuildCounterexample, FirstLevelBlocks) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::single, 2));
  EXPECT_EQ(p.c_op.diag_block(1), ComplexMatrix::Zero(1, 1));
  // The 1x1 corner unit is [1]; the first commutator block is still zero.
  EXPECT_EQ(p.z_op.diag_block(1), ComplexMatrix::Ones(1, 1));
  EXPECT_TRUE(ComplexMatrix(commutator(p.c_op.diag_block(1), p.z_op.diag_block(1)))
                  .isZero(0.0));
}

TEST(BuildCounterexample, CustomSchedule) {
  const CounterexamplePair p = build_counterexample(BlockSchedule::custom({3, 5, 7}));
  const Index k[] = {3, 5, 7};
  for (int n = 1; n <= 3; ++n) {
    const double kd = static_cast<double>(k[n - 1]);
    EXPECT_EQ(p.c_op.diag_block(n), ComplexMatrix(shift_matrix(k[n - 1]) / kd));
    EXPECT_EQ(p.z_op.diag_block(n), ComplexMatrix(corner_unit(k[n - 1]) / kd));
  }
}

TEST(BuildCounterexample, DecayMatchesInverseBlockSize) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::pair, 4));
  const DecayReport r = decay_report(p.c_op, 4);
  EXPECT_TRUE(r.ok);
  for (const auto& row : r.rows) {
    const double k = static_cast<double>(p.schedule.size(row.level));
    EXPECT_NEAR(row.diag_norm, row.level == 1 ? 0.0 : 1.0 / k, 1e-15);
    EXPECT_NEAR(operator_norm(p.z_op.diag_block(row.level)), 1.0 / k, 1e-15);
  }
}

TEST(VerifyCounterexample, PairScheduleThreeLevels) {
  const CounterexamplePair p = build_counterexample(make_schedule(ScheduleKind::pair, 3));
  const CounterexampleReport r = verify_counterexample(p, 3);
  EXPECT_TRUE(r.all_pass);
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.levels.size(), 3u);
  EXPECT_TRUE(r.levels[0].commutator_nilpotent);
  EXPECT_FALSE(r.levels[0].word_spectrum_ok.has_value());
  EXPECT_FALSE(r.levels[0].corner_refuted.has_value());
  for (int j = 1; j < 3; ++j) {
    EXPECT_EQ(r.levels[j].word_spectrum_ok, true);
    EXPECT_LE(r.levels[j].word_spectrum_distance, 1e-9);
    EXPECT_EQ(r.levels[j].corner_refuted, true);
    EXPECT_TRUE(r.levels[j].refuting_word.has_value());
  }
}

TEST(VerifyCounterexample, WordBlockAtFourIsDiagonal) {
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(1, 1) = -1.0;
  EXPECT_EQ(counterexample_word_block(4), expected);
}

TEST(VerifyCounterexample, FailuresNameTheClause) {
  // A pair with the counterexample's schedule but zero blocks fails (ii)
  // and (iii) from level 2 on.
  const BlockSchedule s = make_schedule(ScheduleKind::pair, 2);
  const CounterexamplePair fake{s, BlockTridiagOperator::zero(s),
                                BlockTridiagOperator::zero(s)};
  const CounterexampleReport r = verify_counterexample(fake, 2);
  EXPECT_FALSE(r.all_pass);
  EXPECT_EQ(r.failures,
            (std::vector<std::string>{"level 2 clause (ii)", "level 2 clause (iii)"}));
}

TEST(SpectrumUnion, SmallDiagonalBlocks) {
  const ComplexMatrix blocks[] = {ComplexMatrix::Ones(1, 1),
                                  testing::from_list({2.0, 3.0}).asDiagonal()};
  const SpectrumUnionResult r = spectrum_union_check(blocks);
  EXPECT_TRUE(r.equal);
  EXPECT_LE(r.distance, 1e-14);
}

TEST(SpectrumUnion, WordBlocksContainPlusMinusOne) {
  std::vector<ComplexMatrix> blocks;
  for (Index k : {1, 4, 20}) blocks.push_back(counterexample_word_block(k));
  EXPECT_TRUE(spectrum_union_check(blocks).equal);
  for (std::size_t j = 1; j < blocks.size(); ++j) {
    const ComplexVector ev = eigenvalues(blocks[j]);
    bool plus = false, minus = false;
    for (Index i = 0; i < ev.size(); ++i) {
      plus = plus || std::abs(ev(i) - 1.0) < 1e-12;
      minus = minus || std::abs(ev(i) + 1.0) < 1e-12;
    }
    EXPECT_TRUE(plus && minus);
  }
}

TEST(SpectrumUnion, SingleBlock) {
  Rng rng(5);
  const ComplexMatrix b[] = {random_complex_matrix(6, 6, rng)};
  EXPECT_TRUE(spectrum_union_check(b).equal);
}

TEST(SpectrumUnion, RandomAssemblies) {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ComplexMatrix> blocks;
    const Index count = testing::uniform_size(rng, 1, 5);
    for (Index i = 0; i < count; ++i) {
      const Index k = testing::uniform_size(rng, 1, 10);
      blocks.push_back(random_complex_matrix(k, k, rng));
    }
    const SpectrumUnionResult r = spectrum_union_check(blocks);
    ASSERT_TRUE(r.equal) << "trial " << trial << " distance " << r.distance;
  }
}

TEST(StrippedPair, DiagonalOfCommutatorIsExactlyZero) {
  Rng rng(7);
  const BlockSchedule s = make_schedule(ScheduleKind::pair, 3);
  const BlockTridiagOperator k1 = random_operator(s, rng), k2 = random_operator(s, rng);
  // Oracle: assemble the strictly block-lower parts by hand and multiply.
  ComplexMatrix q1 = ComplexMatrix::Zero(25, 25), q2 = q1;
  for (int n = 1; n < 3; ++n) {
    q1.block(s.offset(n + 1), s.offset(n), s.size(n + 1), s.size(n)) = k1.lower_block(n);
    q2.block(s.offset(n + 1), s.offset(n), s.size(n + 1), s.size(n)) = k2.lower_block(n);
  }
  const ComplexMatrix comm =
      testing::naive_product(q1, q2) - testing::naive_product(q2, q1);
  for (Index i = 0; i < 25; ++i) EXPECT_EQ(comm(i, i), Complex(0.0));

  const StrippedReport r = stripped_pair_checks(k1, k2, 3);
  EXPECT_TRUE(r.all_pass);
  for (const auto& lvl : r.levels) {
    EXPECT_TRUE(lvl.diagonal_zero);
    EXPECT_TRUE(lvl.trace_zero);
  }
}

TEST(StrippedPair, ZeroSecondOperator) {
  Rng rng(8);
  const BlockSchedule s = make_schedule(ScheduleKind::single, 3);
  const StrippedReport r =
      stripped_pair_checks(random_operator(s, rng), BlockTridiagOperator::zero(s), 3);
  EXPECT_TRUE(r.all_pass);
  for (const auto& lvl : r.levels) EXPECT_EQ(lvl.max_word_radius, 0.0);
}

TEST(StrippedPair, WordRadiiOnGenericPairs) {
  Rng rng(9);
  const BlockSchedule s = make_schedule(ScheduleKind::pair, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const BlockTridiagOperator k1 = random_operator(s, rng), k2 = random_operator(s, rng);
    const StrippedReport r = stripped_pair_checks(k1, k2, 3, 1e-9, 4);
    EXPECT_TRUE(r.all_pass);
    EXPECT_EQ(r.word_len, 4);
    // Oracle: every word times the commutator vanishes on and above the
    // block diagonal, so each corner is strictly block-lower triangular.
    const BlockTridiagOperator q1 = split(k1).lower_part, q2 = split(k2).lower_part;
    const ComplexMatrix a = corner_compression(q1, 3), b = corner_compression(q2, 3);
    const ComplexMatrix m = evaluate_word("xyyx", a, b) * commutator(a, b);
    for (Index i = 0; i < 25; ++i)
      for (Index j = 0; j < 25; ++j)
        if (s.level_of(i) <= s.level_of(j)) EXPECT_EQ(m(i, j), Complex(0.0));
    for (const auto& lvl : r.levels) EXPECT_LE(lvl.max_word_radius, 1e-9);
  }
}

TEST(StrippedPair, ScheduleMismatch) {
  EXPECT_THROW(
      stripped_pair_checks(BlockTridiagOperator::zero(make_schedule(ScheduleKind::pair, 2)),
                           BlockTridiagOperator::zero(make_schedule(ScheduleKind::single, 2)),
                           2),
      DimensionError);
}

}  // namespace
}  // namespace blocktri

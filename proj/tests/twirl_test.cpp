#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "twocopy/twirl.hpp"

namespace twocopy {
namespace {

using testing::max_abs_diff;
using testing::random_state;

TwirlConfig exact() { return {TwirlMode::kExactDesign, 0, Seed{0}}; }
TwirlConfig haar(std::uint64_t samples, std::uint64_t seed) { return {TwirlMode::kHaarMonteCarlo, samples, Seed{seed}}; }

TEST(Clifford, GroupHasTwentyFourUnitaries) {
  const auto group = clifford_2design_qubit();
  ASSERT_EQ(group.size(), 24u);
  for (const auto& u : group) EXPECT_LE(unitarity_residual(u), 1e-14);
  EXPECT_EQ(unitary_design_bound(2), 10);
  EXPECT_LE(unitary_design_bound(2), static_cast<long long>(group.size()));
  EXPECT_EQ(unitary_design_bound(3), 65);
}

TEST(Clifford, DesignTwirlEqualsAnalyticProjection) {
  RandomStream stream(Seed{1});
  const auto group = clifford_2design_qubit();
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix x = testing::random_matrix(4, 4, stream);  // not even Hermitian
    ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
    for (const auto& u : group) acc += detail::conjugate_pair(u, x);
    EXPECT_LE(max_abs_diff(acc / 24.0, haar_twirl_exact(x, 2)), 1e-12);
  }
}

TEST(Clifford, SigmaXSigmaXTwirl) {
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const ComplexMatrix xx = tensor_product(sx, sx);
  const auto group = clifford_2design_qubit();
  ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
  for (const auto& u : group) acc += detail::conjugate_pair(u, xx);
  acc /= 24.0;
  // Tr[XX] = 0 and Tr[S XX] = 2 fix the projection to (2S - I)/3.
  const ComplexMatrix expected = (2.0 * swap_matrix(2) - ComplexMatrix::Identity(4, 4)) / 3.0;
  EXPECT_LE(max_abs_diff(acc, expected), 1e-12);
  EXPECT_LE(max_abs_diff(haar_twirl_exact(xx, 2), expected), 1e-12);
}

TEST(Clifford, AgreesWithHaarMonteCarlo) {
  const auto rho = random_state(4, Seed{2}, {2, 2});
  const auto design = twirl(rho, exact());
  const auto mc = twirl(rho, haar(100000, 3));
  EXPECT_LE(max_abs_diff(design.matrix(), mc.matrix()), 1e-2);
}

TEST(Twirl, ExactOutputIsInvariantAndPreservesSwap) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto rho = random_state(4, Seed{10 + s}, {2, 2});
    const auto out = twirl(rho, exact());
    EXPECT_LE(twirl_invariance_residual(out.matrix(), 2, Seed{s}), 1e-10);
    EXPECT_NEAR(expectation(swap_operator(2), out), expectation(swap_operator(2), rho), 1e-12);
  }
}

TEST(Twirl, WernerIsFixedPoint) {
  const auto w = werner_state({2, 0.37});
  EXPECT_LE(max_abs_diff(twirl(w, exact()).matrix(), w.matrix()), 1e-12);
}

TEST(Twirl, SymmetricProductMapsToSymmetricWerner) {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = 1.0;
  const auto out = twirl(pure_state(v, {2, 2}), exact());
  EXPECT_LE(max_abs_diff(out.matrix(), werner_state({2, 1.0}).matrix()), 1e-12);
}

TEST(Twirl, ExactModeRejectsQutrits) {
  EXPECT_THROW(twirl(werner_state({3, 0.5}), exact()), UnsupportedDimensionError);
}

TEST(Twirl, HaarModeConvergesForProductSource) {
  const auto eta = diagonal_state({0.9, 0.1});
  const auto src = werner_from_source(eta, haar(20000, 4));
  EXPECT_NEAR(src.q, 0.91, 1e-15);
  EXPECT_LE(trace_distance(src.state.matrix(), werner_state({2, 0.91}).matrix()), 0.02);
  const auto before = product_state(eta, eta);
  EXPECT_LE(std::abs(expectation(swap_operator(2), src.state) - expectation(swap_operator(2), before)),
            3.0 / std::sqrt(20000.0));
}

TEST(Twirl, HaarModeQutrit) {
  const auto eta = diagonal_state({0.5, 0.3, 0.2});
  const auto src = werner_from_source(eta, haar(20000, 5));
  EXPECT_NEAR(src.q, 0.69, 1e-15);
  EXPECT_LE(trace_distance(src.state.matrix(), werner_state({3, 0.69}).matrix()), 0.02);
}

TEST(Twirl, ThreadCountDoesNotChangeResult) {
  const auto rho = random_state(9, Seed{6}, {3, 3});
  TwirlConfig one = haar(1000, 7);
  TwirlConfig four = one;
  four.threads = 4;
  EXPECT_LE(max_abs_diff(twirl(rho, one).matrix(), twirl(rho, four).matrix()), 0.0);
}

TEST(Twirl, HaarResidualShrinksWithSamples) {
  const auto rho = random_state(4, Seed{8}, {2, 2});
  const double coarse = twirl_invariance_residual(twirl(rho, haar(100, 9)).matrix(), 2, Seed{1});
  const double fine = twirl_invariance_residual(twirl(rho, haar(20000, 9)).matrix(), 2, Seed{1});
  EXPECT_LT(fine, coarse);
  EXPECT_LT(fine, 0.02);
}

TEST(Source, PredictedWeight) {
  ComplexVector v(2);
  v << 0.6, 0.8;
  EXPECT_NEAR(werner_from_source(pure_state(v), exact()).q, 1.0, 1e-15);
  EXPECT_NEAR(werner_from_source(maximally_mixed(2), exact()).q, 0.75, 1e-15);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto eta = random_state(2, Seed{s});
    const auto src = werner_from_source(eta, exact());
    EXPECT_GE(src.q, 0.75 - 1e-15);
    EXPECT_LE(src.q, 1.0);
    EXPECT_NEAR(expectation(swap_operator(2), src.state), 2 * src.q - 1, 1e-10);
  }
}

TEST(Source, PurityViaSwap) {
  ComplexVector v(3);
  v << 1, 2, 3;
  const auto pure = purity_via_swap(pure_state(v), 1000, Seed{1});
  EXPECT_EQ(pure.mean, 1.0);

  const auto mixed = purity_via_swap(maximally_mixed(2), 100000, Seed{2});
  EXPECT_LE(std::abs(mixed.mean - 0.5), 5 * mixed.std_error);

  const auto eta = diagonal_state({0.9, 0.1});
  EXPECT_NEAR(expectation(swap_operator(2), product_state(eta, eta)), 0.82, 1e-15);
}

}  // namespace
}  // namespace twocopy

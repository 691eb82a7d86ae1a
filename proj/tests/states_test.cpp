#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "twocopy/states.hpp"

namespace twocopy {
namespace {

using testing::max_abs_diff;

TEST(Projectors, QubitSymmetricHasRankThree) {
  const ComplexMatrix p = projector_symmetric(2);
  EXPECT_NEAR(p.trace().real(), 3.0, 1e-14);
  // |00><00| + |11><11| + |phi+><phi+| with phi+ = (|01> + |10>)/sqrt 2
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 1.0;
  expected(1, 1) = expected(2, 2) = expected(1, 2) = expected(2, 1) = 0.5;
  EXPECT_LE(max_abs_diff(p, expected), 1e-15);
}

TEST(Projectors, QubitAntisymmetricIsSinglet) {
  const ComplexMatrix p = projector_antisymmetric(2);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = expected(2, 2) = 0.5;
  expected(1, 2) = expected(2, 1) = -0.5;
  EXPECT_LE(max_abs_diff(p, expected), 1e-15);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-14);
}

TEST(Projectors, TracesAreSubspaceDimensions) {
  for (int d = 2; d <= 8; ++d) {
    EXPECT_EQ(std::lround(projector_symmetric(d).trace().real()), symmetric_dim(d));
    EXPECT_EQ(std::lround(projector_antisymmetric(d).trace().real()), antisymmetric_dim(d));
  }
  EXPECT_NEAR(projector_symmetric(3).trace().real(), 6.0, 1e-14);
  EXPECT_NEAR(projector_antisymmetric(3).trace().real(), 3.0, 1e-14);
}

TEST(Projectors, OrthogonalCompleteIdempotent) {
  const ComplexMatrix pp = projector_symmetric(4), pm = projector_antisymmetric(4);
  EXPECT_LE((pp * pm).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(max_abs_diff(pp + pm, ComplexMatrix::Identity(16, 16)), 1e-15);
  const ComplexMatrix p5 = projector_antisymmetric(5);
  EXPECT_LE(max_abs_diff(p5 * p5, p5), 1e-12);
}

TEST(Projectors, RejectDimensionBelowTwo) {
  EXPECT_THROW(projector_symmetric(1), InvalidDimensionError);
  EXPECT_THROW(projector_antisymmetric(0), InvalidDimensionError);
}

TEST(WernerState, SymmetricBoundary) {
  const auto rho = werner_state({2, 1.0});
  EXPECT_LE(max_abs_diff(rho.matrix(), projector_symmetric(2) / 3.0), 1e-15);
  EXPECT_EQ(rho.factor_dims(), (std::vector<int>{2, 2}));
}

TEST(WernerState, ThreeQuartersIsMaximallyMixed) {
  EXPECT_LE(max_abs_diff(werner_state({2, 0.75}).matrix(), ComplexMatrix::Identity(4, 4) / 4.0), 1e-15);
}

TEST(WernerState, SwapExpectationIsTwoQMinusOne) {
  const auto rho = werner_state({3, 0.9});
  EXPECT_NEAR(swap_matrix(3).cwiseProduct(rho.matrix().transpose()).sum().real(), 0.8, 1e-14);
}

TEST(WernerState, RejectsWeightOutsideUnitInterval) {
  EXPECT_THROW(werner_state({2, 1.1}), DomainError);
  EXPECT_THROW(werner_state({2, -0.1}), DomainError);
}

TEST(WernerState, InvariantUnderCollectiveUnitaries) {
  for (int d = 2; d <= 8; ++d) {
    for (double q : {0.0, 0.3, 0.9}) {
      const auto rho = werner_state({d, q});
      const ComplexMatrix u = haar_random_unitary(d, Seed{static_cast<std::uint64_t>(d * 10 + q * 10)});
      const ComplexMatrix uu = tensor_product(u, u);
      EXPECT_LE(max_abs_diff(uu * rho.matrix() * uu.adjoint(), rho.matrix()), 1e-10) << d << " " << q;
    }
  }
}

TEST(WernerState, PurityClosedForm) {
  for (int d = 2; d <= 8; ++d) {
    for (double q : {0.0, 0.25, 0.6, 1.0}) {
      const double expected =
          q * q / symmetric_dim(d) + (1.0 - q) * (1.0 - q) / antisymmetric_dim(d);
      EXPECT_NEAR(purity(werner_state({d, q})), expected, 1e-12);
    }
  }
}

TEST(Purity, Examples) {
  EXPECT_NEAR(purity(pure_state(basis_vector(2, 0))), 1.0, 1e-15);
  EXPECT_NEAR(purity(maximally_mixed(2)), 0.5, 1e-15);
  EXPECT_NEAR(purity(diagonal_state({0.9, 0.1})), 0.82, 1e-15);
}

TEST(PureState, PlusState) {
  const auto rho = pure_state(ComplexVector::Ones(2));
  EXPECT_LE(max_abs_diff(rho.matrix(), ComplexMatrix::Constant(2, 2, 0.5)), 1e-15);
}

TEST(PureState, BasisStateInDimensionThree) {
  const auto rho = pure_state(basis_vector(3, 1));
  EXPECT_LE(max_abs_diff(rho.matrix(), basis_operator(3, 1, 1)), 0.0);
}

TEST(PureState, MaximallyEntangledPair) {
  ComplexVector v(4);
  v << 1, 0, 0, 1;
  const auto rho = pure_state(v, {2, 2});
  EXPECT_NEAR(rho.matrix()(0, 3).real(), 0.5, 1e-15);
  EXPECT_NEAR(purity(rho), 1.0, 1e-15);
}

TEST(PureState, ZeroVectorRejected) {
  EXPECT_THROW(pure_state(ComplexVector::Zero(3)), DomainError);
}

TEST(DensityMatrix, ValidationFailures) {
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(2, 2)), StateValidityError);  // trace 2
  ComplexMatrix negative(2, 2);
  negative << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix{negative}, StateValidityError);
  ComplexMatrix skew(2, 2);
  skew << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix{skew}, StateValidityError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(4, 4) / 4.0, {2, 3}), ShapeError);
}

TEST(DensityMatrix, TinyNegativeEigenvalueAccepted) {
  ComplexMatrix m(2, 2);
  m << 1.0 + 5e-11, 0, 0, -5e-11;
  EXPECT_NO_THROW(DensityMatrix{m});
}

}  // namespace
}  // namespace twocopy

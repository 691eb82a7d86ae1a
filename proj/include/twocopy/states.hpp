#pragma once

#include <string>
#include <utility>
#include <vector>

#include "twocopy/qmath.hpp"

namespace twocopy {

inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

/// A validated density operator together with its tensor-factor layout.
///
/// Construction checks unit trace, Hermiticity and positivity and throws
/// StateValidityError otherwise. Small negative eigenvalues down to
/// -kPositivityTol are accepted as rounding; nothing is clamped.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix matrix, std::vector<int> factor_dims = {})
      : matrix_(std::move(matrix)), factor_dims_(std::move(factor_dims)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw ShapeError("density matrix must be square and non-empty");
    }
    if (factor_dims_.empty()) factor_dims_.push_back(static_cast<int>(matrix_.rows()));
    if (detail::product(factor_dims_) != matrix_.rows()) {
      throw ShapeError("factor dimensions do not multiply to the matrix dimension");
    }
    if (hermiticity_residual(matrix_) > kHermitianTol) {
      throw StateValidityError("density matrix is not Hermitian (residual " +
                               std::to_string(hermiticity_residual(matrix_)) + ")");
    }
    const Complex tr = matrix_.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
      throw StateValidityError("density matrix trace is " + std::to_string(tr.real()));
    }
    const double lowest = min_eigenvalue(matrix_);
    if (lowest < -kPositivityTol) {
      throw StateValidityError("density matrix has eigenvalue " + std::to_string(lowest));
    }
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<int>& factor_dims() const { return factor_dims_; }

  /// True when the state lives on d (x) d for some d.
  bool is_bipartite_square() const {
    return factor_dims_.size() == 2 && factor_dims_[0] == factor_dims_[1];
  }

 private:
  ComplexMatrix matrix_;
  std::vector<int> factor_dims_;
};

/// Weight q of the symmetric component of a d (x) d Werner state.
struct WernerSpec {
  int d = 2;
  double q = 1.0;
};

inline int symmetric_dim(int d) { return d * (d + 1) / 2; }
inline int antisymmetric_dim(int d) { return d * (d - 1) / 2; }

namespace detail {

inline void require_pair_dim(int d) {
  if (d < 2) throw InvalidDimensionError("subsystem dimension must be at least 2, got " + std::to_string(d));
  if (d > kMaxDimension) {
    throw InvalidDimensionError("subsystem dimension above " + std::to_string(kMaxDimension));
  }
}

}  // namespace detail

/// Exchange operator on d (x) d: S|jk> = |kj>.
inline ComplexMatrix swap_matrix(int d) {
  detail::require_pair_dim(d);
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) s(k * d + j, j * d + k) = 1.0;
  }
  return s;
}

/// Projector onto the symmetric subspace, (I + S) / 2.
inline ComplexMatrix projector_symmetric(int d) {
  detail::require_pair_dim(d);
  return 0.5 * (ComplexMatrix::Identity(d * d, d * d) + swap_matrix(d));
}

/// Projector onto the antisymmetric subspace, (I - S) / 2.
inline ComplexMatrix projector_antisymmetric(int d) {
  detail::require_pair_dim(d);
  return 0.5 * (ComplexMatrix::Identity(d * d, d * d) - swap_matrix(d));
}

/// q P+/d+ + (1-q) P-/d-
inline DensityMatrix werner_state(const WernerSpec& spec) {
  detail::require_pair_dim(spec.d);
  if (!(spec.q >= 0.0 && spec.q <= 1.0)) {
    throw DomainError("Werner weight q must lie in [0, 1], got " + std::to_string(spec.q));
  }
  const int d = spec.d;
  ComplexMatrix rho = (spec.q / symmetric_dim(d)) * projector_symmetric(d) +
                      ((1.0 - spec.q) / antisymmetric_dim(d)) * projector_antisymmetric(d);
  return DensityMatrix(std::move(rho), {d, d});
}

/// Tr rho^2
inline double purity(const DensityMatrix& rho) {
  // Tr(A A) = sum |A_ij|^2 for Hermitian A.
  return rho.matrix().squaredNorm();
}

/// Normalized rank-one projector onto `amplitudes`.
inline DensityMatrix pure_state(const ComplexVector& amplitudes, std::vector<int> factor_dims = {}) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw DomainError("pure state amplitudes must be non-zero");
  const ComplexVector psi = amplitudes / norm;
  ComplexMatrix rho = psi * psi.adjoint();
  return DensityMatrix(std::move(rho), std::move(factor_dims));
}

inline DensityMatrix product_state(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<int> dims = a.factor_dims();
  dims.insert(dims.end(), b.factor_dims().begin(), b.factor_dims().end());
  return DensityMatrix(tensor_product(a.matrix(), b.matrix()), std::move(dims));
}

inline DensityMatrix maximally_mixed(int d) {
  if (d < 1) throw InvalidDimensionError("dimension must be at least 1");
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

/// Diagonal state from a probability vector. Entries must be non-negative
/// and sum to one within kTraceTol.
inline DensityMatrix diagonal_state(const std::vector<double>& probabilities) {
  if (probabilities.empty()) throw InvalidDimensionError("probability list is empty");
  ComplexMatrix rho = ComplexMatrix::Zero(probabilities.size(), probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] < 0.0) throw DomainError("negative probability in diagonal state");
    rho(i, i) = probabilities[i];
  }
  return DensityMatrix(std::move(rho));
}

}  // namespace twocopy

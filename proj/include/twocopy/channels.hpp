#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "twocopy/qmath.hpp"
#include "twocopy/states.hpp"

namespace twocopy {

/// Whether channel construction enforces physical validity. kSkip exists
/// only so tests can build deliberately unphysical fixtures.
enum class Validation { kEnforce, kSkip };

/// Channel that multiplies the (j,k) entry of a state, written in its
/// decoherence basis, by omega(j,k). The diagonal is left untouched.
///
/// Complete positivity is equivalent to omega being positive semidefinite,
/// which the constructor checks along with omega_jj = 1, omega Hermitian,
/// |omega_jk| <= 1 and a unitary basis.
class PureDecoherenceChannel {
 public:
  /// Channel decohering in the computational basis.
  explicit PureDecoherenceChannel(ComplexMatrix omega, Validation validation = Validation::kEnforce)
      : PureDecoherenceChannel(omega, ComplexMatrix::Identity(omega.rows(), omega.rows()), validation) {}

  /// Columns of `basis` are the decoherence basis vectors.
  PureDecoherenceChannel(ComplexMatrix omega, ComplexMatrix basis,
                         Validation validation = Validation::kEnforce)
      : omega_(std::move(omega)), basis_(std::move(basis)) {
    const auto d = omega_.rows();
    if (omega_.cols() != d) throw ShapeError("omega must be square");
    if (d < 2 || d > kMaxDimension) {
      throw InvalidDimensionError("channel dimension must lie in [2, " + std::to_string(kMaxDimension) + "]");
    }
    if (basis_.rows() != d || basis_.cols() != d) throw ShapeError("basis must match omega's dimension");
    computational_ = (basis_.array() == ComplexMatrix::Identity(d, d).array()).all();
    if (validation == Validation::kEnforce) validate();
  }

  static PureDecoherenceChannel identity(int d) {
    return PureDecoherenceChannel(ComplexMatrix::Ones(d, d));
  }

  static PureDecoherenceChannel full_dephasing(int d) {
    return PureDecoherenceChannel(ComplexMatrix::Identity(d, d));
  }

  int dim() const { return static_cast<int>(omega_.rows()); }
  const ComplexMatrix& omega() const { return omega_; }
  const ComplexMatrix& basis() const { return basis_; }
  bool computational_basis() const { return computational_; }

  /// Same rates, decoherence basis rotated to rotation * basis().
  PureDecoherenceChannel rotated(const ComplexMatrix& rotation) const {
    return PureDecoherenceChannel(omega_, rotation * basis_);
  }

 private:
  void validate() const {
    const auto d = omega_.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(omega_(j, j) - 1.0) > kHermitianTol) {
        throw DomainError("omega diagonal entries must equal 1");
      }
    }
    if (!is_hermitian(omega_)) throw DomainError("omega must satisfy omega_jk = conj(omega_kj)");
    if (omega_.cwiseAbs().maxCoeff() > 1.0 + kHermitianTol) {
      throw DomainError("inverse decoherence rates |omega_jk| must not exceed 1");
    }
    const double lowest = min_eigenvalue(omega_);
    if (lowest < -kDerivedTol) {
      throw DomainError("omega is not positive semidefinite (min eigenvalue " + std::to_string(lowest) +
                        "); the channel would not be completely positive");
    }
    if (unitarity_residual(basis_) > kDerivedTol) throw DomainError("decoherence basis is not unitary");
  }

  ComplexMatrix omega_;
  ComplexMatrix basis_;
  bool computational_ = true;
};

/// Action of the channel on an arbitrary d x d operator.
inline ComplexMatrix apply_to_operator(const PureDecoherenceChannel& ch, const ComplexMatrix& x) {
  if (x.rows() != ch.dim() || x.cols() != ch.dim()) throw ShapeError("operator dimension does not match channel");
  if (ch.computational_basis()) return ch.omega().cwiseProduct(x);
  const ComplexMatrix& u = ch.basis();
  const ComplexMatrix in_basis = u.adjoint() * x * u;
  return u * ch.omega().cwiseProduct(in_basis) * u.adjoint();
}

inline DensityMatrix apply(const PureDecoherenceChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.dim()) {
    throw ShapeError("state dimension " + std::to_string(rho.dim()) + " does not match channel dimension " +
                     std::to_string(ch.dim()));
  }
  return DensityMatrix(apply_to_operator(ch, rho.matrix()), rho.factor_dims());
}

/// Action of ch (x) ch on an operator on d (x) d.
inline ComplexMatrix apply_two_copies_to_operator(const PureDecoherenceChannel& ch, const ComplexMatrix& x) {
  const int d = ch.dim();
  if (x.rows() != d * d || x.cols() != d * d) throw ShapeError("operator is not on d (x) d");
  // (omega (x) omega)_{(jk),(lm)} = omega_jl omega_km
  const ComplexMatrix omega2 = tensor_product(ch.omega(), ch.omega());
  if (ch.computational_basis()) return omega2.cwiseProduct(x);
  const ComplexMatrix u2 = tensor_product(ch.basis(), ch.basis());
  const ComplexMatrix in_basis = u2.adjoint() * x * u2;
  return u2 * omega2.cwiseProduct(in_basis) * u2.adjoint();
}

inline DensityMatrix apply_two_copies(const PureDecoherenceChannel& ch, const DensityMatrix& rho) {
  const int d = ch.dim();
  if (rho.dim() != d * d) {
    throw ShapeError("two-copy state dimension " + std::to_string(rho.dim()) + " is not " + std::to_string(d) +
                     "^2");
  }
  return DensityMatrix(apply_two_copies_to_operator(ch, rho.matrix()), {d, d});
}

/// Unnormalized Choi operator sum_jk E(|j><k|) (x) |j><k| with the output
/// leg first.
inline ComplexMatrix choi_operator(const PureDecoherenceChannel& ch) {
  const int d = ch.dim();
  ComplexMatrix out = ComplexMatrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const ComplexMatrix image = apply_to_operator(ch, basis_operator(d, j, k));
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) out(a * d + j, b * d + k) = image(a, b);
      }
    }
  }
  return out;
}

struct ChoiDiagnostics {
  double min_eigenvalue = 0.0;
  /// max entry of |Tr_out(Omega) - I|
  double trace_preservation_residual = 0.0;

  bool completely_positive() const { return min_eigenvalue >= -kDerivedTol; }
  bool trace_preserving() const { return trace_preservation_residual <= kDerivedTol; }
  bool valid() const { return completely_positive() && trace_preserving(); }
};

inline ChoiDiagnostics diagnose_choi(const ComplexMatrix& choi, int d) {
  const int dims[] = {d, d};
  ChoiDiagnostics diag;
  diag.min_eigenvalue = min_eigenvalue(choi);
  diag.trace_preservation_residual =
      (partial_trace(choi, dims, 0) - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  return diag;
}

/// A Choi operator that passed the positivity and trace-preservation checks.
class ChoiMatrix {
 public:
  ChoiMatrix(ComplexMatrix matrix, int d) : matrix_(std::move(matrix)), d_(d) {
    if (matrix_.rows() != d * d || matrix_.cols() != d * d) throw ShapeError("Choi matrix must be d^2 x d^2");
    const auto diag = diagnose_choi(matrix_, d_);
    if (!diag.completely_positive()) {
      throw DomainError("Choi matrix is not positive semidefinite (min eigenvalue " +
                        std::to_string(diag.min_eigenvalue) + ")");
    }
    if (!diag.trace_preserving()) throw DomainError("Choi matrix partial trace differs from identity");
  }

  int dim() const { return d_; }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
  int d_;
};

inline ChoiMatrix choi(const PureDecoherenceChannel& ch) { return ChoiMatrix(choi_operator(ch), ch.dim()); }

/// Qubit channel rho -> p rho + (1-p) U rho U^dagger with
/// U = e^{ia}|0><0| + e^{ib}|1><1|.
inline PureDecoherenceChannel qubit_channel_from_mixture(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mixing weight p must lie in [0, 1]");
  const Complex w01 = p + (1.0 - p) * std::exp(kI * (a - b));
  ComplexMatrix omega(2, 2);
  omega << 1.0, w01, std::conj(w01), 1.0;
  return PureDecoherenceChannel(std::move(omega));
}

/// Double-commutator Lindblad model with Hamiltonian spectrum `energies`.
struct DoubleCommutatorModel {
  std::vector<double> energies;
  double gamma = 1.0;
  double hbar = 1.0;
  double time = 1.0;
};

namespace detail {

inline void check_model(const DoubleCommutatorModel& model) {
  if (!(model.gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(model.hbar > 0.0)) throw DomainError("hbar must be positive");
  if (!(model.time >= 0.0)) throw DomainError("time must be non-negative");
  if (model.energies.size() < 2) throw InvalidDimensionError("model needs at least two energies");
}

}  // namespace detail

/// exp(t L) for the double-commutator generator. The Hamiltonian is
/// diagonal, so the decoherence basis is the computational one and
/// omega_jk = exp[t (i D/hbar - D^2 / (2 hbar^2 gamma))], D = h_j - h_k.
inline PureDecoherenceChannel channel_from_master_equation(const DoubleCommutatorModel& model) {
  detail::check_model(model);
  const int d = static_cast<int>(model.energies.size());
  ComplexMatrix omega(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const double gap = model.energies[j] - model.energies[k];
      const Complex rate(-gap * gap / (2.0 * model.hbar * model.hbar * model.gamma), gap / model.hbar);
      omega(j, k) = std::exp(model.time * rate);
    }
  }
  return PureDecoherenceChannel(std::move(omega));
}

/// Ground-truth mean of |omega_jk|^2 over pairs j < k.
inline double average_lambda_squared(const PureDecoherenceChannel& ch) {
  const int d = ch.dim();
  double sum = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) sum += std::norm(ch.omega()(j, k));
  }
  return sum / antisymmetric_dim(d);
}

enum class BasisChoice { kComputational, kHaarRandom };

/// Random valid channel: omega is the Gram matrix of unit vectors that share
/// a random common component, so rates spread over (0, 1).
inline PureDecoherenceChannel random_pure_decoherence_channel(int d, Seed seed,
                                                              BasisChoice basis = BasisChoice::kHaarRandom) {
  if (d < 2 || d > kMaxDimension) throw InvalidDimensionError("channel dimension out of range");
  RandomStream stream(split(seed, 0));
  ComplexVector common(d);
  for (int i = 0; i < d; ++i) common(i) = Complex(stream.normal(), stream.normal());
  const double weight = 3.0 * stream.uniform();
  ComplexMatrix vectors(d, d);
  for (int j = 0; j < d; ++j) {
    ComplexVector v(d);
    for (int i = 0; i < d; ++i) v(i) = weight * common(i) + Complex(stream.normal(), stream.normal());
    vectors.col(j) = v.normalized();
  }
  ComplexMatrix omega = vectors.adjoint() * vectors;
  omega = 0.5 * (omega + omega.adjoint()).eval();
  for (int j = 0; j < d; ++j) omega(j, j) = 1.0;
  if (basis == BasisChoice::kComputational) return PureDecoherenceChannel(std::move(omega));
  return PureDecoherenceChannel(std::move(omega), haar_random_unitary(d, split(seed, 1)));
}

}  // namespace twocopy

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "twocopy/channels.hpp"
#include "twocopy/qmath.hpp"
#include "twocopy/random.hpp"
#include "twocopy/states.hpp"

namespace twocopy {

/// Eigenvalues closer than this are one measurement outcome.
inline constexpr double kDegeneracyTol = 1e-9;

/// Hermitian operator measured projectively. Degenerate eigenvalues are
/// merged, so e.g. SWAP is a genuinely two-outcome measurement.
class Observable {
 public:
  struct Outcome {
    double value;
    ComplexMatrix projector;
  };

  /// Builds the outcome list from a numerical eigendecomposition.
  explicit Observable(ComplexMatrix matrix, std::string name = "observable")
      : matrix_(std::move(matrix)), name_(std::move(name)) {
    check_hermitian();
    const Eigensystem es = hermitian_eigensystem(matrix_);
    const auto n = es.values.size();
    for (Eigen::Index i = 0; i < n;) {
      Eigen::Index j = i;
      double sum = 0.0;
      ComplexMatrix projector = ComplexMatrix::Zero(matrix_.rows(), matrix_.cols());
      while (j < n && es.values(j) - es.values(i) <= kDegeneracyTol) {
        sum += es.values(j);
        projector += es.vectors.col(j) * es.vectors.col(j).adjoint();
        ++j;
      }
      // Snap to a 1e-12 grid so exact spectra such as {-1, 1} stay exact.
      const double value = std::round(sum / static_cast<double>(j - i) * 1e12) / 1e12;
      outcomes_.push_back({value, std::move(projector)});
      i = j;
    }
    check_reconstruction();
  }

  /// Builds the observable sum_i value_i P_i from a known spectral
  /// decomposition. The projectors must be orthogonal and complete.
  static Observable from_spectrum(std::vector<Outcome> outcomes, std::string name) {
    if (outcomes.empty()) throw ShapeError("observable needs at least one outcome");
    const auto n = outcomes.front().projector.rows();
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    ComplexMatrix completeness = ComplexMatrix::Zero(n, n);
    for (const auto& o : outcomes) {
      m += o.value * o.projector;
      completeness += o.projector;
    }
    if ((completeness - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > kDerivedTol) {
      throw ShapeError("outcome projectors of " + name + " do not sum to the identity");
    }
    Observable obs;
    obs.matrix_ = std::move(m);
    obs.name_ = std::move(name);
    obs.outcomes_ = std::move(outcomes);
    obs.check_hermitian();
    obs.check_reconstruction();
    return obs;
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  Observable() = default;

  void check_hermitian() const {
    if (matrix_.rows() != matrix_.cols()) throw ShapeError("observable must be square");
    if (!is_hermitian(matrix_)) throw ShapeError("observable " + name_ + " is not Hermitian");
  }

  void check_reconstruction() const {
    ComplexMatrix rebuilt = ComplexMatrix::Zero(matrix_.rows(), matrix_.cols());
    for (const auto& o : outcomes_) rebuilt += o.value * o.projector;
    if ((rebuilt - matrix_).cwiseAbs().maxCoeff() > kDerivedTol) {
      throw ShapeError("spectral reconstruction of " + name_ + " failed");
    }
  }

  ComplexMatrix matrix_;
  std::string name_;
  std::vector<Outcome> outcomes_;
};

/// Mean of repeated single-shot outcomes.
struct SampledMean {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(shots)
  std::uint64_t shots = 0;
  Seed seed{};
};

namespace detail {

inline ComplexMatrix ket_bra(const ComplexVector& v) { return v * v.adjoint(); }

inline ComplexVector qubit_pair(Complex c00, Complex c01, Complex c10, Complex c11) {
  ComplexVector v(4);
  v << c00, c01, c10, c11;
  return v;
}

// (|01> +- |10>) / sqrt(2)
inline ComplexVector phi(int sign) {
  const double r = 1.0 / std::sqrt(2.0);
  return qubit_pair(0.0, r, sign * r, 0.0);
}

// Re Tr[a b] without forming the product.
inline double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace detail

/// SWAP on d (x) d with outcomes +1 on P+ and -1 on P-.
inline Observable swap_operator(int d) {
  return Observable::from_spectrum({{-1.0, projector_antisymmetric(d)}, {1.0, projector_symmetric(d)}}, "swap");
}

/// (|01><10| + |10><01|) / 2, with outcomes -1/2, 0, +1/2.
inline Observable z_operator() {
  const ComplexMatrix plus = detail::ket_bra(detail::phi(+1));
  const ComplexMatrix minus = detail::ket_bra(detail::phi(-1));
  const ComplexMatrix rest = detail::ket_bra(detail::qubit_pair(1, 0, 0, 0)) +
                             detail::ket_bra(detail::qubit_pair(0, 0, 0, 1));
  return Observable::from_spectrum({{-0.5, minus}, {0.0, rest}, {0.5, plus}}, "z");
}

inline Observable sigma_x() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector plus(2), minus(2);
  plus << r, r;
  minus << r, -r;
  return Observable::from_spectrum({{-1.0, detail::ket_bra(minus)}, {1.0, detail::ket_bra(plus)}}, "sigma_x");
}

/// -i(|0><1| - |1><0|); +1 eigenvector (|0> + i|1>)/sqrt(2).
inline Observable sigma_y() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector plus(2), minus(2);
  plus << r, Complex(0.0, r);
  minus << r, Complex(0.0, -r);
  return Observable::from_spectrum({{-1.0, detail::ket_bra(minus)}, {1.0, detail::ket_bra(plus)}}, "sigma_y");
}

inline Observable identity_observable(int n) {
  return Observable::from_spectrum({{1.0, ComplexMatrix::Identity(n, n)}}, "identity");
}

/// Tr[rho obs]
inline double expectation(const Observable& obs, const DensityMatrix& rho) {
  if (obs.dim() != rho.dim()) throw ShapeError("observable and state dimensions differ");
  const Complex value = rho.matrix().cwiseProduct(obs.matrix().transpose()).sum();
  if (std::abs(value.imag()) > kDerivedTol) throw ShapeError("expectation value has an imaginary part");
  return value.real();
}

/// Born probabilities of each outcome. Negative values down to -1e-10 are
/// clipped and the rest renormalized; anything lower is an invalid state.
inline std::vector<double> outcome_probabilities(const Observable& obs, const DensityMatrix& rho) {
  if (obs.dim() != rho.dim()) throw ShapeError("observable and state dimensions differ");
  std::vector<double> probs;
  probs.reserve(obs.outcomes().size());
  double total = 0.0;
  for (const auto& o : obs.outcomes()) {
    double p = detail::real_trace_product(rho.matrix(), o.projector);
    if (p < -kPositivityTol) throw StateValidityError("negative outcome probability " + std::to_string(p));
    p = std::max(p, 0.0);
    probs.push_back(p);
    total += p;
  }
  if (!(total > 0.0)) throw StateValidityError("outcome probabilities vanish");
  for (double& p : probs) p /= total;
  return probs;
}

/// Draws `shots` outcomes with the given values and probabilities (one
/// multinomial draw) and returns their sample mean.
inline SampledMean sample_outcomes(const std::vector<double>& values, const std::vector<double>& probabilities,
                                   std::uint64_t shots, Seed seed) {
  if (shots < 1) throw DomainError("shots must be at least 1");
  if (values.size() != probabilities.size() || values.empty()) throw ShapeError("outcome list mismatch");
  RandomStream stream(seed);
  std::vector<std::uint64_t> counts(values.size(), 0);
  std::uint64_t remaining = shots;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < values.size() && remaining > 0; ++i) {
    const double p = mass > 0.0 ? std::clamp(probabilities[i] / mass, 0.0, 1.0) : 0.0;
    counts[i] = stream.binomial(remaining, p);
    remaining -= counts[i];
    mass -= probabilities[i];
  }
  counts.back() += remaining;

  const double n = static_cast<double>(shots);
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += static_cast<double>(counts[i]) * values[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ss += static_cast<double>(counts[i]) * (values[i] - mean) * (values[i] - mean);
  }
  const double variance = shots > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(variance / n), shots, seed};
}

/// Shot-noise simulation of measuring `obs` on `rho`.
inline SampledMean sample_expectation(const Observable& obs, const DensityMatrix& rho, std::uint64_t shots,
                                      Seed seed) {
  const auto probs = outcome_probabilities(obs, rho);
  std::vector<double> values;
  for (const auto& o : obs.outcomes()) values.push_back(o.value);
  return sample_outcomes(values, probs, shots, seed);
}

// ---------------------------------------------------------------------------
// Process POVMs
//
// Elements act on the probe legs first, then the measured legs:
// (in) (x) (out) for one copy and (in1, in2) (x) (out1, out2) for two.
// An experiment preparing rho and measuring effect M has element
// rho^T (x) M, and its probability is Tr[Omega F] with Omega the Choi
// operator rearranged into the same leg order.
// ---------------------------------------------------------------------------

/// Choi operator(s) of `copies` uses of the channel in PPOVM leg order.
inline ComplexMatrix process_operator(const PureDecoherenceChannel& ch, int copies) {
  const int d = ch.dim();
  const ComplexMatrix single = choi_operator(ch);  // (out, in)
  if (copies == 1) {
    const int dims[] = {d, d};
    const int perm[] = {1, 0};
    return permute_subsystems(single, dims, perm);
  }
  if (copies == 2) {
    const int dims[] = {d, d, d, d};  // out1, in1, out2, in2
    const int perm[] = {1, 3, 0, 2};
    return permute_subsystems(tensor_product(single, single), dims, perm);
  }
  throw ShapeError("copies must be 1 or 2");
}

/// Tr[Omega F] for any (possibly non-Hermitian) element.
inline Complex ppovm_trace(const ComplexMatrix& element, const PureDecoherenceChannel& ch, int copies) {
  if (copies != 1 && copies != 2) throw ShapeError("copies must be 1 or 2");
  const int d = ch.dim();
  const int expected = copies == 1 ? d * d : d * d * d * d;
  if (element.rows() != expected || element.cols() != expected) {
    throw ShapeError("PPOVM element is " + std::to_string(element.rows()) + "x" + std::to_string(element.cols()) +
                     ", expected " + std::to_string(expected));
  }
  return process_operator(ch, copies).cwiseProduct(element.transpose()).sum();
}

/// Tr[Omega F] (one copy) or Tr[(Omega (x) Omega) F] (two copies).
inline double ppovm_probability(const ComplexMatrix& element, const PureDecoherenceChannel& ch, int copies) {
  if (!is_hermitian(element)) throw ShapeError("PPOVM element must be Hermitian");
  return ppovm_trace(element, ch, copies).real();
}

/// Labeled set of positive operators on a Choi space.
class ProcessPOVM {
 public:
  ProcessPOVM(std::vector<ComplexMatrix> elements, std::vector<std::string> labels, int copies)
      : elements_(std::move(elements)), labels_(std::move(labels)), copies_(copies) {
    if (elements_.size() != labels_.size() || elements_.empty()) throw ShapeError("PPOVM labels mismatch");
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      if (min_eigenvalue(elements_[i]) < -kDerivedTol) {
        throw ShapeError("PPOVM element " + labels_[i] + " is not positive semidefinite");
      }
    }
  }

  const std::vector<ComplexMatrix>& elements() const { return elements_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int copies() const { return copies_; }

  std::vector<double> probabilities(const PureDecoherenceChannel& ch) const {
    const ComplexMatrix omega = process_operator(ch, copies_);
    std::vector<double> out;
    for (const auto& f : elements_) out.push_back(omega.cwiseProduct(f.transpose()).sum().real());
    return out;
  }

 private:
  std::vector<ComplexMatrix> elements_;
  std::vector<std::string> labels_;
  int copies_;
};

/// One channel use on half of (|00> + |11>)/sqrt(2), output measured in
/// {X+, X-, Xo}: X+- projects onto (|00> +- |11>)/sqrt(2). The probe's 1/2
/// normalization sits in the elements, so probabilities sum to 1.
inline ProcessPOVM x_povm() {
  const double r = 1.0 / std::sqrt(2.0);
  const ComplexMatrix plus = detail::ket_bra(detail::qubit_pair(r, 0, 0, r));
  const ComplexMatrix minus = detail::ket_bra(detail::qubit_pair(r, 0, 0, -r));
  const ComplexMatrix rest = ComplexMatrix::Identity(4, 4) - plus - minus;
  return ProcessPOVM({0.5 * plus, 0.5 * minus, 0.5 * rest}, {"X+", "X-", "Xo"}, 1);
}

/// As x_povm with Y+- projecting onto (|00> +- i|11>)/sqrt(2).
inline ProcessPOVM y_povm() {
  const double r = 1.0 / std::sqrt(2.0);
  const ComplexMatrix plus = detail::ket_bra(detail::qubit_pair(r, 0, 0, Complex(0, r)));
  const ComplexMatrix minus = detail::ket_bra(detail::qubit_pair(r, 0, 0, Complex(0, -r)));
  const ComplexMatrix rest = ComplexMatrix::Identity(4, 4) - plus - minus;
  return ProcessPOVM({0.5 * plus, 0.5 * minus, 0.5 * rest}, {"Y+", "Y-", "Yo"}, 1);
}

/// T = |00><11| = ((X+ - X-) + i (Y+ - Y-)) / 2 in terms of the projectors
/// (twice the PPOVM elements). Never sampled directly.
inline ComplexMatrix t_operator() {
  const auto x = x_povm().elements();
  const auto y = y_povm().elements();
  return (x[0] - x[1]) + kI * (y[0] - y[1]);
}

/// Two copies of |+> probed with sigma_x on the first output and sigma_y on
/// the second: F_{s,t} = |++><++| (x) |s_x, t_y><s_x, t_y|.
inline ProcessPOVM xy_product_povm() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector plus(2);
  plus << r, r;
  const ComplexMatrix probe = detail::ket_bra(tensor_product(plus, plus));
  const Observable sx_obs = sigma_x(), sy_obs = sigma_y();
  const auto& xs = sx_obs.outcomes();  // [-1, +1]
  const auto& ys = sy_obs.outcomes();
  std::vector<ComplexMatrix> elements;
  std::vector<std::string> labels;
  for (int sx : {1, 0}) {
    for (int sy : {1, 0}) {
      elements.push_back(tensor_product(probe, tensor_product(xs[sx].projector, ys[sy].projector)));
      labels.push_back(std::string("F") + (sx ? "+" : "-") + (sy ? "+" : "-"));
    }
  }
  return ProcessPOVM(std::move(elements), std::move(labels), 2);
}

/// Probe |phi+> on two copies, outputs resolved into |phi+>, |phi->, and
/// span{|00>, |11>} (the last never fires for pure decoherence).
inline ProcessPOVM phi_plus_povm() {
  const ComplexMatrix probe = detail::ket_bra(detail::phi(+1));
  const ComplexMatrix same = detail::ket_bra(detail::qubit_pair(1, 0, 0, 0)) +
                             detail::ket_bra(detail::qubit_pair(0, 0, 0, 1));
  return ProcessPOVM({tensor_product(probe, detail::ket_bra(detail::phi(+1))),
                      tensor_product(probe, detail::ket_bra(detail::phi(-1))), tensor_product(probe, same)},
                     {"F+", "F-", "Fo"}, 2);
}

/// Q = |phi+><phi+| (x) Z; Tr[(Omega (x) Omega) Q] = |omega_01|^2 / 2.
inline ComplexMatrix q_operator() {
  return tensor_product(detail::ket_bra(detail::phi(+1)), z_operator().matrix());
}

struct XYExpectations {
  double x = 0.0;
  double y = 0.0;
};

/// <sigma_x> and <sigma_y> on the channel output for input |+>.
inline XYExpectations qubit_xy_expectations(const PureDecoherenceChannel& ch) {
  if (ch.dim() != 2) throw UnsupportedDimensionError("the x/y scheme needs a qubit channel");
  const DensityMatrix out = apply(ch, pure_state(ComplexVector::Ones(2)));
  return {expectation(sigma_x(), out), expectation(sigma_y(), out)};
}

}  // namespace twocopy

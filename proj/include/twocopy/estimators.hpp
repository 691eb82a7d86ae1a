#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twocopy/channels.hpp"
#include "twocopy/qmath.hpp"
#include "twocopy/states.hpp"

namespace twocopy {

/// A point estimate with the formula that produced it.
struct EstimateResult {
  double value = 0.0;
  std::string formula;
  std::map<std::string, double> inputs;
  std::optional<double> std_error;
  /// The formula's argument left the physical range by more than shot noise
  /// explains (3 std errors, or 1e-12 for exact data) and was clamped.
  bool clamped = false;
  /// value lies outside [0, 1].
  bool outside_physical_range = false;
};

/// Result of inverting the average rate of an equally gapped
/// double-commutator model.
struct GammaEstimate {
  double gamma = 0.0;
  double K = 0.0;  // exp(-delta^2 / (hbar^2 gamma))
  RealMatrix lambda_jk;
  std::optional<double> delta;
};

namespace detail {

inline constexpr double kSingularTol = 1e-9;
inline constexpr double kNoiseSigmas = 3.0;
inline constexpr double kExactExcursion = 1e-12;

inline bool excursion_is_significant(double excursion, std::optional<double> std_error) {
  const double allowed = std_error ? kNoiseSigmas * *std_error : kExactExcursion;
  return excursion > allowed;
}

inline void flag_range(EstimateResult& r) { r.outside_physical_range = r.value < 0.0 || r.value > 1.0; }

inline void check_weight(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("Werner weight q must lie in [0, 1]");
}

}  // namespace detail

/// lambda = sqrt(x^2 + y^2) from the single-qubit sigma_x / sigma_y means.
inline EstimateResult qubit_lambda_from_xy(double x, double y, std::optional<double> x_std_error = {},
                                           std::optional<double> y_std_error = {}) {
  EstimateResult r;
  r.formula = "lambda_from_xy";
  r.inputs = {{"x", x}, {"y", y}};
  r.value = std::hypot(x, y);
  if (x_std_error && y_std_error) {
    r.std_error = r.value > 0.0 ? std::hypot(x * *x_std_error, y * *y_std_error) / r.value
                                : std::hypot(*x_std_error, *y_std_error);
  }
  r.clamped = r.value > 1.0 && detail::excursion_is_significant(r.value - 1.0, r.std_error);
  detail::flag_range(r);
  return r;
}

/// lambda = sqrt(2 <Z>) from the two-copy |phi+> experiment.
inline EstimateResult qubit_lambda_from_z(double mean_z, std::optional<double> std_error = {}) {
  if (mean_z < -0.05) {
    throw InconsistentDataError("<Z> = " + std::to_string(mean_z) + " is too negative to be shot noise");
  }
  EstimateResult r;
  r.formula = "lambda_from_z";
  r.inputs = {{"mean_z", mean_z}};
  r.clamped = mean_z < 0.0 && detail::excursion_is_significant(-mean_z, std_error);
  r.value = std::sqrt(2.0 * std::max(mean_z, 0.0));
  if (std_error) r.std_error = r.value > 0.0 ? *std_error / r.value : std::sqrt(2.0 * *std_error);
  detail::flag_range(r);
  return r;
}

/// lambda = sqrt((3<S> - 2q) / (4q - 3)) from the qubit Werner/SWAP
/// experiment. The radicand is clamped into [0, 1].
inline EstimateResult qubit_lambda_from_swap(double mean_s, double q, std::optional<double> std_error = {}) {
  detail::check_weight(q);
  const double denominator = 4.0 * q - 3.0;
  if (std::abs(denominator) <= detail::kSingularTol) {
    throw SingularConfigurationError("q = 3/4 = d+/d^2 makes the SWAP estimator singular");
  }
  EstimateResult r;
  r.formula = "lambda_from_swap_qubit";
  r.inputs = {{"mean_s", mean_s}, {"q", q}};
  const double radicand = (3.0 * mean_s - 2.0 * q) / denominator;
  const std::optional<double> radicand_error =
      std_error ? std::optional<double>(3.0 * *std_error / std::abs(denominator)) : std::nullopt;
  const double clamped = std::clamp(radicand, 0.0, 1.0);
  r.clamped = detail::excursion_is_significant(std::abs(radicand - clamped), radicand_error);
  r.value = std::sqrt(clamped);
  if (radicand_error) r.std_error = r.value > 0.0 ? *radicand_error / (2.0 * r.value) : std::sqrt(*radicand_error);
  detail::flag_range(r);
  return r;
}

/// Average squared inverse decoherence rate from the d-dimensional
/// Werner/SWAP experiment: ((d+1)<S> - 2q) / (2qd - (d+1)).
inline EstimateResult qudit_avg_lambda_squared(double mean_s, double q, int d,
                                               std::optional<double> std_error = {}) {
  if (d < 2) throw InvalidDimensionError("dimension must be at least 2");
  detail::check_weight(q);
  const double denominator = 2.0 * q * d - (d + 1.0);
  if (std::abs(denominator) <= detail::kSingularTol) {
    throw SingularConfigurationError("q = d+/d^2 makes the SWAP estimator singular");
  }
  EstimateResult r;
  r.formula = "avg_lambda_squared_from_swap";
  r.inputs = {{"mean_s", mean_s}, {"q", q}, {"d", static_cast<double>(d)}};
  r.value = ((d + 1.0) * mean_s - 2.0 * q) / denominator;
  if (std_error) r.std_error = (d + 1.0) * *std_error / std::abs(denominator);
  detail::flag_range(r);
  return r;
}

/// sum_{n=1}^{d-1} (d - n) K^{n^2}: d_- times the average rate of an
/// equally gapped spectrum.
inline double equally_gapped_sum(double K, int d) {
  double sum = 0.0;
  for (int n = 1; n < d; ++n) sum += (d - n) * std::pow(K, static_cast<double>(n) * n);
  return sum;
}

inline std::vector<double> equally_gapped_energies(int d, double delta) {
  std::vector<double> energies(d);
  for (int j = 0; j < d; ++j) energies[j] = j * delta;
  return energies;
}

/// Average squared rate of a double-commutator channel at the model's time:
/// (1/d_-) sum_{j<k} exp(-t D_jk^2 / (hbar^2 gamma)). Any spectrum.
inline double forward_avg_lambda(const DoubleCommutatorModel& model) {
  detail::check_model(model);
  const int d = static_cast<int>(model.energies.size());
  double sum = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const double gap = model.energies[j] - model.energies[k];
      sum += std::exp(-model.time * gap * gap / (model.hbar * model.hbar * model.gamma));
    }
  }
  return sum / antisymmetric_dim(d);
}

/// Inverts the equally gapped average rate for gamma.
///
/// avg * d_- = sum (d - n) K^{n^2} is strictly increasing in K on (0, 1),
/// zero at 0 and d_- at 1, so it has one root there. Bisection runs on
/// ln K, which keeps full relative precision when K is tiny (small gamma).
/// Per-pair rates lambda_jk = K^{|j-k|^2 / 2} need no knowledge of delta.
inline GammaEstimate gamma_from_avg_lambda(double avg, int d, double delta, double hbar) {
  if (d < 2 || d > kMaxDimension) {
    throw InvalidDimensionError("gamma inversion supports 2 <= d <= " + std::to_string(kMaxDimension));
  }
  if (delta == 0.0 || !std::isfinite(delta)) throw DomainError("energy gap delta must be non-zero");
  if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
  if (avg == 1.0) {
    throw OutOfRangeError("average rate 1 corresponds to gamma = infinity", OutOfRangeError::Boundary::kUpper);
  }
  if (avg == 0.0) {
    throw OutOfRangeError("average rate 0 corresponds to gamma = 0", OutOfRangeError::Boundary::kLower);
  }
  if (!(avg > 0.0 && avg < 1.0)) {
    throw OutOfRangeError("average rate " + std::to_string(avg) + " lies outside (0, 1)",
                          OutOfRangeError::Boundary::kNone);
  }

  const double pairs = antisymmetric_dim(d);
  const auto residual = [&](double log_k) {
    double sum = 0.0;
    for (int n = 1; n < d; ++n) sum += (d - n) * std::exp(static_cast<double>(n) * n * log_k);
    return sum - avg * pairs;
  };
  // sum <= d_- K and sum >= (d-1) K bound the root on both sides; the
  // extra unit in ln K keeps rounding from closing the bracket (d = 2 has
  // the root exactly on the bound).
  const double lo = std::log(avg) - 1.0;
  const double hi = std::min(0.0, std::log(avg * pairs / (d - 1)) + 1.0);
  const double log_k = find_root_monotone(residual, lo, hi, 1e-15 * std::abs(lo));

  GammaEstimate est;
  est.K = std::exp(log_k);
  est.gamma = -delta * delta / (hbar * hbar * log_k);
  est.delta = delta;
  est.lambda_jk = RealMatrix(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const double n = std::abs(j - k);
      est.lambda_jk(j, k) = std::exp(0.5 * n * n * log_k);
    }
  }
  return est;
}

}  // namespace twocopy

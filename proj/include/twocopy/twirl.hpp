#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "twocopy/measurement.hpp"
#include "twocopy/qmath.hpp"
#include "twocopy/random.hpp"
#include "twocopy/states.hpp"

namespace twocopy {

enum class TwirlMode {
  kHaarMonteCarlo,  // empirical average over Haar-random U
  kExactDesign,     // uniform average over the 24 single-qubit Cliffords
};

struct TwirlConfig {
  TwirlMode mode = TwirlMode::kHaarMonteCarlo;
  std::uint64_t samples = 1000;
  Seed seed{};
  /// Worker threads for Haar mode. The result does not depend on it.
  unsigned threads = 1;
};

/// Minimum size of a uniform unitary 2-design in dimension d.
constexpr long long unitary_design_bound(long long d) { return d * d * d * d - 2 * d * d + 2; }

namespace detail {

// Global phase fixed so the first non-negligible entry is real positive.
inline ComplexMatrix phase_normalized(const ComplexMatrix& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const Complex z = u.data()[i];
    if (std::abs(z) > 1e-9) return u * (std::abs(z) / z);
  }
  return u;
}

inline int pair_dimension(const DensityMatrix& rho) {
  if (rho.is_bipartite_square()) return rho.factor_dims()[0];
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rho.dim()))));
  if (rho.factor_dims().size() != 1 || d * d != rho.dim()) {
    throw ShapeError("twirling needs a state on d (x) d");
  }
  return d;
}

inline ComplexMatrix conjugate_pair(const ComplexMatrix& u, const ComplexMatrix& x) {
  const ComplexMatrix uu = tensor_product(u, u);
  return uu * x * uu.adjoint();
}

}  // namespace detail

/// The single-qubit Clifford group modulo phases, generated from H and S.
inline std::vector<ComplexMatrix> clifford_2design_qubit() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix h(2, 2), s(2, 2);
  h << r, r, r, -r;
  s << 1.0, 0.0, 0.0, kI;
  std::vector<ComplexMatrix> group{ComplexMatrix::Identity(2, 2)};
  for (std::size_t next = 0; next < group.size(); ++next) {
    for (const ComplexMatrix* gen : {&h, &s}) {
      const ComplexMatrix candidate = detail::phase_normalized(*gen * group[next]);
      const bool seen = std::any_of(group.begin(), group.end(), [&](const ComplexMatrix& g) {
        return (g - candidate).cwiseAbs().maxCoeff() < 1e-9;
      });
      if (!seen) group.push_back(candidate);
    }
  }
  return group;
}

/// Closed-form Haar twirl of any operator on d (x) d: the projection onto
/// span{I, S} that preserves Tr X and Tr SX.
inline ComplexMatrix haar_twirl_exact(const ComplexMatrix& x, int d) {
  const ComplexMatrix swap = swap_matrix(d);
  const Complex tr = x.trace();
  const Complex tr_s = swap.cwiseProduct(x.transpose()).sum();
  const double dn = d;
  const double dd = dn * dn;
  const double det = dd * dd - dd;
  const Complex alpha = (dd * tr - dn * tr_s) / det;
  const Complex beta = (dd * tr_s - dn * tr) / det;
  return alpha * ComplexMatrix::Identity(d * d, d * d) + beta * swap;
}

/// Average of (U (x) U) rho (U (x) U)^dagger over Haar samples or the
/// Clifford 2-design. The sampled unitaries are not retained.
inline DensityMatrix twirl(const DensityMatrix& rho, const TwirlConfig& cfg) {
  const int d = detail::pair_dimension(rho);
  const ComplexMatrix& x = rho.matrix();

  if (cfg.mode == TwirlMode::kExactDesign) {
    if (d != 2) throw UnsupportedDimensionError("the exact 2-design twirl is implemented for qubits only");
    const auto design = clifford_2design_qubit();
    ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
    for (const auto& u : design) acc += detail::conjugate_pair(u, x);
    acc /= static_cast<double>(design.size());
    return DensityMatrix(0.5 * (acc + acc.adjoint()), {d, d});
  }

  if (cfg.samples < 1) throw DomainError("Haar twirl needs at least one sample");
  // Fixed-size blocks summed in order keep the result independent of the
  // thread count.
  constexpr std::uint64_t kBlock = 256;
  const std::uint64_t blocks = (cfg.samples + kBlock - 1) / kBlock;
  std::vector<ComplexMatrix> partial(blocks, ComplexMatrix::Zero(d * d, d * d));
  const auto work = [&](std::uint64_t first_block, std::uint64_t stride) {
    for (std::uint64_t b = first_block; b < blocks; b += stride) {
      const std::uint64_t end = std::min(cfg.samples, (b + 1) * kBlock);
      for (std::uint64_t i = b * kBlock; i < end; ++i) {
        partial[b] += detail::conjugate_pair(haar_random_unitary(d, split(cfg.seed, i)), x);
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(blocks)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  ComplexMatrix acc = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& p : partial) acc += p;
  acc /= static_cast<double>(cfg.samples);
  return DensityMatrix(0.5 * (acc + acc.adjoint()), {d, d});
}

/// Largest entry change of `x` under conjugation by U (x) U over `trials`
/// Haar-random U. Zero for an exactly twirled state.
inline double twirl_invariance_residual(const ComplexMatrix& x, int d, Seed seed, int trials = 8) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ComplexMatrix u = haar_random_unitary(d, split(seed, static_cast<std::uint64_t>(t)));
    worst = std::max(worst, (detail::conjugate_pair(u, x) - x).cwiseAbs().maxCoeff());
  }
  return worst;
}

struct SourceWerner {
  DensityMatrix state;
  double q;  // predicted from the source purity
};

/// Twirled two copies of a single-particle source, with q = (1 + Tr eta^2)/2.
inline SourceWerner werner_from_source(const DensityMatrix& eta, const TwirlConfig& cfg) {
  if (eta.factor_dims().size() != 1) throw ShapeError("source state must be a single system");
  const DensityMatrix pair(tensor_product(eta.matrix(), eta.matrix()), {eta.dim(), eta.dim()});
  return {twirl(pair, cfg), 0.5 * (1.0 + purity(eta))};
}

/// Purity of eta estimated from SWAP shots on eta (x) eta.
inline SampledMean purity_via_swap(const DensityMatrix& eta, std::uint64_t shots, Seed seed) {
  const DensityMatrix pair(tensor_product(eta.matrix(), eta.matrix()), {eta.dim(), eta.dim()});
  return sample_expectation(swap_operator(eta.dim()), pair, shots, seed);
}

}  // namespace twocopy

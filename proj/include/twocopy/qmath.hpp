#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "twocopy/errors.hpp"
#include "twocopy/random.hpp"

namespace twocopy {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Entrywise Hermiticity tolerance for constructed operators.
inline constexpr double kHermitianTol = 1e-12;
/// Tolerance for properties of derived quantities (products, eigenvalues).
inline constexpr double kDerivedTol = 1e-10;
/// Largest single-system dimension the toolkit supports.
inline constexpr int kMaxDimension = 32;

inline constexpr Complex kI{0.0, 1.0};

/// max_ij |M_ij - conj(M_ji)|
inline double hermiticity_residual(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  return hermiticity_residual(m) <= tol;
}

/// max_ij |(U U^dagger - I)_ij|
inline double unitarity_residual(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  const auto n = u.rows();
  return (u * u.adjoint() - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// Kronecker product. The row index of the result is a_row * b.rows() + b_row.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// |j><k| in dimension d.
inline ComplexMatrix basis_operator(int d, int j, int k) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(j, k) = 1.0;
  return m;
}

inline ComplexVector basis_vector(int d, int j) {
  ComplexVector v = ComplexVector::Zero(d);
  v(j) = 1.0;
  return v;
}

namespace detail {

inline int product(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

inline void check_dims(const ComplexMatrix& m, std::span<const int> dims) {
  const int total = product(dims);
  if (m.rows() != total || m.cols() != total) {
    throw ShapeError("operator is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " but subsystem dimensions multiply to " +
                     std::to_string(total));
  }
}

// Digits of a flat index in the mixed radix given by dims (most significant first).
inline std::vector<int> unflatten(int index, std::span<const int> dims) {
  std::vector<int> digits(dims.size());
  for (std::size_t s = dims.size(); s-- > 0;) {
    digits[s] = index % dims[s];
    index /= dims[s];
  }
  return digits;
}

}  // namespace detail

/// Reorders tensor factors: subsystem i of the result is subsystem perm[i]
/// of the input.
inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, std::span<const int> dims,
                                        std::span<const int> perm) {
  detail::check_dims(m, dims);
  if (perm.size() != dims.size()) throw ShapeError("permutation length mismatch");
  std::vector<int> new_dims(dims.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_dims[i] = dims[perm[i]];

  const int total = detail::product(dims);
  std::vector<int> source(total);
  for (int idx = 0; idx < total; ++idx) {
    const auto digits = detail::unflatten(idx, new_dims);
    std::vector<int> old_digits(dims.size());
    for (std::size_t i = 0; i < perm.size(); ++i) old_digits[perm[i]] = digits[i];
    int old = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) old = old * dims[s] + old_digits[s];
    source[idx] = old;
  }
  ComplexMatrix out(total, total);
  for (int r = 0; r < total; ++r) {
    for (int c = 0; c < total; ++c) out(r, c) = m(source[r], source[c]);
  }
  return out;
}

/// Traces out subsystem `traced` of an operator on the product space `dims`.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> dims,
                                   std::size_t traced) {
  detail::check_dims(m, dims);
  if (traced >= dims.size()) throw ShapeError("traced subsystem index out of range");
  std::vector<int> perm;
  perm.push_back(static_cast<int>(traced));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i != traced) perm.push_back(static_cast<int>(i));
  }
  const ComplexMatrix moved = permute_subsystems(m, dims, perm);
  const int dt = dims[traced];
  const int rest = detail::product(dims) / dt;
  ComplexMatrix out = ComplexMatrix::Zero(rest, rest);
  for (int t = 0; t < dt; ++t) out += moved.block(t * rest, t * rest, rest, rest);
  return out;
}

struct Eigensystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

/// Spectral decomposition of a Hermitian matrix.
inline Eigensystem hermitian_eigensystem(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("eigensystem requires a square matrix");
  if (!is_hermitian(m, kDerivedTol)) {
    throw ShapeError("eigensystem requires a Hermitian matrix (residual " +
                     std::to_string(hermiticity_residual(m)) + ")");
  }
  // Symmetrize so the solver sees an exactly Hermitian lower triangle.
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw ShapeError("eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  return hermitian_eigensystem(m).values.minCoeff();
}

/// Half the trace norm of a - b; both Hermitian.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("trace distance shape mismatch");
  return 0.5 * hermitian_eigensystem(a - b).values.cwiseAbs().sum();
}

/// Haar-distributed unitary drawn from `stream`: QR of a complex Ginibre
/// matrix with the phases of diag(R) folded back into Q.
inline ComplexMatrix haar_random_unitary(int d, RandomStream& stream) {
  if (d < 1) throw InvalidDimensionError("unitary dimension must be at least 1");
  ComplexMatrix g(d, d);
  const double scale = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) g(r, c) = Complex(stream.normal(), stream.normal()) * scale;
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix& r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    const double mag = std::abs(r(j, j));
    const Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

inline ComplexMatrix haar_random_unitary(int d, Seed seed) {
  RandomStream stream(seed);
  return haar_random_unitary(d, stream);
}

/// Bisection on a bracketing interval of a continuous monotone function.
/// Stops once the bracket is no wider than `tol` (or cannot shrink further
/// in double precision) and returns its midpoint.
template <class F>
double find_root_monotone(F&& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) std::swap(lo, hi);
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi) || std::isnan(f_lo) || std::isnan(f_hi)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace twocopy

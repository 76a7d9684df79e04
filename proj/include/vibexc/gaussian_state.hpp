#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "vibexc/errors.hpp"

namespace vibexc {

using Index = Eigen::Index;

template <typename T>
using RealMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RealVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using ComplexMatrix = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using ComplexVector = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;

// Photon-number pattern, one entry per mode.
using PhotonPattern = std::vector<int>;

// Gaussian state over M modes in the ladder-operator ordering
// xi = (a_1..a_M, a_1^dag..a_M^dag):
//   mean_i = <a_i>                                 (length M)
//   cov    = symmetric-ordered covariance of xi    (2M x 2M)
// The vacuum has mean 0 and cov = I/2. Physical covariances are Hermitian,
// satisfy the block-conjugation structure V = X conj(V) X with
// X = [[0,I],[I,0]], and have positive definite Q = V + I/2.
template <typename T = double>
struct GaussianState {
  ComplexVector<T> mean;
  ComplexMatrix<T> cov;

  Index num_modes() const { return mean.size(); }
};

using GaussianStated = GaussianState<double>;

template <typename T = double>
GaussianState<T> vacuum(Index num_modes) {
  if (num_modes < 1) throw ValidationError("vacuum: need at least one mode");
  GaussianState<T> s;
  s.mean = ComplexVector<T>::Zero(num_modes);
  s.cov = ComplexMatrix<T>::Identity(2 * num_modes, 2 * num_modes) * T(0.5);
  return s;
}

// ---------------------------------------------------------------------------
// Symplectic maps. Each factory validates its parameters; `apply` performs
// the Heisenberg action on (mean, cov).
// ---------------------------------------------------------------------------

template <typename T>
struct Rotation {
  ComplexMatrix<T> unitary; // a -> U a
};

template <typename T>
struct Squeeze {
  RealVector<T> r; // a_j -> cosh(r_j) a_j - sinh(r_j) a_j^dag
};

template <typename T>
struct Displace {
  ComplexVector<T> beta; // a_j -> a_j + beta_j
};

template <typename T>
struct PhaseShift {
  RealVector<T> theta; // a_j -> exp(-i theta_j) a_j
};

template <typename T>
using SymplecticMap = std::variant<Rotation<T>, Squeeze<T>, Displace<T>, PhaseShift<T>>;

inline constexpr double kUnitarityTol = 1e-8;

template <typename T>
Rotation<T> rotation(ComplexMatrix<T> unitary) {
  if (unitary.rows() != unitary.cols() || unitary.rows() < 1)
    throw ValidationError("rotation: matrix must be square and non-empty");
  const T defect =
      (unitary.adjoint() * unitary - ComplexMatrix<T>::Identity(unitary.rows(), unitary.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (!(defect <= T(kUnitarityTol)))
    throw ValidationError("rotation: matrix is not unitary (defect " + std::to_string(double(defect)) + ")");
  return Rotation<T>{std::move(unitary)};
}

inline Rotation<double> rotation(const RealMatrix<double>& orthogonal) {
  return rotation(ComplexMatrix<double>(orthogonal.cast<std::complex<double>>()));
}

template <typename T>
Squeeze<T> squeeze(RealVector<T> r) {
  if (r.size() < 1) throw ValidationError("squeeze: need at least one parameter");
  if (!r.allFinite()) throw ValidationError("squeeze: parameters must be finite");
  return Squeeze<T>{std::move(r)};
}

template <typename T>
Displace<T> displace(ComplexVector<T> beta) {
  if (beta.size() < 1) throw ValidationError("displace: need at least one parameter");
  if (!beta.allFinite()) throw ValidationError("displace: parameters must be finite");
  return Displace<T>{std::move(beta)};
}

template <typename T>
PhaseShift<T> phase_shift(RealVector<T> theta) {
  if (theta.size() < 1) throw ValidationError("phase_shift: need at least one parameter");
  if (!theta.allFinite()) throw ValidationError("phase_shift: parameters must be finite");
  return PhaseShift<T>{std::move(theta)};
}

namespace detail {

template <typename T>
void require_mode_count(const GaussianState<T>& state, Index n, const char* who) {
  if (state.num_modes() != n)
    throw ValidationError(std::string(who) + ": operand acts on " + std::to_string(n) +
                          " modes but state has " + std::to_string(state.num_modes()));
}

// cov -> S cov S^dag for the block symplectic S = [[P, Q], [conj(Q), conj(P)]].
template <typename T>
ComplexMatrix<T> conjugate_cov(const ComplexMatrix<T>& cov, const ComplexMatrix<T>& p,
                               const ComplexMatrix<T>& q) {
  const Index m = p.rows();
  ComplexMatrix<T> s(2 * m, 2 * m);
  s.topLeftCorner(m, m) = p;
  s.topRightCorner(m, m) = q;
  s.bottomLeftCorner(m, m) = q.conjugate();
  s.bottomRightCorner(m, m) = p.conjugate();
  return s * cov * s.adjoint();
}

} // namespace detail

template <typename T>
GaussianState<T> apply(const GaussianState<T>& state, const Rotation<T>& rot) {
  detail::require_mode_count(state, rot.unitary.rows(), "apply(rotation)");
  const Index m = state.num_modes();
  GaussianState<T> out;
  out.mean = rot.unitary * state.mean;
  out.cov = detail::conjugate_cov<T>(state.cov, rot.unitary, ComplexMatrix<T>::Zero(m, m));
  return out;
}

template <typename T>
GaussianState<T> apply(const GaussianState<T>& state, const Squeeze<T>& sq) {
  detail::require_mode_count(state, sq.r.size(), "apply(squeeze)");
  const ComplexMatrix<T> c =
      sq.r.array().cosh().matrix().template cast<std::complex<T>>().asDiagonal();
  const ComplexMatrix<T> s =
      (-sq.r.array().sinh()).matrix().template cast<std::complex<T>>().asDiagonal();
  GaussianState<T> out;
  out.mean = c * state.mean + s * state.mean.conjugate();
  out.cov = detail::conjugate_cov<T>(state.cov, ComplexMatrix<T>(c), ComplexMatrix<T>(s));
  return out;
}

template <typename T>
GaussianState<T> apply(const GaussianState<T>& state, const Displace<T>& d) {
  detail::require_mode_count(state, d.beta.size(), "apply(displace)");
  GaussianState<T> out = state;
  out.mean += d.beta;
  return out;
}

template <typename T>
GaussianState<T> apply(const GaussianState<T>& state, const PhaseShift<T>& ph) {
  detail::require_mode_count(state, ph.theta.size(), "apply(phase_shift)");
  ComplexVector<T> diag(ph.theta.size());
  for (Index j = 0; j < ph.theta.size(); ++j)
    diag[j] = std::exp(std::complex<T>(0, -ph.theta[j]));
  GaussianState<T> out;
  out.mean = diag.asDiagonal() * state.mean;
  out.cov = detail::conjugate_cov<T>(state.cov, ComplexMatrix<T>(diag.asDiagonal()),
                                  ComplexMatrix<T>::Zero(diag.size(), diag.size()));
  return out;
}

template <typename T>
GaussianState<T> apply(const GaussianState<T>& state, const SymplecticMap<T>& map) {
  return std::visit([&](const auto& op) { return apply(state, op); }, map);
}

// Restriction to a subset of modes (partial trace over the rest): keeps the
// rows/columns {i, i+M} of cov and the entries of mean, in the given order.
template <typename T>
GaussianState<T> reduce(const GaussianState<T>& state, const std::vector<Index>& modes) {
  const Index m = state.num_modes();
  if (modes.empty()) throw ValidationError("reduce: need at least one mode");
  std::vector<bool> seen(static_cast<size_t>(m), false);
  for (Index i : modes) {
    if (i < 0 || i >= m)
      throw ValidationError("reduce: mode index " + std::to_string(i) + " out of range [0," +
                            std::to_string(m - 1) + "]");
    if (seen[static_cast<size_t>(i)])
      throw ValidationError("reduce: duplicate mode index " + std::to_string(i));
    seen[static_cast<size_t>(i)] = true;
  }
  const Index k = static_cast<Index>(modes.size());
  GaussianState<T> out;
  out.mean.resize(k);
  out.cov.resize(2 * k, 2 * k);
  for (Index a = 0; a < k; ++a) {
    out.mean[a] = state.mean[modes[static_cast<size_t>(a)]];
    for (Index b = 0; b < k; ++b) {
      const Index ia = modes[static_cast<size_t>(a)];
      const Index ib = modes[static_cast<size_t>(b)];
      out.cov(a, b) = state.cov(ia, ib);
      out.cov(a, b + k) = state.cov(ia, ib + m);
      out.cov(a + k, b) = state.cov(ia + m, ib);
      out.cov(a + k, b + k) = state.cov(ia + m, ib + m);
    }
  }
  return out;
}

// Per-mode mean photon number <a_j^dag a_j> = (cov_jj - 1/2) + |mean_j|^2.
template <typename T>
RealVector<T> mean_photons(const GaussianState<T>& state) {
  const Index m = state.num_modes();
  RealVector<T> n(m);
  for (Index j = 0; j < m; ++j)
    n[j] = state.cov(j, j).real() - T(0.5) + std::norm(state.mean[j]);
  return n;
}

template <typename T>
T total_mean_photons(const GaussianState<T>& state) {
  return mean_photons(state).sum();
}

// Structural defect of the state: max over Hermiticity violation of cov and
// violation of the block-conjugation structure V = X conj(V) X.
template <typename T>
T state_defect(const GaussianState<T>& state) {
  const Index m = state.num_modes();
  if (state.cov.rows() != 2 * m || state.cov.cols() != 2 * m)
    throw ValidationError("state: cov must be 2M x 2M with M = mean.size()");
  const ComplexMatrix<T>& v = state.cov;
  const T herm = (v - v.adjoint()).cwiseAbs().maxCoeff();
  ComplexMatrix<T> xvx(2 * m, 2 * m);
  xvx.topLeftCorner(m, m) = v.bottomRightCorner(m, m).conjugate();
  xvx.topRightCorner(m, m) = v.bottomLeftCorner(m, m).conjugate();
  xvx.bottomLeftCorner(m, m) = v.topRightCorner(m, m).conjugate();
  xvx.bottomRightCorner(m, m) = v.topLeftCorner(m, m).conjugate();
  const T block = (v - xvx).cwiseAbs().maxCoeff();
  return std::max(herm, block);
}

template <typename T>
void validate_state(const GaussianState<T>& state, T tol = T(1e-8)) {
  if (state.num_modes() < 1) throw ValidationError("state: need at least one mode");
  if (!state.mean.allFinite() || !state.cov.allFinite())
    throw ValidationError("state: non-finite entries");
  const T defect = state_defect(state);
  if (!(defect <= tol))
    throw ValidationError("state: covariance violates Hermitian/block structure (defect " +
                          std::to_string(double(defect)) + ")");
}

} // namespace vibexc

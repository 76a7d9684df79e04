#pragma once

#include <complex>
#include <string>

#include "vibexc/constants.hpp"
#include "vibexc/errors.hpp"
#include "vibexc/gaussian_state.hpp"

namespace vibexc {

// Resonant electric-field drive acting on the ground electronic surface
// before the vibronic transition. The pulse displaces the resonant target
// mode only; all other modes stay in vacuum.
template <typename T = double>
struct DriveSpec {
  RealVector<T> charges;                      // per atom, units of e
  RealMatrix<T> coeffs;                       // 3N x M position expansion coefficients, meters
  Eigen::Matrix<std::complex<T>, 3, 1> field; // electric field amplitude, V/m
  T duration_s = 0;                           // t1 - t0, seconds
  Index target_mode = 0;
};

// First-order displacement accumulated by the target mode over the pulse:
//   beta_k = -(i/hbar) * sum_atoms q_a (d_{a,k} . E0) * (t1 - t0).
template <typename T>
std::complex<T> drive_displacement(const DriveSpec<T>& spec) {
  const Index n = spec.charges.size();
  if (n < 1) throw ValidationError("drive: need at least one atom");
  if (spec.coeffs.rows() != 3 * n)
    throw ValidationError("drive: coefficient matrix must have 3N rows");
  if (spec.target_mode < 0 || spec.target_mode >= spec.coeffs.cols())
    throw ValidationError("drive: target mode out of range");
  if (!(spec.duration_s >= T(0)) || !std::isfinite(double(spec.duration_s)))
    throw ValidationError("drive: duration must be finite and non-negative");
  if (!spec.coeffs.allFinite() || !spec.charges.allFinite() || !spec.field.allFinite())
    throw ValidationError("drive: non-finite entries");

  std::complex<T> coupling(0);
  for (Index a = 0; a < n; ++a) {
    std::complex<T> dot(0);
    for (Index c = 0; c < 3; ++c)
      dot += spec.coeffs(3 * a + c, spec.target_mode) * spec.field[c];
    coupling += spec.charges[a] * dot;
  }
  coupling *= T(constants::kElementaryCharge);
  return std::complex<T>(0, -1) * coupling * spec.duration_s / T(constants::kHbar);
}

// Coherent pre-excitation: displace a single mode of the (ground-surface)
// state, leaving every other mode untouched.
template <typename T>
GaussianState<T> pre_excite(const GaussianState<T>& state, Index mode, std::complex<T> beta) {
  if (mode < 0 || mode >= state.num_modes())
    throw ValidationError("pre_excite: mode index " + std::to_string(mode) + " out of range [0," +
                          std::to_string(state.num_modes() - 1) + "]");
  if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag()))
    throw ValidationError("pre_excite: displacement must be finite");
  ComplexVector<T> shift = ComplexVector<T>::Zero(state.num_modes());
  shift[mode] = beta;
  return apply(state, displace(shift));
}

template <typename T>
GaussianState<T> pre_excite(const GaussianState<T>& state, const DriveSpec<T>& spec) {
  return pre_excite(state, spec.target_mode, drive_displacement(spec));
}

} // namespace vibexc

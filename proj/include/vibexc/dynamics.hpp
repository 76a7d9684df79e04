#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vibexc/constants.hpp"
#include "vibexc/errors.hpp"
#include "vibexc/gaussian_state.hpp"
#include "vibexc/sampler.hpp"

namespace vibexc {

// Change of basis from final-surface normal modes to localized modes,
// together with the harmonic frequencies that generate the free evolution.
template <typename T = double>
struct LocalizationMap {
  ComplexMatrix<T> u_local;   // M x M unitary
  RealVector<T> freq;         // M, cm^-1
};

template <typename T>
LocalizationMap<T> localization_map(ComplexMatrix<T> u_local, RealVector<T> freq) {
  if (u_local.rows() != freq.size())
    throw ValidationError("localization: matrix is " + std::to_string(u_local.rows()) + "x" +
                          std::to_string(u_local.cols()) + " but " + std::to_string(freq.size()) +
                          " frequencies given");
  if (!(freq.minCoeff() > T(0)))
    throw ValidationError("localization: frequencies must be positive");
  Rotation<T> checked = rotation(std::move(u_local)); // unitarity check
  return LocalizationMap<T>{std::move(checked.unitary), std::move(freq)};
}

// Heisenberg evolution of the post-transition state for t femtoseconds under
// the diagonal harmonic Hamiltonian of the final surface, then rotation into
// the localized basis: each normal mode picks up phase exp(-i omega_j t)
// (zero-point offsets drop out of photon statistics), and the returned state
// is expressed in localized modes.
template <typename T>
GaussianState<T> evolve(const GaussianState<T>& state, const LocalizationMap<T>& loc, T t_fs) {
  if (state.num_modes() != loc.freq.size())
    throw ValidationError("evolve: state and localization mode counts differ");
  if (!std::isfinite(double(t_fs))) throw ValidationError("evolve: time must be finite");
  RealVector<T> theta(loc.freq.size());
  for (Index j = 0; j < loc.freq.size(); ++j)
    theta[j] = T(constants::wavenumber_to_angular(double(loc.freq[j])) *
                 (double(t_fs) * constants::kFemtosecond));
  GaussianState<T> out = apply(state, phase_shift(theta));
  return apply(out, Rotation<T>{loc.u_local});
}

// Photon-number marginal of one localized mode at each requested time.
template <typename T>
std::vector<Marginal<T>> time_series(const GaussianState<T>& state, const LocalizationMap<T>& loc,
                                     const std::vector<T>& times_fs, Index mode, int cutoff) {
  if (mode < 0 || mode >= loc.freq.size())
    throw ValidationError("time_series: localized mode index out of range");
  if (times_fs.empty()) throw ValidationError("time_series: need at least one time");
  std::vector<Marginal<T>> out;
  out.reserve(times_fs.size());
  for (T t : times_fs) out.push_back(single_mode_marginal(evolve(state, loc, t), mode, cutoff));
  return out;
}

} // namespace vibexc

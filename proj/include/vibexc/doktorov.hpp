#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "vibexc/constants.hpp"
#include "vibexc/errors.hpp"
#include "vibexc/gaussian_state.hpp"

namespace vibexc {

// Normal-mode description of a vibronic transition between two electronic
// surfaces. Geometries are Cartesian (angstrom), masses atomic (amu), mode
// matrices hold mass-weighted normal-mode vectors in their columns
// (orthonormal), frequencies are harmonic wavenumbers (cm^-1).
template <typename T = double>
struct MoleculeData {
  RealVector<T> masses;                       // N
  RealVector<T> geometry_initial;             // 3N
  RealVector<T> geometry_final;               // 3N
  RealMatrix<T> modes_initial;                // 3N x M
  RealMatrix<T> modes_final;                  // 3N x M
  RealVector<T> freq_initial;                 // M, cm^-1
  RealVector<T> freq_final;                   // M, cm^-1

  Index num_atoms() const { return masses.size(); }
  Index num_modes() const { return freq_initial.size(); }
};

template <typename T>
void validate_molecule(const MoleculeData<T>& mol) {
  const Index n = mol.num_atoms();
  const Index m = mol.num_modes();
  if (n < 1) throw ValidationError("molecule: need at least one atom");
  if (m < 1) throw ValidationError("molecule: need at least one mode");
  if (mol.geometry_initial.size() != 3 * n || mol.geometry_final.size() != 3 * n)
    throw ValidationError("molecule: geometries must have 3N entries");
  if (mol.modes_initial.rows() != 3 * n || mol.modes_final.rows() != 3 * n ||
      mol.modes_initial.cols() != m || mol.modes_final.cols() != m)
    throw ValidationError("molecule: mode matrices must be 3N x M");
  if (mol.freq_final.size() != m)
    throw ValidationError("molecule: frequency vectors must both have M entries");
  if (m > 3 * n - 5)
    throw ValidationError("molecule: " + std::to_string(m) + " modes exceeds 3N-5 = " +
                          std::to_string(3 * n - 5));
  if (!(mol.masses.minCoeff() > T(0))) throw ValidationError("molecule: masses must be positive");
  if (!(mol.freq_initial.minCoeff() > T(0)) || !(mol.freq_final.minCoeff() > T(0)))
    throw ValidationError("molecule: frequencies must be positive (rigid-body modes must be projected out)");
  for (const RealMatrix<T>* modes : {&mol.modes_initial, &mol.modes_final}) {
    const T defect =
        (modes->transpose() * (*modes) - RealMatrix<T>::Identity(m, m)).cwiseAbs().maxCoeff();
    if (!(defect <= T(1e-6)))
      throw ValidationError("molecule: mode columns are not orthonormal (defect " +
                            std::to_string(double(defect)) + ")");
  }
}

// Duschinsky rotation between the two normal-mode bases: U_D = L_f^T L_i.
template <typename T>
RealMatrix<T> duschinsky(const MoleculeData<T>& mol) {
  validate_molecule(mol);
  return mol.modes_final.transpose() * mol.modes_initial;
}

// Displacement of the initial equilibrium geometry expressed in final normal
// coordinates: d = L_f^T m^(1/2) (x_i - x_f), in sqrt(amu)*angstrom.
template <typename T>
RealVector<T> displacement_vector(const MoleculeData<T>& mol) {
  validate_molecule(mol);
  const Index n = mol.num_atoms();
  RealVector<T> weighted(3 * n);
  for (Index a = 0; a < n; ++a) {
    const T root_mass = std::sqrt(mol.masses[a]);
    for (Index c = 0; c < 3; ++c)
      weighted[3 * a + c] =
          root_mass * (mol.geometry_initial[3 * a + c] - mol.geometry_final[3 * a + c]);
  }
  return mol.modes_final.transpose() * weighted;
}

// Gaussian-gate parameters of the vibronic transition operator
//   D(beta) R(U_L) S R(U_R),
// obtained from the singular value decomposition J = U_L Sigma U_R of
// J = Omega' U_D Omega^{-1}, Omega = diag(sqrt(freq)). beta is dimensionless,
// beta = Omega'_angular d_SI / sqrt(2 hbar).
template <typename T = double>
struct DoktorovParams {
  RealMatrix<T> u_left;       // M x M orthogonal
  RealVector<T> sigma;        // M singular values, descending
  RealMatrix<T> u_right;      // M x M orthogonal
  RealVector<T> beta;         // M, dimensionless displacement parameters
  RealVector<T> freq_final;   // M, cm^-1 (carried for downstream dynamics)

  Index num_modes() const { return sigma.size(); }
};

using DoktorovParamsd = DoktorovParams<double>;

// Deterministic SVD gauge: singular values descending (Eigen guarantees it),
// and each left-singular column oriented so its largest-magnitude entry
// (first such index on ties) is positive; the matching right-singular row
// flips with it, leaving the product unchanged.
template <typename T>
void fix_svd_gauge(RealMatrix<T>& u_left, RealMatrix<T>& u_right) {
  const Index m = u_left.cols();
  for (Index j = 0; j < m; ++j) {
    Index arg_max = 0;
    T best = std::abs(u_left(0, j));
    for (Index i = 1; i < m; ++i) {
      const T mag = std::abs(u_left(i, j));
      if (mag > best) {
        best = mag;
        arg_max = i;
      }
    }
    if (u_left(arg_max, j) < T(0)) {
      u_left.col(j) = -u_left.col(j);
      u_right.row(j) = -u_right.row(j);
    }
  }
}

// Construct parameters from an already-reduced description: Duschinsky
// matrix, displacement in sqrt(amu)*angstrom, frequencies in cm^-1.
template <typename T>
DoktorovParams<T> doktorov_params_from_duschinsky(const RealMatrix<T>& u_duschinsky,
                                                  const RealVector<T>& displacement,
                                                  const RealVector<T>& freq_initial,
                                                  const RealVector<T>& freq_final) {
  const Index m = freq_initial.size();
  if (m < 1) throw ValidationError("doktorov: need at least one mode");
  if (u_duschinsky.rows() != m || u_duschinsky.cols() != m || displacement.size() != m ||
      freq_final.size() != m)
    throw ValidationError("doktorov: inconsistent dimensions");
  if (!u_duschinsky.allFinite() || !displacement.allFinite())
    throw ValidationError("doktorov: non-finite entries");
  if (!(freq_initial.minCoeff() > T(0)) || !(freq_final.minCoeff() > T(0)))
    throw ValidationError("doktorov: frequencies must be positive");

  // J is invariant under a common rescaling of the two frequency vectors, so
  // wavenumbers can be used directly.
  RealMatrix<T> j_matrix = freq_final.array().sqrt().matrix().asDiagonal() * u_duschinsky *
                           freq_initial.array().rsqrt().matrix().asDiagonal();
  Eigen::JacobiSVD<RealMatrix<T>> svd(j_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  DoktorovParams<T> params;
  params.u_left = svd.matrixU();
  params.sigma = svd.singularValues();
  params.u_right = svd.matrixV().transpose();
  if (!(params.sigma.minCoeff() > T(1e-12)))
    throw NumericalError("doktorov: J = Omega' U_D Omega^{-1} is numerically singular");
  fix_svd_gauge(params.u_left, params.u_right);

  const T reconstruction =
      (params.u_left * params.sigma.asDiagonal() * params.u_right - j_matrix).cwiseAbs().maxCoeff();
  if (!(reconstruction <= T(1e-10) * std::max(T(1), j_matrix.cwiseAbs().maxCoeff())))
    throw NumericalError("doktorov: SVD reconstruction defect " + std::to_string(double(reconstruction)));

  params.beta.resize(m);
  for (Index k = 0; k < m; ++k) {
    const double omega = constants::wavenumber_to_angular(double(freq_final[k]));
    const double d_si = double(displacement[k]) * std::sqrt(constants::kAmu) * constants::kAngstrom;
    params.beta[k] = T(std::sqrt(omega / constants::kHbar) * d_si / std::sqrt(2.0));
  }
  params.freq_final = freq_final;
  return params;
}

template <typename T>
DoktorovParams<T> doktorov_params(const MoleculeData<T>& mol) {
  return doktorov_params_from_duschinsky(duschinsky(mol), displacement_vector(mol),
                                         mol.freq_initial, mol.freq_final);
}

// Vibronic transition as a Gaussian circuit: rotation by U_R, per-mode
// squeezing, rotation by U_L, then displacement by beta. With the squeezer
// convention a -> cosh(r) a - sinh(r) a^dag used throughout this library,
// matching the exact harmonic-oscillator overlap integrals requires
// r_j = -ln(sigma_j); the quadrature oracles in the test suite pin this down.
template <typename T>
GaussianState<T> apply_doktorov(const GaussianState<T>& state, const DoktorovParams<T>& params) {
  const Index m = params.num_modes();
  if (state.num_modes() != m)
    throw ValidationError("apply_doktorov: state has " + std::to_string(state.num_modes()) +
                          " modes, params have " + std::to_string(m));
  GaussianState<T> out = apply(state, rotation(ComplexMatrix<T>(
                                         params.u_right.template cast<std::complex<T>>())));
  out = apply(out, squeeze(RealVector<T>((-params.sigma.array().log()).matrix())));
  out = apply(out, rotation(ComplexMatrix<T>(params.u_left.template cast<std::complex<T>>())));
  out = apply(out, displace(ComplexVector<T>(params.beta.template cast<std::complex<T>>())));
  return out;
}

} // namespace vibexc

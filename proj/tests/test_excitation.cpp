#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vibexc/excitation.hpp"
#include "vibexc/lhaf.hpp"

using namespace vibexc;
using Complex = std::complex<double>;

namespace {

DriveSpec<double> reference_drive() {
  DriveSpec<double> spec;
  spec.charges = RealVector<double>(2);
  spec.charges << 0.3, -0.3;
  spec.coeffs = RealMatrix<double>(6, 1);
  spec.coeffs << 1.2e-12, -0.4e-12, 0.7e-12, -0.9e-12, 0.5e-12, 0.2e-12;
  spec.field << Complex(2.0e8), Complex(0.0), Complex(1.0e8);
  spec.duration_s = 4.0e-14;
  spec.target_mode = 0;
  return spec;
}

} // namespace

TEST_CASE("drive displacement reproduces the reference value") {
  // Independently computed from the SI constant chain for the fixture below.
  const Complex beta = drive_displacement(reference_drive());
  CHECK(beta.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(beta.imag() == doctest::Approx(-0.008568668411285639).epsilon(1e-12));
}

TEST_CASE("drive displacement is linear in field, charge, and duration") {
  const DriveSpec<double> base = reference_drive();
  const Complex beta = drive_displacement(base);

  DriveSpec<double> twice = base;
  twice.duration_s *= 2;
  CHECK(std::abs(drive_displacement(twice) - 2.0 * beta) < 1e-15);

  DriveSpec<double> stronger = base;
  stronger.field *= Complex(3.0);
  CHECK(std::abs(drive_displacement(stronger) - 3.0 * beta) < 1e-15);

  DriveSpec<double> charged = base;
  charged.charges *= -1.5;
  CHECK(std::abs(drive_displacement(charged) + 1.5 * beta) < 1e-15);

  // A real field with real expansion coefficients drives a purely imaginary
  // displacement; a 90-degree field phase rotates it onto the real axis.
  DriveSpec<double> phased = base;
  phased.field *= Complex(0, 1);
  const Complex rotated = drive_displacement(phased);
  CHECK(std::abs(rotated - Complex(0, 1) * beta) < 1e-15);
  CHECK(std::abs(rotated.imag()) < 1e-15);
}

TEST_CASE("drive validation") {
  DriveSpec<double> spec = reference_drive();
  spec.target_mode = 1;
  CHECK_THROWS_AS(drive_displacement(spec), ValidationError);

  spec = reference_drive();
  spec.coeffs = RealMatrix<double>(5, 1);
  spec.coeffs.setZero();
  CHECK_THROWS_AS(drive_displacement(spec), ValidationError);

  spec = reference_drive();
  spec.duration_s = -1e-15;
  CHECK_THROWS_AS(drive_displacement(spec), ValidationError);

  spec = reference_drive();
  spec.charges[0] = std::nan("");
  CHECK_THROWS_AS(drive_displacement(spec), ValidationError);
}

TEST_CASE("pre-excitation displaces exactly one mode") {
  const Complex beta(0.7, -0.25);
  const GaussianState<double> st = pre_excite(vacuum<double>(3), 1, beta);
  CHECK(std::abs(st.mean[0]) == 0.0);
  CHECK(std::abs(st.mean[1] - beta) < 1e-15);
  CHECK(std::abs(st.mean[2]) == 0.0);
  CHECK((st.cov - vacuum<double>(3).cov).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(pre_excite(vacuum<double>(2), 2, beta), ValidationError);
  CHECK_THROWS_AS(pre_excite(vacuum<double>(2), -1, beta), ValidationError);
  CHECK_THROWS_AS(pre_excite(vacuum<double>(2), 0,
                             Complex(std::numeric_limits<double>::infinity(), 0)),
                  ValidationError);
}

TEST_CASE("repeated pre-excitation adds amplitudes") {
  const Complex b1(0.3, 0.1), b2(-0.2, 0.4);
  GaussianState<double> st = pre_excite(vacuum<double>(2), 0, b1);
  st = pre_excite(st, 0, b2);
  CHECK(std::abs(st.mean[0] - (b1 + b2)) < 1e-15);
}

TEST_CASE("spec-driven overload equals the two-step form") {
  const DriveSpec<double> spec = reference_drive();
  const GaussianState<double> a = pre_excite(vacuum<double>(1), spec);
  const GaussianState<double> b =
      pre_excite(vacuum<double>(1), spec.target_mode, drive_displacement(spec));
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("photon statistics of a pre-excited mode ignore the drive phase") {
  const double amp = 0.9;
  for (double phase : {0.0, 0.7, 2.1}) {
    const Complex beta = amp * std::exp(Complex(0, phase));
    const GaussianState<double> st = pre_excite(vacuum<double>(1), 0, beta);
    PatternProbabilityContext<double> ctx(st);
    for (int n = 0; n <= 6; ++n)
      CHECK(ctx.pattern_probability({n}) ==
            doctest::Approx(oracle::poisson_pmf(amp * amp, n)).epsilon(1e-12));
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vibexc/gaussian_state.hpp"

using namespace vibexc;
using Complex = std::complex<double>;

TEST_CASE("vacuum state") {
  const GaussianState<double> v = vacuum<double>(3);
  CHECK(v.num_modes() == 3);
  CHECK(v.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK((v.cov - ComplexMatrix<double>::Identity(6, 6) * 0.5).cwiseAbs().maxCoeff() == 0.0);
  CHECK(total_mean_photons(v) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_NOTHROW(validate_state(v));
  CHECK_THROWS_AS(vacuum<double>(0), ValidationError);
}

TEST_CASE("factories validate their arguments") {
  ComplexMatrix<double> not_unitary(2, 2);
  not_unitary << 1, 0, 0, 2;
  CHECK_THROWS_AS(rotation<double>(not_unitary), ValidationError);

  RealMatrix<double> not_orthogonal(2, 2);
  not_orthogonal << 1, 1, 0, 1;
  CHECK_THROWS_AS(rotation(not_orthogonal), ValidationError);

  RealVector<double> bad_r(1);
  bad_r << std::nan("");
  CHECK_THROWS_AS(squeeze<double>(bad_r), ValidationError);

  ComplexVector<double> bad_b(1);
  bad_b << Complex(std::numeric_limits<double>::infinity(), 0);
  CHECK_THROWS_AS(displace<double>(bad_b), ValidationError);

  RealVector<double> bad_theta(1);
  bad_theta << std::nan("");
  CHECK_THROWS_AS(phase_shift<double>(bad_theta), ValidationError);
}

TEST_CASE("apply rejects mode-count mismatches") {
  const GaussianState<double> st = vacuum<double>(2);
  RealVector<double> r(3);
  r.setZero();
  CHECK_THROWS_AS(apply(st, squeeze<double>(r)), ValidationError);
  ComplexVector<double> b(1);
  b.setZero();
  CHECK_THROWS_AS(apply(st, displace<double>(b)), ValidationError);
}

TEST_CASE("displacement shifts the mean and keeps the covariance") {
  ComplexVector<double> b(2);
  b << Complex(0.4, -0.2), Complex(-1.1, 0.3);
  const GaussianState<double> st = apply(vacuum<double>(2), displace<double>(b));
  CHECK((st.mean - b).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((st.cov - vacuum<double>(2).cov).cwiseAbs().maxCoeff() < 1e-15);
  RealVector<double> n = mean_photons(st);
  CHECK(n[0] == doctest::Approx(std::norm(b[0])).epsilon(1e-12));
  CHECK(n[1] == doctest::Approx(std::norm(b[1])).epsilon(1e-12));
}

TEST_CASE("single-mode squeezing produces the textbook covariance") {
  const double r = 0.45;
  RealVector<double> rv(1);
  rv << r;
  const GaussianState<double> st = apply(vacuum<double>(1), squeeze<double>(rv));
  // <a^dag a> + 1/2 = cosh(2r)/2; <a a> = -cosh(r) sinh(r).
  CHECK(st.cov(0, 0).real() == doctest::Approx(std::cosh(2 * r) / 2).epsilon(1e-14));
  CHECK(st.cov(0, 1).real() == doctest::Approx(-std::sinh(2 * r) / 2).epsilon(1e-14));
  CHECK(mean_photons(st)[0] == doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-12));
  CHECK_NOTHROW(validate_state(st));
}

TEST_CASE("squeezing transforms the mean as cosh*mu - sinh*conj(mu)") {
  ComplexVector<double> b(1);
  b << Complex(0.7, 0.4);
  RealVector<double> rv(1);
  rv << 0.3;
  GaussianState<double> st = apply(vacuum<double>(1), displace<double>(b));
  st = apply(st, squeeze<double>(rv));
  const Complex want = std::cosh(0.3) * b[0] - std::sinh(0.3) * std::conj(b[0]);
  CHECK(std::abs(st.mean[0] - want) < 1e-14);
}

TEST_CASE("phase shift rotates the mean and preserves photon statistics") {
  ComplexVector<double> b(1);
  b << Complex(0.5, 0.2);
  RealVector<double> theta(1);
  theta << 1.3;
  const GaussianState<double> before = apply(vacuum<double>(1), displace<double>(b));
  const GaussianState<double> after = apply(before, phase_shift<double>(theta));
  CHECK(std::abs(after.mean[0] - b[0] * std::exp(Complex(0, -1.3))) < 1e-14);
  CHECK(mean_photons(after)[0] == doctest::Approx(mean_photons(before)[0]).epsilon(1e-13));
}

TEST_CASE("rotations compose") {
  std::mt19937_64 rng(42);
  const ComplexMatrix<double> u1 = oracle::random_unitary(rng, 3);
  const ComplexMatrix<double> u2 = oracle::random_unitary(rng, 3);
  const GaussianState<double> st = oracle::random_pure_state(rng, 3, 0.4, 0.5);

  GaussianState<double> stepwise = apply(st, rotation<double>(u1));
  stepwise = apply(stepwise, rotation<double>(u2));
  const GaussianState<double> combined = apply(st, rotation<double>(ComplexMatrix<double>(u2 * u1)));
  CHECK((stepwise.mean - combined.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((stepwise.cov - combined.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("passive maps preserve the total photon number") {
  std::mt19937_64 rng(7);
  const GaussianState<double> st = oracle::random_pure_state(rng, 3, 0.5, 0.6);
  const double before = total_mean_photons(st);

  const GaussianState<double> rotated = apply(st, rotation<double>(oracle::random_unitary(rng, 3)));
  CHECK(total_mean_photons(rotated) == doctest::Approx(before).epsilon(1e-12));

  RealVector<double> theta(3);
  theta << 0.3, -1.1, 2.2;
  const GaussianState<double> shifted = apply(st, phase_shift<double>(theta));
  CHECK(total_mean_photons(shifted) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("random map chains preserve the covariance structure") {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> uni(-0.6, 0.6);
  GaussianState<double> st = vacuum<double>(3);
  for (int step = 0; step < 12; ++step) {
    switch (step % 4) {
      case 0: {
        RealVector<double> r(3);
        for (Index j = 0; j < 3; ++j) r[j] = uni(rng);
        st = apply(st, squeeze<double>(r));
        break;
      }
      case 1:
        st = apply(st, rotation<double>(oracle::random_unitary(rng, 3)));
        break;
      case 2: {
        ComplexVector<double> b(3);
        for (Index j = 0; j < 3; ++j) b[j] = Complex(uni(rng), uni(rng));
        st = apply(st, displace<double>(b));
        break;
      }
      default: {
        RealVector<double> theta(3);
        for (Index j = 0; j < 3; ++j) theta[j] = uni(rng);
        st = apply(st, phase_shift<double>(theta));
        break;
      }
    }
    CHECK(state_defect(st) < 1e-10);
  }
  CHECK_NOTHROW(validate_state(st));
}

TEST_CASE("reduce extracts sub-blocks of a product state") {
  RealVector<double> r(3);
  r << 0.2, 0.5, -0.3;
  ComplexVector<double> b(3);
  b << Complex(0.1, 0), Complex(0, 0.4), Complex(-0.2, 0.2);
  GaussianState<double> st = apply(vacuum<double>(3), squeeze<double>(r));
  st = apply(st, displace<double>(b));

  const GaussianState<double> mid = reduce(st, {1});
  CHECK(mid.num_modes() == 1);
  CHECK(std::abs(mid.mean[0] - b[1]) < 1e-15);
  CHECK(mid.cov(0, 0).real() == doctest::Approx(std::cosh(1.0) / 2).epsilon(1e-13));

  // Order matters: reduce(st, {2, 0}) presents mode 2 first.
  const GaussianState<double> pair = reduce(st, {2, 0});
  CHECK(std::abs(pair.mean[0] - b[2]) < 1e-15);
  CHECK(std::abs(pair.mean[1] - b[0]) < 1e-15);
  CHECK(pair.cov(0, 2).real() == doctest::Approx(-std::sinh(-0.6) / 2).epsilon(1e-13));
}

TEST_CASE("reduce validates mode lists") {
  const GaussianState<double> st = vacuum<double>(2);
  CHECK_THROWS_AS(reduce(st, {}), ValidationError);
  CHECK_THROWS_AS(reduce(st, {2}), ValidationError);
  CHECK_THROWS_AS(reduce(st, {-1}), ValidationError);
  CHECK_THROWS_AS(reduce(st, {0, 0}), ValidationError);
}

TEST_CASE("reduced states of entangled inputs remain valid") {
  std::mt19937_64 rng(303);
  const GaussianState<double> st = oracle::random_pure_state(rng, 4, 0.5, 0.4);
  const GaussianState<double> half = reduce(st, {0, 2});
  CHECK_NOTHROW(validate_state(half));
  // Per-mode photon numbers of the kept modes are unchanged by partial trace.
  const RealVector<double> full = mean_photons(st);
  const RealVector<double> part = mean_photons(half);
  CHECK(part[0] == doctest::Approx(full[0]).epsilon(1e-12));
  CHECK(part[1] == doctest::Approx(full[2]).epsilon(1e-12));
}

TEST_CASE("validate_state flags broken structure") {
  GaussianState<double> st = vacuum<double>(1);
  st.cov(0, 1) = Complex(0.3, 0); // breaks V = X conj(V) X unless mirrored
  CHECK_THROWS_AS(validate_state(st), ValidationError);

  GaussianState<double> nan_state = vacuum<double>(1);
  nan_state.mean[0] = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(validate_state(nan_state), ValidationError);

  GaussianState<double> rect = vacuum<double>(2);
  rect.mean.resize(1);
  CHECK_THROWS_AS(validate_state(rect), ValidationError);
}

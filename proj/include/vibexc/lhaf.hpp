#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vibexc/errors.hpp"
#include "vibexc/gaussian_state.hpp"

namespace vibexc {

// Exactness guard: photon patterns with more total photons than this are
// rejected rather than silently degraded (loop-hafnian cost is exponential
// in the total count and double-precision factorials stay exact well past it).
inline constexpr int kMaxTotalPhotons = 40;

inline const std::array<double, kMaxTotalPhotons + 1>& factorial_table() {
  static const std::array<double, kMaxTotalPhotons + 1> table = [] {
    std::array<double, kMaxTotalPhotons + 1> t{};
    t[0] = 1.0;
    for (int k = 1; k <= kMaxTotalPhotons; ++k) t[k] = t[k - 1] * double(k);
    return t;
  }();
  return table;
}

namespace detail {

template <typename T>
void require_symmetric(const ComplexMatrix<T>& a, const char* who) {
  if (a.rows() != a.cols()) throw ValidationError(std::string(who) + ": matrix must be square");
  if (a.rows() == 0) return;
  const T scale = std::max(T(1), a.cwiseAbs().maxCoeff());
  const T defect = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(defect <= T(1e-8) * scale))
    throw ValidationError(std::string(who) + ": matrix is not symmetric (defect " +
                          std::to_string(double(defect)) + ")");
}

} // namespace detail

// Reference implementation: direct sum over perfect matchings with loops
// (involutions of the vertex set). Exponential in n; kept as the independent
// cross-check for the production algorithm below.
template <typename T>
std::complex<T> loop_hafnian_enumeration(const ComplexMatrix<T>& a) {
  detail::require_symmetric(a, "loop_hafnian_enumeration");
  const Index n = a.rows();
  if (n == 0) return std::complex<T>(1);
  if (n > 12)
    throw ValidationError("loop_hafnian_enumeration: reference oracle limited to n <= 12, got n = " +
                          std::to_string(n));
  const auto full = static_cast<std::uint32_t>((1u << n) - 1u);
  // Recurse on the lowest unmatched vertex: it either self-loops or pairs
  // with one of the remaining vertices.
  auto rec = [&](auto&& self, std::uint32_t mask) -> std::complex<T> {
    if (mask == 0) return std::complex<T>(1);
    const int i = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1u);
    std::complex<T> acc = a(i, i) * self(self, rest);
    std::uint32_t scan = rest;
    while (scan != 0) {
      const int j = std::countr_zero(scan);
      scan &= scan - 1u;
      acc += a(i, j) * self(self, rest & ~(1u << j));
    }
    return acc;
  };
  return rec(rec, full);
}

// Production loop hafnian: exact subset algorithm. Vertices are grouped into
// m = n/2 pairs; for every subset S of pairs the sum over matchings confined
// to S is generated from power sums,
//   c_j(S) = tr(B^j)/(2j) + (v^T B^(j-1) X v)/2,  B = X_S A_S,
// with v = diag(A_S) carrying the self-loops, and the coefficient of x^m in
// exp(sum_j c_j x^j) is extracted; inclusion-exclusion over S yields the
// hafnian. O(2^(n/2) poly(n)) and exact up to floating-point rounding.
template <typename T>
std::complex<T> loop_hafnian(const ComplexMatrix<T>& a_in) {
  using C = std::complex<T>;
  detail::require_symmetric(a_in, "loop_hafnian");
  Index n = a_in.rows();
  if (n == 0) return C(1);
  ComplexMatrix<T> a = (a_in + a_in.transpose()) / T(2);
  if (n % 2 == 1) {
    // Odd sizes are padded with an isolated vertex whose self-loop has
    // weight one; every involution of the padded graph forces that loop.
    ComplexMatrix<T> padded = ComplexMatrix<T>::Zero(n + 1, n + 1);
    padded.topLeftCorner(n, n) = a;
    padded(n, n) = C(1);
    a.swap(padded);
    ++n;
  }
  const Index m = n / 2;
  if (m > 62)
    throw ValidationError("loop_hafnian: matrix too large (n = " + std::to_string(n) + ")");

  C total(0);
  std::vector<Index> pairs;
  pairs.reserve(static_cast<size_t>(m));
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << m); ++mask) {
    pairs.clear();
    for (Index i = 0; i < m; ++i)
      if (mask & (std::uint64_t(1) << i)) pairs.push_back(i);
    const Index s = static_cast<Index>(pairs.size());
    const Index d = 2 * s;

    // Gather A_S and B = X_S A_S (X swaps the two rows of each pair).
    ComplexMatrix<T> asub(d, d);
    for (Index r = 0; r < s; ++r)
      for (Index c = 0; c < s; ++c) {
        const Index ri = 2 * pairs[static_cast<size_t>(r)];
        const Index ci = 2 * pairs[static_cast<size_t>(c)];
        asub(2 * r, 2 * c) = a(ri, ci);
        asub(2 * r, 2 * c + 1) = a(ri, ci + 1);
        asub(2 * r + 1, 2 * c) = a(ri + 1, ci);
        asub(2 * r + 1, 2 * c + 1) = a(ri + 1, ci + 1);
      }
    ComplexMatrix<T> b(d, d);
    for (Index r = 0; r < s; ++r) {
      b.row(2 * r) = asub.row(2 * r + 1);
      b.row(2 * r + 1) = asub.row(2 * r);
    }
    ComplexVector<T> v(d), xv(d);
    for (Index r = 0; r < d; ++r) v[r] = asub(r, r);
    for (Index r = 0; r < s; ++r) {
      xv[2 * r] = v[2 * r + 1];
      xv[2 * r + 1] = v[2 * r];
    }

    // Power sums c_1..c_m, then the x^m coefficient of exp(sum c_j x^j)
    // via the standard series recurrence.
    std::vector<C> coeff(static_cast<size_t>(m) + 1, C(0));
    ComplexMatrix<T> pow = b;
    ComplexVector<T> y = xv;
    for (Index j = 1; j <= m; ++j) {
      if (j > 1) pow = pow * b;
      const C loop_term = (v.array() * y.array()).sum();
      coeff[static_cast<size_t>(j)] = pow.trace() / T(2 * j) + loop_term / T(2);
      if (j < m) y = b * y;
    }
    std::vector<C> series(static_cast<size_t>(m) + 1, C(0));
    series[0] = C(1);
    for (Index k = 1; k <= m; ++k) {
      C acc(0);
      for (Index j = 1; j <= k; ++j)
        acc += T(j) * coeff[static_cast<size_t>(j)] * series[static_cast<size_t>(k - j)];
      series[static_cast<size_t>(k)] = acc / T(k);
    }
    const bool negate = ((m - s) % 2) != 0;
    total += negate ? -series[static_cast<size_t>(m)] : series[static_cast<size_t>(m)];
  }
  return total;
}

namespace detail {

inline std::string pattern_to_string(const PhotonPattern& pattern) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < pattern.size(); ++i) os << (i ? "," : "") << pattern[i];
  os << ")";
  return os.str();
}

inline void validate_pattern(const PhotonPattern& pattern, Index num_modes) {
  if (static_cast<Index>(pattern.size()) != num_modes)
    throw ValidationError("pattern: has " + std::to_string(pattern.size()) + " entries, state has " +
                          std::to_string(num_modes) + " modes");
  long total = 0;
  for (int n : pattern) {
    if (n < 0) throw ValidationError("pattern: negative photon count in " + pattern_to_string(pattern));
    total += n;
  }
  if (total > kMaxTotalPhotons)
    throw ValidationError("pattern: total photon count " + std::to_string(total) + " exceeds cap " +
                          std::to_string(kMaxTotalPhotons));
}

} // namespace detail

// Precomputed per-state factorization for photon-pattern probabilities:
//   Q = V + I/2 (Cholesky), A = X(I - Q^{-1}), gamma = conj(Q^{-1} alpha'),
//   prefactor = exp(-alpha'^dag Q^{-1} alpha' / 2) / sqrt(det Q),
// with alpha' = (alpha, conj(alpha)). Immutable after construction, so any
// number of threads may evaluate probabilities against it concurrently.
template <typename T = double>
class PatternProbabilityContext {
 public:
  explicit PatternProbabilityContext(const GaussianState<T>& state) {
    validate_state(state, T(1e-8));
    m_ = state.num_modes();
    const Index d = 2 * m_;
    ComplexMatrix<T> q = (state.cov + state.cov.adjoint()) / T(2);
    q += ComplexMatrix<T>::Identity(d, d) * T(0.5);
    Eigen::LLT<ComplexMatrix<T>> llt(q);
    if (llt.info() != Eigen::Success)
      throw NumericalError("pattern probability: Q = V + I/2 is not positive definite");
    T log_det = 0;
    for (Index i = 0; i < d; ++i) {
      const T diag = llt.matrixL()(i, i).real();
      if (!(diag > T(0)))
        throw NumericalError("pattern probability: Q = V + I/2 is not positive definite");
      log_det += T(2) * std::log(diag);
    }
    const ComplexMatrix<T> q_inv = llt.solve(ComplexMatrix<T>::Identity(d, d));

    ComplexVector<T> alpha_p(d);
    alpha_p.head(m_) = state.mean;
    alpha_p.tail(m_) = state.mean.conjugate();

    const T exp_arg = -T(0.5) * alpha_p.dot(q_inv * alpha_p).real();
    prefactor_ = std::exp(exp_arg - T(0.5) * log_det);

    // A = X - X Q^{-1}; X swaps the annihilator/creator halves.
    a_.resize(d, d);
    a_.topRows(m_) = -q_inv.bottomRows(m_);
    a_.bottomRows(m_) = -q_inv.topRows(m_);
    for (Index i = 0; i < m_; ++i) {
      a_(i, i + m_) += T(1);
      a_(i + m_, i) += T(1);
    }
    const T scale = std::max(T(1), a_.cwiseAbs().maxCoeff());
    const T asym = (a_ - a_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= T(1e-8) * scale))
      throw NumericalError("pattern probability: A = X(I - Q^{-1}) lost symmetry (defect " +
                           std::to_string(double(asym)) + ")");
    a_ = ((a_ + a_.transpose()) / T(2)).eval();
    // Loop weights carry the conjugate, gamma = conj(Q^{-1} alpha'); the
    // swapped form X Q^{-1} alpha' is identical by the X V* X = V symmetry.
    gamma_ = (q_inv * alpha_p).conjugate();
  }

  Index num_modes() const { return m_; }

  // Probability of the vacuum outcome; also the prefactor of every pattern.
  T vacuum_probability() const { return range_checked(prefactor_); }

  // Submatrix A'_pattern: rows/columns {i, i+M} of A repeated pattern[i]
  // times, with the final diagonal overwritten by the matching gamma entries.
  ComplexMatrix<T> pattern_matrix(const PhotonPattern& pattern) const {
    detail::validate_pattern(pattern, m_);
    std::vector<Index> idx;
    for (Index i = 0; i < m_; ++i)
      for (int k = 0; k < pattern[static_cast<size_t>(i)]; ++k) idx.push_back(i);
    const Index count = static_cast<Index>(idx.size());
    std::vector<Index> both(idx);
    for (Index i : idx) both.push_back(i + m_);
    ComplexMatrix<T> out(2 * count, 2 * count);
    for (Index p = 0; p < 2 * count; ++p)
      for (Index q = 0; q < 2 * count; ++q)
        out(p, q) = (p == q) ? gamma_[both[static_cast<size_t>(p)]]
                             : a_(both[static_cast<size_t>(p)], both[static_cast<size_t>(q)]);
    return out;
  }

  T pattern_probability(const PhotonPattern& pattern) const {
    detail::validate_pattern(pattern, m_);
    long total = std::accumulate(pattern.begin(), pattern.end(), 0L);
    if (total == 0) return vacuum_probability();
    const std::complex<T> haf = loop_hafnian(pattern_matrix(pattern));
    T fac = 1;
    for (int n : pattern) fac *= T(factorial_table()[static_cast<size_t>(n)]);
    const std::complex<T> value = haf * (prefactor_ / fac);
    if (!(std::abs(value.imag()) <= T(1e-10) * std::max(T(1), std::abs(value))))
      throw NumericalError("pattern probability: complex residue " +
                           std::to_string(double(value.imag())) + " on pattern " +
                           detail::pattern_to_string(pattern));
    return range_checked(value.real());
  }

 private:
  static T range_checked(T p) {
    if (!(p >= -T(1e-9) && p <= T(1) + T(1e-9)))
      throw NumericalError("pattern probability: value " + std::to_string(double(p)) +
                           " outside [0,1] beyond tolerance");
    return std::min(std::max(p, T(0)), T(1));
  }

  Index m_ = 0;
  ComplexMatrix<T> a_;
  ComplexVector<T> gamma_;
  T prefactor_ = 0;
};

template <typename T>
ComplexMatrix<T> build_pattern_matrix(const GaussianState<T>& state, const PhotonPattern& pattern) {
  return PatternProbabilityContext<T>(state).pattern_matrix(pattern);
}

template <typename T>
T pattern_probability(const GaussianState<T>& state, const PhotonPattern& pattern) {
  return PatternProbabilityContext<T>(state).pattern_probability(pattern);
}

} // namespace vibexc

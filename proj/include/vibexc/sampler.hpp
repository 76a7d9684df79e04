#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vibexc/errors.hpp"
#include "vibexc/gaussian_state.hpp"
#include "vibexc/lhaf.hpp"

namespace vibexc {

struct SamplerConfig {
  int num_samples = 10000;
  std::uint64_t seed = 0;
  int cutoff = 10;              // per-mode photon cutoff for conditionals
  int max_total_photons = kMaxTotalPhotons;
  int num_threads = 1;
};

inline void validate_sampler_config(const SamplerConfig& cfg) {
  if (cfg.num_samples < 1) throw ValidationError("sampler: num_samples must be >= 1");
  if (cfg.cutoff < 0) throw ValidationError("sampler: cutoff must be >= 0");
  if (cfg.max_total_photons < 0 || cfg.max_total_photons > kMaxTotalPhotons)
    throw ValidationError("sampler: max_total_photons must be in [0," +
                          std::to_string(kMaxTotalPhotons) + "]");
  if (cfg.num_threads < 1) throw ValidationError("sampler: num_threads must be >= 1");
}

template <typename T = double>
struct SampleResult {
  std::vector<PhotonPattern> samples;
  // Smallest conditional mass kept after truncating a conditional to the
  // cutoff, and the prefix where it occurred. Mass lost to truncation is
  // renormalized away, never silently absorbed into pattern 0.
  T min_conditional_mass = 1;
  PhotonPattern worst_prefix;
};

template <typename T = double>
struct Marginal {
  Index mode = 0;          // which mode of the input state
  RealVector<T> probs;     // Pr(n) for n = 0..cutoff
  T coverage = 0;          // sum of probs; 1 - coverage sits beyond the cutoff
};

template <typename T = double>
struct JointTable {
  std::vector<Index> modes;
  int cutoff = 0;
  std::map<PhotonPattern, T> probs;
  T coverage = 0;
};

namespace detail {

// Canonical 53-bit uniform in [0,1); fixed construction keeps sample streams
// reproducible across platforms and thread counts.
inline double canonical_uniform(std::mt19937_64& engine) {
  return double(engine() >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 per_sample_engine(std::uint64_t seed, std::uint64_t sample_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample_index & 0xffffffffu),
                    static_cast<std::uint32_t>(sample_index >> 32)};
  return std::mt19937_64(seq);
}

} // namespace detail

// Exact sampling by the chain rule: mode k is drawn from the conditional
// distribution Pr(n_k | n_1..n_{k-1}) obtained from the k-mode reduced state,
// truncated to the cutoff and renormalized. Every sample uses an independent
// engine derived from (seed, sample index), so serial and parallel runs
// produce identical output.
template <typename T>
SampleResult<T> draw_samples(const GaussianState<T>& state, const SamplerConfig& cfg) {
  validate_sampler_config(cfg);
  const Index m = state.num_modes();

  // One immutable probability context per prefix length, shared by all threads.
  std::vector<PatternProbabilityContext<T>> contexts;
  contexts.reserve(static_cast<size_t>(m));
  for (Index k = 1; k <= m; ++k) {
    std::vector<Index> front(static_cast<size_t>(k));
    for (Index i = 0; i < k; ++i) front[static_cast<size_t>(i)] = i;
    contexts.emplace_back(k == m ? state : reduce(state, front));
  }

  SampleResult<T> result;
  result.samples.assign(static_cast<size_t>(cfg.num_samples), PhotonPattern());

  struct WorkerState {
    T min_mass = 1;
    PhotonPattern worst_prefix;
    std::exception_ptr error;
  };
  const int threads = std::min<int>(cfg.num_threads, cfg.num_samples);
  std::vector<WorkerState> workers(static_cast<size_t>(threads));

  auto run_range = [&](int first, int last, WorkerState& ws) {
    try {
      // Conditional distributions depend only on the prefix, which repeats
      // heavily across samples; memoizing them changes no value and keeps
      // the drawn patterns identical with or without the cache.
      std::map<PhotonPattern, std::vector<T>> cache;
      auto conditional = [&](const PhotonPattern& bare, Index k,
                             int support) -> const std::vector<T>& {
        const auto hit = cache.find(bare);
        if (hit != cache.end()) return hit->second;
        PhotonPattern probe = bare;
        probe.push_back(0);
        std::vector<T> weights(static_cast<size_t>(support) + 1);
        T mass = 0;
        for (int j = 0; j <= support; ++j) {
          probe.back() = j;
          weights[static_cast<size_t>(j)] =
              contexts[static_cast<size_t>(k)].pattern_probability(probe);
          mass += weights[static_cast<size_t>(j)];
        }
        // Fraction of the conditional distribution kept by the truncation:
        // sum of the joint weights over the probability of the prefix itself.
        const T prefix_mass =
            k == 0 ? T(1) : contexts[static_cast<size_t>(k - 1)].pattern_probability(bare);
        const T coverage = prefix_mass > T(0) ? mass / prefix_mass : T(0);
        if (!(coverage >= T(1e-12)))
          throw NumericalError("sampler: conditional mass " + std::to_string(double(coverage)) +
                               " below 1e-12 after prefix " + detail::pattern_to_string(bare));
        if (coverage < ws.min_mass) {
          ws.min_mass = coverage;
          ws.worst_prefix = bare;
        }
        for (T& w : weights) w /= mass;
        return cache.emplace(bare, std::move(weights)).first->second;
      };
      for (int s = first; s < last; ++s) {
        auto engine = detail::per_sample_engine(cfg.seed, static_cast<std::uint64_t>(s));
        PhotonPattern prefix;
        int total = 0;
        for (Index k = 0; k < m; ++k) {
          const int support = std::min(cfg.cutoff, cfg.max_total_photons - total);
          const std::vector<T>& weights = conditional(prefix, k, support);
          const double u = detail::canonical_uniform(engine);
          int drawn = support;
          T cumulative = 0;
          for (int j = 0; j <= support; ++j) {
            cumulative += weights[static_cast<size_t>(j)];
            if (u < double(cumulative)) {
              drawn = j;
              break;
            }
          }
          prefix.push_back(drawn);
          total += drawn;
        }
        result.samples[static_cast<size_t>(s)] = prefix;
      }
    } catch (...) {
      ws.error = std::current_exception();
    }
  };

  if (threads == 1) {
    run_range(0, cfg.num_samples, workers[0]);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.num_samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(cfg.num_samples, first + chunk);
      pool.emplace_back(run_range, first, last, std::ref(workers[static_cast<size_t>(t)]));
    }
    for (auto& th : pool) th.join();
  }
  for (auto& ws : workers) {
    if (ws.error) std::rethrow_exception(ws.error);
    if (ws.min_mass < result.min_conditional_mass) {
      result.min_conditional_mass = ws.min_mass;
      result.worst_prefix = ws.worst_prefix;
    }
  }
  return result;
}

template <typename T>
std::vector<PhotonPattern> sample(const GaussianState<T>& state, const SamplerConfig& cfg) {
  return draw_samples(state, cfg).samples;
}

template <typename T>
Marginal<T> single_mode_marginal(const GaussianState<T>& state, Index mode, int cutoff) {
  if (cutoff < 0 || cutoff > kMaxTotalPhotons)
    throw ValidationError("marginals: cutoff must be in [0," + std::to_string(kMaxTotalPhotons) + "]");
  const GaussianState<T> reduced = reduce(state, std::vector<Index>{mode});
  const PatternProbabilityContext<T> ctx(reduced);
  Marginal<T> out;
  out.mode = mode;
  out.probs.resize(cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) out.probs[n] = ctx.pattern_probability({n});
  out.coverage = out.probs.sum();
  return out;
}

template <typename T>
std::vector<Marginal<T>> single_mode_marginals(const GaussianState<T>& state, int cutoff) {
  std::vector<Marginal<T>> out;
  for (Index k = 0; k < state.num_modes(); ++k)
    out.push_back(single_mode_marginal(state, k, cutoff));
  return out;
}

// Full probability table over the selected modes up to the cutoff in each.
// This is the quantum-inspired classical estimator: reduce to the modes of
// interest, then enumerate their joint photon distribution exactly.
template <typename T>
JointTable<T> joint_probability_table(const GaussianState<T>& state, const std::vector<Index>& modes,
                                      int cutoff) {
  if (cutoff < 0) throw ValidationError("joint table: cutoff must be >= 0");
  const Index k = static_cast<Index>(modes.size());
  double entries = 1;
  for (Index i = 0; i < k; ++i) entries *= double(cutoff) + 1;
  if (entries > 1e6)
    throw ValidationError("joint table: (cutoff+1)^k = " + std::to_string(entries) +
                          " exceeds 1e6 entries");
  if (static_cast<long>(k) * cutoff > kMaxTotalPhotons)
    throw ValidationError("joint table: corner pattern exceeds the total photon cap " +
                          std::to_string(kMaxTotalPhotons) + "; lower the cutoff or mode count");
  const GaussianState<T> reduced = reduce(state, modes);
  const PatternProbabilityContext<T> ctx(reduced);

  JointTable<T> table;
  table.modes = modes;
  table.cutoff = cutoff;
  PhotonPattern pattern(static_cast<size_t>(k), 0);
  while (true) {
    const T p = ctx.pattern_probability(pattern);
    table.probs.emplace(pattern, p);
    table.coverage += p;
    Index pos = 0;
    while (pos < k) {
      if (++pattern[static_cast<size_t>(pos)] <= cutoff) break;
      pattern[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == k) break;
  }
  return table;
}

} // namespace vibexc

// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic problem generation: k-sparse Gaussian signals, random circulant
// sensing operators with uniform subsampling masks, and noiseless
// measurements y = A x*.
//
// All randomness flows through SeededRng, which pairs std::mt19937_64 with
// hand-rolled uniform, Gaussian and bounded-integer transforms. The engine
// sequence is pinned by the standard and the transforms avoid
// std::*_distribution, whose outputs may change across standard library
// releases, so fixtures generated today stay bit-identical.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "circlasso/circulant.hpp"
#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"

namespace circlasso {

namespace detail {

// SplitMix64 finalizer, used to derive well-separated engine seeds from a
// user seed and a stream tag.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

// Stream tags for the independent draws of one problem instance.
inline constexpr std::uint64_t kSignalStream = 0x7369676e616cULL;    // "signal"
inline constexpr std::uint64_t kRowStream = 0x726f77ULL;             // "row"
inline constexpr std::uint64_t kMaskStream = 0x6d61736bULL;          // "mask"

}  // namespace detail

// Deterministic random source. Every draw is a fixed transform of raw
// std::mt19937_64 output, so sequences are identical on any conforming
// platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard Gaussian via Box-Muller; draws two uniforms and caches the
  // second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound) by rejection, unbiased for any bound.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0)
      throw ParameterError("SeededRng::uniform_below: bound must be > 0");
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % bound);
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % bound;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {

// Uniform k-subset of {0, …, n−1} by partial Fisher-Yates, returned sorted.
inline std::vector<Eigen::Index> sample_subset(Eigen::Index n, Eigen::Index k,
                                               SeededRng& rng) {
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index(0));
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.uniform_below(
                           static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

// A signal with exactly k nonzeros, all on `support`.
template <typename Scalar = double>
struct SparseSignal {
  Vector<Scalar> values;
  std::vector<Eigen::Index> support;  // sorted, size k

  Eigen::Index n() const { return values.size(); }
  Eigen::Index k() const { return static_cast<Eigen::Index>(support.size()); }
};

// Draws a k-sparse signal: support uniform without replacement, nonzeros
// i.i.d. standard Gaussian.
template <typename Scalar = double>
SparseSignal<Scalar> gen_sparse_signal(Eigen::Index n, Eigen::Index k,
                                       std::uint64_t seed) {
  if (n < 0 || k < 0 || k > n) {
    std::ostringstream msg;
    msg << "gen_sparse_signal: need 0 <= k <= n, got n = " << n
        << ", k = " << k;
    throw ParameterError(msg.str());
  }
  SeededRng rng(detail::derive_seed(seed, detail::kSignalStream));
  SparseSignal<Scalar> signal;
  signal.support = detail::sample_subset(n, k, rng);
  signal.values = Vector<Scalar>::Zero(n);
  for (Eigen::Index idx : signal.support)
    signal.values[idx] = static_cast<Scalar>(rng.normal());
  return signal;
}

// Draws a sensing operator: circulant first row i.i.d. standard Gaussian,
// mask a uniform m-subset of the rows.
template <typename Scalar = double>
PartialCirculantOperator<Scalar> gen_circulant_sensing(Eigen::Index n,
                                                       Eigen::Index m,
                                                       std::uint64_t seed) {
  if (m < 1 || m > n) {
    std::ostringstream msg;
    msg << "gen_circulant_sensing: need 1 <= m <= n, got n = " << n
        << ", m = " << m;
    throw ParameterError(msg.str());
  }
  SeededRng row_rng(detail::derive_seed(seed, detail::kRowStream));
  Vector<Scalar> row(n);
  for (Eigen::Index i = 0; i < n; ++i)
    row[i] = static_cast<Scalar>(row_rng.normal());

  SeededRng mask_rng(detail::derive_seed(seed, detail::kMaskStream));
  SubsamplingMask mask(detail::sample_subset(n, m, mask_rng), n);
  return PartialCirculantOperator<Scalar>(CirculantMatrix<Scalar>(std::move(row)),
                                          std::move(mask));
}

// Noiseless measurements y = A x.
template <typename Scalar>
Vector<Scalar> measure(const PartialCirculantOperator<Scalar>& A,
                       const Vector<Scalar>& x) {
  detail::check_same_size(x.size(), A.n(), "measure");
  return partial_matvec(A, x);
}

template <typename Scalar>
Vector<Scalar> measure(const PartialCirculantOperator<Scalar>& A,
                       const SparseSignal<Scalar>& signal) {
  return measure(A, signal.values);
}

// A complete reproducible instance: everything below is a pure function of
// (n, m, k, seed).
template <typename Scalar = double>
struct SensingProblem {
  SparseSignal<Scalar> signal;
  PartialCirculantOperator<Scalar> op;
  Vector<Scalar> measurements;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return op.n(); }
  Eigen::Index m() const { return op.m(); }
  Eigen::Index k() const { return signal.k(); }
};

template <typename Scalar = double>
SensingProblem<Scalar> make_problem(Eigen::Index n, Eigen::Index m,
                                    Eigen::Index k, std::uint64_t seed) {
  SensingProblem<Scalar> problem;
  problem.signal = gen_sparse_signal<Scalar>(n, k, seed);
  problem.op = gen_circulant_sensing<Scalar>(n, m, seed);
  problem.measurements = measure(problem.op, problem.signal);
  problem.seed = seed;
  return problem;
}

}  // namespace circlasso

// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// LASSO solvers over partial circulant sensing operators:
//
//   ista_run        iterative soft thresholding, O(n log n) per iteration
//   admm_dense_run  ADMM with a dense precomputed Gram inverse, O(n^2)
//   cadmm_run       ADMM with FFT-inverted circulant Gram matrices, O(n log n)
//
// All three minimize ‖y − A x‖₂² + 2α‖x‖₁ posed on the spectrally
// normalized operator: the circulant first row and the measurements are
// divided by spectral_norm(C) before iterating. This makes α, τ, ρ and σ
// scale-free (solver behavior does not depend on the physical units of the
// measurements) and keeps the regularized Gram spectra within [σ, ρ+σ].
// The normalization leaves the recovered signal in original units, since
// scaling y and A together cancels.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "circlasso/circulant.hpp"
#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"

namespace circlasso {

// Elementwise shrink toward zero: sgn(v)(|v| - gamma) when |v| > gamma
// (strictly), otherwise 0.
template <typename Scalar>
Scalar soft_threshold_entry(Scalar v, Scalar gamma) {
  if (v > gamma) return v - gamma;
  if (v < -gamma) return v + gamma;
  return Scalar(0);
}

// Vector soft thresholding, the proximal map of gamma·‖·‖₁.
template <typename Scalar>
Vector<Scalar> soft_threshold(const Vector<Scalar>& x, Scalar gamma) {
  if (gamma < Scalar(0))
    throw ParameterError("soft_threshold: gamma must be nonnegative");
  return x.unaryExpr(
      [gamma](Scalar v) { return soft_threshold_entry(v, gamma); });
}

// Mean square error ‖a − b‖₂² / n.
template <typename Scalar>
Scalar mse(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  detail::check_same_size(a.size(), b.size(), "mse");
  if (a.size() == 0) return Scalar(0);
  return (a - b).squaredNorm() / Scalar(a.size());
}

// The LASSO objective ‖ỹ − Ã x‖₂² + 2α‖x‖₁ on the normalized problem the
// solvers iterate on (operator and measurements divided by the circulant
// spectral norm).
template <typename Scalar>
Scalar lasso_objective(const Vector<Scalar>& y,
                       const PartialCirculantOperator<Scalar>& A,
                       const Vector<Scalar>& x, Scalar alpha) {
  detail::check_same_size(y.size(), A.m(), "lasso_objective");
  detail::check_same_size(x.size(), A.n(), "lasso_objective");
  const Scalar s = spectral_norm(A.circulant());
  if (s <= Scalar(0))
    return y.squaredNorm() + Scalar(2) * alpha * x.template lpNorm<1>();
  const Vector<Scalar> residual = y / s - partial_matvec(A, x) / s;
  return residual.squaredNorm() + Scalar(2) * alpha * x.template lpNorm<1>();
}

// How the per-iteration threshold is paired with the gradient step tau in
// ISTA. kLiteral applies η_α and effectively weights the ℓ1 term by α/τ;
// kProximal applies η_{τα}, the proximal-gradient pairing that solves the
// α-weighted objective exactly.
enum class ThresholdPairing { kLiteral, kProximal };

// Storage models for the analytic footprint accounting.
enum class FootprintKind { kCpista, kCpadmm, kDenseIsta, kDenseAdmm };

// Persistent scalar storage of each solver, in bytes, for a given scalar
// width. Circulant-aware solvers are linear in n; dense ones quadratic.
inline std::uint64_t analytic_footprint(FootprintKind kind, std::uint64_t n,
                                        std::uint64_t m,
                                        std::uint64_t scalar_width) {
  switch (kind) {
    case FootprintKind::kCpista:
      return 4 * n * scalar_width;
    case FootprintKind::kCpadmm:
      return 10 * n * scalar_width;
    case FootprintKind::kDenseIsta:
      // A and A^T stored densely, plus x, delta and y, r.
      return (2 * m * n + 2 * n + 2 * m) * scalar_width;
    case FootprintKind::kDenseAdmm:
      // Dense B, plus x, z, u, A^T y and y.
      return (n * n + 4 * n + m) * scalar_width;
  }
  throw ParameterError("analytic_footprint: unknown solver kind");
}

// Solver parameters. All values refer to the spectrally normalized problem;
// see the header comment. tau = 0 requests the automatic step
// 0.9·‖A‖₂⁻² (with ‖A‖₂ bounded by the circulant spectral norm, the
// normalized bound is 1 and the automatic step is 0.9).
struct SolverConfig {
  double alpha = 1e-4;    // ℓ1 weight
  double tau = 0.0;       // ISTA gradient step; 0 = automatic
  double rho = 0.1;       // ADMM penalty (data-side for cadmm)
  double sigma = 0.1;     // circulant-ADMM penalty on the z split
  double tau1 = 1.0;      // dual step for the v constraint
  double tau2 = 1.0;      // dual step for the z constraint
  long max_iter = 100000;
  double target_mse = std::numeric_limits<double>::quiet_NaN();
  int check_every = 10;
  ThresholdPairing pairing = ThresholdPairing::kLiteral;
  bool use_fft = true;          // naive O(n^2) products when false
  Eigen::Index dense_cap = kDenseCap;
};

// Which quantity the stopping rule (and the trace) measured: MSE against a
// supplied ground truth, or the normalized iterate change
// ‖x(t) − x(t−1)‖₂/√n when no truth is available.
enum class StopMetric { kMseVsTruth, kIterateChange };

template <typename Scalar>
struct TracePoint {
  long iteration;
  Scalar value;
  double elapsed_seconds;
};

template <typename Scalar>
struct RecoveryReport {
  Vector<Scalar> final_x;
  long iterations = 0;
  std::vector<TracePoint<Scalar>> mse_trace;
  double setup_seconds = 0.0;
  double total_seconds = 0.0;
  std::uint64_t footprint_bytes = 0;
  StopMetric metric = StopMetric::kIterateChange;
  bool reached_target = false;
  Scalar final_metric = std::numeric_limits<Scalar>::quiet_NaN();
};

namespace detail {

template <typename Scalar>
Vector<Scalar> circ_apply(const CirculantMatrix<Scalar>& M,
                          const Vector<Scalar>& x, bool use_fft) {
  return use_fft ? circ_matvec_fft(M, x) : circ_matvec_naive(M, x);
}

template <typename Scalar>
Vector<Scalar> circ_apply_transpose(const CirculantMatrix<Scalar>& M,
                                    const Vector<Scalar>& x, bool use_fft) {
  return use_fft ? circ_transpose_matvec(M, x)
                 : circ_transpose_matvec_naive(M, x);
}

// Normalization factor shared by all solvers. A zero operator is accepted
// only for zero measurements (everything stays zero); otherwise the problem
// is unsolvable and reported as singular.
template <typename Scalar>
Scalar normalization(const PartialCirculantOperator<Scalar>& A,
                     const Vector<Scalar>& y) {
  // Non-finite measurements must fail loudly here: soft thresholding maps
  // NaN to zero, so a poisoned y would otherwise converge to a confident
  // nonsense answer.
  if (!y.allFinite())
    throw DivergenceError("solver: measurements contain non-finite entries");
  const Scalar s = spectral_norm(A.circulant());
  if (s > Scalar(0)) return s;
  if (y.size() == 0 || y.cwiseAbs().maxCoeff() == Scalar(0)) return Scalar(1);
  throw SingularityError(
      "solver: sensing operator is zero but measurements are not");
}

inline double seconds_between(std::chrono::steady_clock::time_point a,
                              std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename Scalar>
void check_finite(const Vector<Scalar>& x, const char* solver) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << solver << ": iterate became non-finite";
    throw DivergenceError(msg.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ISTA
// ---------------------------------------------------------------------------

// State of the iterative soft thresholding solver. The problem fields hold
// the normalized operator and measurements; r and delta are the residual and
// gradient of the most recent step.
template <typename Scalar>
struct IstaState {
  CirculantMatrix<Scalar> C;  // normalized sensing circulant
  SubsamplingMask mask;
  Vector<Scalar> y;  // normalized measurements
  Scalar tau = Scalar(0);
  Scalar threshold = Scalar(0);  // per-iteration shrink amount

  Vector<Scalar> x;
  Vector<Scalar> r;
  Vector<Scalar> delta;
  long t = 0;
};

template <typename Scalar>
IstaState<Scalar> ista_setup(const PartialCirculantOperator<Scalar>& A,
                             const Vector<Scalar>& y,
                             const SolverConfig& cfg) {
  detail::check_same_size(y.size(), A.m(), "ista_setup");
  Scalar tau = static_cast<Scalar>(cfg.tau);
  if (tau == Scalar(0)) tau = Scalar(0.9);
  if (!(tau > Scalar(0)) || !(tau < Scalar(1))) {
    throw ParameterError(
        "ista_setup: tau must lie in (0, ‖A‖₂⁻²); on the normalized "
        "operator the admissible range is (0, 1)");
  }
  if (!(cfg.alpha > 0)) throw ParameterError("ista_setup: alpha must be > 0");

  const Scalar s = detail::normalization(A, y);
  IstaState<Scalar> state;
  state.C = CirculantMatrix<Scalar>(Vector<Scalar>(A.circulant().first_row() / s));
  state.mask = A.mask();
  state.y = y / s;
  state.tau = tau;
  state.threshold = cfg.pairing == ThresholdPairing::kLiteral
                        ? static_cast<Scalar>(cfg.alpha)
                        : tau * static_cast<Scalar>(cfg.alpha);
  state.x = Vector<Scalar>::Zero(A.n());
  state.r = Vector<Scalar>::Zero(A.m());
  state.delta = Vector<Scalar>::Zero(A.n());
  return state;
}

// One ISTA iteration: residual, gradient, thresholded gradient step.
template <typename Scalar>
void ista_step(IstaState<Scalar>& state, bool use_fft = true) {
  state.r = state.y - state.mask.apply(
                          detail::circ_apply(state.C, state.x, use_fft));
  state.delta = detail::circ_apply_transpose(
      state.C, state.mask.embed(state.r), use_fft);
  const Scalar g = state.threshold;
  const Scalar tau = state.tau;
  state.x = (state.x + tau * state.delta)
                .unaryExpr([g](Scalar v) { return soft_threshold_entry(v, g); });
  ++state.t;
}

// ---------------------------------------------------------------------------
// Dense ADMM
// ---------------------------------------------------------------------------

// State of the dense-reference ADMM solver: the n-by-n inverse B is stored
// explicitly, which is the footprint the circulant solvers avoid.
template <typename Scalar>
struct AdmmState {
  Matrix<Scalar> B;       // (A^T A + rho I)^{-1}, dense
  Vector<Scalar> Aty;     // A^T y on the normalized problem
  Scalar rho = Scalar(0);
  Scalar threshold = Scalar(0);  // alpha / rho

  Vector<Scalar> x;
  Vector<Scalar> z;
  Vector<Scalar> u;
  Vector<Scalar> rhs;  // A^T y + rho (z - u), refreshed each iteration
  long t = 0;
};

template <typename Scalar>
AdmmState<Scalar> admm_setup(const PartialCirculantOperator<Scalar>& A,
                             const Vector<Scalar>& y,
                             const SolverConfig& cfg) {
  detail::check_same_size(y.size(), A.m(), "admm_setup");
  if (A.n() > cfg.dense_cap) {
    std::ostringstream msg;
    msg << "admm_setup: n = " << A.n() << " exceeds the dense cap "
        << cfg.dense_cap;
    throw CapacityError(msg.str());
  }
  if (!(cfg.rho > 0)) throw ParameterError("admm_setup: rho must be > 0");
  if (!(cfg.alpha > 0)) throw ParameterError("admm_setup: alpha must be > 0");

  const Scalar s = detail::normalization(A, y);
  const Scalar rho = static_cast<Scalar>(cfg.rho);
  Matrix<Scalar> Ad = dense_materialize(A, cfg.dense_cap) / s;
  Matrix<Scalar> gram = Ad.transpose() * Ad;
  gram.diagonal().array() += rho;
  AdmmState<Scalar> state;
  state.B = Eigen::LLT<Matrix<Scalar>>(gram).solve(
      Matrix<Scalar>::Identity(A.n(), A.n()));
  state.Aty = Ad.transpose() * (y / s);
  state.rho = rho;
  state.threshold = static_cast<Scalar>(cfg.alpha) / rho;
  state.x = Vector<Scalar>::Zero(A.n());
  state.z = Vector<Scalar>::Zero(A.n());
  state.u = Vector<Scalar>::Zero(A.n());
  state.rhs = state.Aty;
  return state;
}

// One dense ADMM iteration: x from the precomputed inverse, shrink, dual step.
template <typename Scalar>
void admm_step(AdmmState<Scalar>& state) {
  state.x = state.B * state.rhs;
  const Scalar g = state.threshold;
  state.z = (state.x + state.u)
                .unaryExpr([g](Scalar v) { return soft_threshold_entry(v, g); });
  state.u += state.x - state.z;
  state.rhs = state.Aty + state.rho * (state.z - state.u);
  ++state.t;
}

// ---------------------------------------------------------------------------
// Circulant ADMM
// ---------------------------------------------------------------------------

// State of the circulant ADMM solver. B and D are the FFT-inverted Gram
// factors; all per-iteration work is O(n log n). After the dual update the
// running v slot holds v + μ, which is exactly the combination the next
// x update consumes.
template <typename Scalar>
struct CadmmState {
  CirculantMatrix<Scalar> C;  // normalized sensing circulant
  SubsamplingMask mask;
  CirculantMatrix<Scalar> B;  // (rho C^T C + sigma I)^{-1}
  DiagonalOperator<Scalar> D;  // (P^T P + rho I)^{-1}
  Vector<Scalar> Pty;          // P^T y on the normalized problem
  Scalar rho = Scalar(0);
  Scalar sigma = Scalar(0);
  Scalar tau1 = Scalar(1);
  Scalar tau2 = Scalar(1);
  Scalar threshold = Scalar(0);  // alpha / sigma

  Vector<Scalar> x;
  Vector<Scalar> z;
  Vector<Scalar> nu;
  Vector<Scalar> mu;
  Vector<Scalar> v;
  Vector<Scalar> beta;
  long t = 0;
};

template <typename Scalar>
CadmmState<Scalar> cadmm_setup(const PartialCirculantOperator<Scalar>& A,
                               const Vector<Scalar>& y,
                               const SolverConfig& cfg) {
  detail::check_same_size(y.size(), A.m(), "cadmm_setup");
  if (!(cfg.rho > 0) || !(cfg.sigma > 0))
    throw ParameterError("cadmm_setup: rho and sigma must be > 0");
  if (!(cfg.alpha > 0)) throw ParameterError("cadmm_setup: alpha must be > 0");
  constexpr double kGolden = 1.6180339887498949;
  if (!(cfg.tau1 > 0) || cfg.tau1 >= kGolden || !(cfg.tau2 > 0) ||
      cfg.tau2 >= kGolden) {
    throw ParameterError(
        "cadmm_setup: tau1 and tau2 must lie in (0, (sqrt(5)+1)/2)");
  }

  const Scalar s = detail::normalization(A, y);
  const Scalar rho = static_cast<Scalar>(cfg.rho);
  const Scalar sigma = static_cast<Scalar>(cfg.sigma);
  CadmmState<Scalar> state;
  state.C = CirculantMatrix<Scalar>(Vector<Scalar>(A.circulant().first_row() / s));
  state.mask = A.mask();
  state.B = regularized_gram_inverse(state.C, rho, sigma);
  state.D = mask_gram_inverse<Scalar>(A.mask(), rho);
  state.Pty = A.mask().embed(Vector<Scalar>(y / s));
  state.rho = rho;
  state.sigma = sigma;
  state.tau1 = static_cast<Scalar>(cfg.tau1);
  state.tau2 = static_cast<Scalar>(cfg.tau2);
  state.threshold = static_cast<Scalar>(cfg.alpha) / sigma;
  state.x = Vector<Scalar>::Zero(A.n());
  state.z = Vector<Scalar>::Zero(A.n());
  state.nu = Vector<Scalar>::Zero(A.n());
  state.mu = Vector<Scalar>::Zero(A.n());
  state.v = Vector<Scalar>::Zero(A.n());
  state.beta = Vector<Scalar>::Zero(A.n());
  return state;
}

// One circulant ADMM iteration: primal x and v, shrink to z, dual steps,
// then fold μ into the v slot for the next x update.
template <typename Scalar>
void cadmm_step(CadmmState<Scalar>& state, bool use_fft = true) {
  state.beta = state.rho *
                   detail::circ_apply_transpose(state.C, state.v, use_fft) +
               state.sigma * (state.z - state.nu);
  state.x = detail::circ_apply(state.B, state.beta, use_fft);
  const Vector<Scalar> cx = detail::circ_apply(state.C, state.x, use_fft);
  state.v = state.D.apply(
      Vector<Scalar>(state.rho * (cx - state.mu) + state.Pty));
  const Scalar g = state.threshold;
  state.z = (state.x + state.nu)
                .unaryExpr([g](Scalar v) { return soft_threshold_entry(v, g); });
  state.mu += state.tau1 * (state.v - cx);
  state.nu += state.tau2 * (state.x - state.z);
  state.v += state.mu;
  ++state.t;
}

// ---------------------------------------------------------------------------
// Run loop shared by the three solvers
// ---------------------------------------------------------------------------

namespace detail {

// Advances `step` until max_iter, divergence, or the stopping target is met.
// With ground truth the target is an MSE; without it, the normalized iterate
// change. Either metric is evaluated every check_every iterations and traced.
template <typename Scalar, typename StepFn>
RecoveryReport<Scalar> run_loop(const Vector<Scalar>* truth,
                                const SolverConfig& cfg, const char* name,
                                const Vector<Scalar>& iterate, StepFn step,
                                std::chrono::steady_clock::time_point t_start,
                                double setup_seconds) {
  if (cfg.max_iter < 0) throw ParameterError("solver: max_iter must be >= 0");
  if (cfg.check_every < 1)
    throw ParameterError("solver: check_every must be >= 1");

  RecoveryReport<Scalar> report;
  report.metric =
      truth ? StopMetric::kMseVsTruth : StopMetric::kIterateChange;
  report.setup_seconds = setup_seconds;
  const bool has_target = !std::isnan(cfg.target_mse);
  const Scalar target = static_cast<Scalar>(cfg.target_mse);
  const Scalar inv_sqrt_n =
      iterate.size() > 0 ? Scalar(1) / std::sqrt(Scalar(iterate.size()))
                         : Scalar(1);

  Vector<Scalar> previous = iterate;
  long t = 0;
  while (t < cfg.max_iter) {
    previous = iterate;
    step();
    ++t;
    if (t % cfg.check_every != 0 && t != cfg.max_iter) continue;

    detail::check_finite(iterate, name);
    const Scalar value = truth ? mse(iterate, *truth)
                               : (iterate - previous).norm() * inv_sqrt_n;
    report.mse_trace.push_back(
        {t, value,
         seconds_between(t_start, std::chrono::steady_clock::now())});
    report.final_metric = value;
    if (has_target && value <= target) {
      report.reached_target = true;
      break;
    }
  }
  report.iterations = t;
  report.final_x = iterate;
  report.total_seconds =
      seconds_between(t_start, std::chrono::steady_clock::now()) +
      setup_seconds;
  return report;
}

}  // namespace detail

// Recovers x from y = A x* by iterative soft thresholding. With `truth` the
// stopping target (cfg.target_mse) is an MSE against it; otherwise the
// normalized iterate change is used.
template <typename Scalar>
RecoveryReport<Scalar> ista_run(const Vector<Scalar>& y,
                                const PartialCirculantOperator<Scalar>& A,
                                const SolverConfig& cfg,
                                const Vector<Scalar>* truth = nullptr) {
  const auto t_setup = std::chrono::steady_clock::now();
  IstaState<Scalar> state = ista_setup(A, y, cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const double setup_s = detail::seconds_between(t_setup, t_start);
  RecoveryReport<Scalar> report = detail::run_loop<Scalar>(
      truth, cfg, "ista_run", state.x,
      [&state, &cfg] { ista_step(state, cfg.use_fft); }, t_start, setup_s);
  report.footprint_bytes = analytic_footprint(
      FootprintKind::kCpista, static_cast<std::uint64_t>(A.n()),
      static_cast<std::uint64_t>(A.m()), sizeof(Scalar));
  return report;
}

// Recovers x via ADMM with a dense precomputed (A^T A + rho I)^{-1}. The
// O(n^3) inversion is timed into setup_seconds.
template <typename Scalar>
RecoveryReport<Scalar> admm_dense_run(
    const Vector<Scalar>& y, const PartialCirculantOperator<Scalar>& A,
    const SolverConfig& cfg, const Vector<Scalar>* truth = nullptr) {
  const auto t_setup = std::chrono::steady_clock::now();
  AdmmState<Scalar> state = admm_setup(A, y, cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const double setup_s = detail::seconds_between(t_setup, t_start);
  RecoveryReport<Scalar> report = detail::run_loop<Scalar>(
      truth, cfg, "admm_dense_run", state.z, [&state] { admm_step(state); },
      t_start, setup_s);
  report.footprint_bytes = analytic_footprint(
      FootprintKind::kDenseAdmm, static_cast<std::uint64_t>(A.n()),
      static_cast<std::uint64_t>(A.m()), sizeof(Scalar));
  return report;
}

// Recovers x via circulant ADMM: both Gram inversions are FFT-based and the
// whole iteration is O(n log n) with O(n) state.
template <typename Scalar>
RecoveryReport<Scalar> cadmm_run(const Vector<Scalar>& y,
                                 const PartialCirculantOperator<Scalar>& A,
                                 const SolverConfig& cfg,
                                 const Vector<Scalar>* truth = nullptr) {
  const auto t_setup = std::chrono::steady_clock::now();
  CadmmState<Scalar> state = cadmm_setup(A, y, cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const double setup_s = detail::seconds_between(t_setup, t_start);
  RecoveryReport<Scalar> report = detail::run_loop<Scalar>(
      truth, cfg, "cadmm_run", state.z,
      [&state, &cfg] { cadmm_step(state, cfg.use_fft); }, t_start, setup_s);
  report.footprint_bytes = analytic_footprint(
      FootprintKind::kCpadmm, static_cast<std::uint64_t>(A.n()),
      static_cast<std::uint64_t>(A.m()), sizeof(Scalar));
  return report;
}

}  // namespace circlasso

// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel kernel executor. Each solver iteration is expressed as a
// short pipeline of KernelPhases: barrier-separated parallel maps whose work
// items read shared inputs and write only the addresses they own. Work items
// accumulate in a fixed ascending order, so results are bitwise identical at
// any degree of parallelism.
//
// The phases model an accelerator's kernel structure on host threads; the
// scheme benchmark contrasts the memory traffic of a dense row-major matvec
// against the shift-indexed circulant scheme that touches only 2n unique
// locations.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "circlasso/circulant.hpp"
#include "circlasso/errors.hpp"
#include "circlasso/sensing.hpp"
#include "circlasso/solvers.hpp"

namespace circlasso {

// One element written by a work item: a buffer identity plus an index into
// it. Used by the disjoint-write instrumentation.
struct WriteAddress {
  const void* buffer;
  Eigen::Index index;

  friend bool operator<(const WriteAddress& a, const WriteAddress& b) {
    return a.buffer != b.buffer ? a.buffer < b.buffer : a.index < b.index;
  }
};

// A barrier-separated parallel map. `body(i)` performs item i's computation;
// `writes(i)` declares the addresses item i stores to, and must cover every
// store the body performs.
struct KernelPhase {
  std::string name;
  Eigen::Index work_items = 0;
  std::function<void(Eigen::Index)> body;
  std::function<std::vector<WriteAddress>(Eigen::Index)> writes;
};

// Executes every work item of `phase` on up to `parallelism` host threads
// and joins them (the barrier). Items are split into contiguous ranges; each
// item's arithmetic is self-contained, so the output does not depend on the
// split. A throwing body surfaces as a PhaseError carrying the lowest
// offending global id.
inline void run_phase(const KernelPhase& phase, int parallelism) {
  if (parallelism < 1)
    throw ParameterError("run_phase: parallelism must be >= 1");
  const Eigen::Index total = phase.work_items;
  if (total == 0) return;

  struct Failure {
    Eigen::Index id;
    std::string message;
  };
  const auto describe = [&phase](Eigen::Index id, const char* what) {
    std::ostringstream msg;
    msg << "phase '" << phase.name << "': work item " << id
        << " failed: " << what;
    return msg.str();
  };

  const int workers =
      static_cast<int>(std::min<Eigen::Index>(parallelism, total));
  if (workers == 1) {
    for (Eigen::Index i = 0; i < total; ++i) {
      try {
        phase.body(i);
      } catch (const std::exception& e) {
        throw PhaseError(describe(i, e.what()), i);
      } catch (...) {
        throw PhaseError(describe(i, "unknown error"), i);
      }
    }
    return;
  }

  std::vector<std::optional<Failure>> failures(
      static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const Eigen::Index chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index begin = Eigen::Index(w) * chunk;
    const Eigen::Index end = std::min(begin + chunk, total);
    pool.emplace_back([&phase, &failures, &describe, w, begin, end] {
      for (Eigen::Index i = begin; i < end; ++i) {
        try {
          phase.body(i);
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(w)] = {i, describe(i, e.what())};
          return;
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = {i,
                                                   describe(i, "unknown error")};
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();

  const Failure* first = nullptr;
  for (const auto& f : failures) {
    if (f && (!first || f->id < first->id)) first = &*f;
  }
  if (first) throw PhaseError(first->message, first->id);
}

// Runs the phases of one pipeline in order.
inline void run_pipeline(const std::vector<KernelPhase>& phases,
                         int parallelism) {
  for (const KernelPhase& phase : phases) run_phase(phase, parallelism);
}

// Instrumented safety check: walks every item's declared writes and fails
// hard if two items claim the same address.
inline void check_disjoint_writes(const KernelPhase& phase) {
  std::map<WriteAddress, Eigen::Index> owners;
  for (Eigen::Index i = 0; i < phase.work_items; ++i) {
    for (const WriteAddress& addr : phase.writes(i)) {
      const auto [it, inserted] = owners.emplace(addr, i);
      if (!inserted) {
        std::ostringstream msg;
        msg << "phase '" << phase.name << "': work items " << it->second
            << " and " << i << " both write index " << addr.index
            << " of one buffer";
        throw ConsistencyError(msg.str());
      }
    }
  }
}

inline int hardware_parallelism() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Circulant row fetch under the (j - i) convention: element (i, j) of the
// matrix is row[(j - i) mod n].
template <typename Scalar>
Scalar circ_entry(const Vector<Scalar>& row, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index n = row.size();
  const Eigen::Index shift = j >= i ? j - i : j - i + n;
  return row[shift];
}

}  // namespace detail

// Phases of one circulant-ADMM iteration over `state`, which must outlive
// the returned phases. Running all three in order advances the state exactly
// like one cadmm_step.
template <typename Scalar>
std::vector<KernelPhase> cpadmm_phases(CadmmState<Scalar>& state) {
  const Eigen::Index n = state.x.size();
  detail::check_same_size(state.C.n(), n, "cpadmm_phases");

  KernelPhase primal;
  primal.name = "cpadmm primal variables update";
  primal.work_items = n;
  primal.body = [&state, n](Eigen::Index i) {
    const Vector<Scalar>& row = state.C.first_row();
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      acc += detail::circ_entry(row, j, i) * state.v[j];
    state.beta[i] =
        state.rho * acc + state.sigma * (state.z[i] - state.nu[i]);
  };
  primal.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.beta.data(), i}};
  };

  KernelPhase recovery;
  recovery.name = "cpadmm signal recovery";
  recovery.work_items = n;
  recovery.body = [&state, n](Eigen::Index i) {
    const Vector<Scalar>& row = state.B.first_row();
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      acc += detail::circ_entry(row, i, j) * state.beta[j];
    state.x[i] = acc;
  };
  recovery.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.x.data(), i}};
  };

  KernelPhase duals;
  duals.name = "cpadmm thresholded variables update";
  duals.work_items = n;
  duals.body = [&state, n](Eigen::Index i) {
    const Vector<Scalar>& row = state.C.first_row();
    Scalar cx = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      cx += detail::circ_entry(row, i, j) * state.x[j];
    const Scalar v_new =
        state.D.diag()[i] * (state.rho * (cx - state.mu[i]) + state.Pty[i]);
    state.z[i] = soft_threshold_entry(state.x[i] + state.nu[i],
                                      state.threshold);
    state.mu[i] += state.tau1 * (v_new - cx);
    state.nu[i] += state.tau2 * (state.x[i] - state.z[i]);
    state.v[i] = v_new + state.mu[i];
  };
  duals.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.v.data(), i},
                                     {state.z.data(), i},
                                     {state.mu.data(), i},
                                     {state.nu.data(), i}};
  };

  return {std::move(primal), std::move(recovery), std::move(duals)};
}

// Phases of one ISTA iteration over `state` (same lifetime contract as
// cpadmm_phases). Phase 1 owns the residual entries, phase 2 the gradient
// and iterate entries.
template <typename Scalar>
std::vector<KernelPhase> cpista_phases(IstaState<Scalar>& state) {
  const Eigen::Index n = state.x.size();
  const Eigen::Index m = state.y.size();
  detail::check_same_size(state.C.n(), n, "cpista_phases");
  detail::check_same_size(state.mask.m(), m, "cpista_phases");

  KernelPhase residual;
  residual.name = "cpista residual computation";
  residual.work_items = m;
  residual.body = [&state, n](Eigen::Index t) {
    const Vector<Scalar>& row = state.C.first_row();
    const Eigen::Index omega_t = state.mask.omega()[static_cast<std::size_t>(t)];
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      acc += detail::circ_entry(row, omega_t, j) * state.x[j];
    state.r[t] = state.y[t] - acc;
  };
  residual.writes = [&state](Eigen::Index t) {
    return std::vector<WriteAddress>{{state.r.data(), t}};
  };

  KernelPhase gradient;
  gradient.name = "cpista thresholded gradient";
  gradient.work_items = n;
  gradient.body = [&state, m](Eigen::Index i) {
    const Vector<Scalar>& row = state.C.first_row();
    Scalar acc = Scalar(0);
    for (Eigen::Index t = 0; t < m; ++t) {
      const Eigen::Index omega_t =
          state.mask.omega()[static_cast<std::size_t>(t)];
      acc += detail::circ_entry(row, omega_t, i) * state.r[t];
    }
    state.delta[i] = acc;
    state.x[i] = soft_threshold_entry(state.x[i] + state.tau * acc,
                                      state.threshold);
  };
  gradient.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.delta.data(), i},
                                     {state.x.data(), i}};
  };

  return {std::move(residual), std::move(gradient)};
}

// Phases of one dense-ADMM iteration over `state`. Phase 1 updates the
// primal and dual entries from the current right-hand side; phase 2 rebuilds
// the right-hand side for the next iteration.
template <typename Scalar>
std::vector<KernelPhase> padmm_phases(AdmmState<Scalar>& state) {
  const Eigen::Index n = state.x.size();
  detail::check_same_size(state.B.rows(), n, "padmm_phases");

  KernelPhase primal;
  primal.name = "padmm primal and dual update";
  primal.work_items = n;
  primal.body = [&state, n](Eigen::Index i) {
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      acc += state.B(i, j) * state.rhs[j];
    state.x[i] = acc;
    state.z[i] = soft_threshold_entry(acc + state.u[i], state.threshold);
    state.u[i] += acc - state.z[i];
  };
  primal.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.x.data(), i},
                                     {state.z.data(), i},
                                     {state.u.data(), i}};
  };

  KernelPhase rhs;
  rhs.name = "padmm right-hand side update";
  rhs.work_items = n;
  rhs.body = [&state](Eigen::Index i) {
    state.rhs[i] = state.Aty[i] + state.rho * (state.z[i] - state.u[i]);
  };
  rhs.writes = [&state](Eigen::Index i) {
    return std::vector<WriteAddress>{{state.rhs.data(), i}};
  };

  return {std::move(primal), std::move(rhs)};
}

// ---------------------------------------------------------------------------
// Matvec scheme benchmark
// ---------------------------------------------------------------------------

// Two ways to multiply by the same circulant matrix: Reference streams a
// dense row-major copy (n^2 + n unique fetches), Circulant indexes shifts
// into the first row (2n unique fetches).
enum class SchemeKind { kReference, kCirculant };

struct SchemeTiming {
  SchemeKind scheme = SchemeKind::kCirculant;
  Eigen::Index n = 0;
  int repeats = 0;
  double min_seconds = 0.0;
  double mean_seconds = 0.0;
  std::uint64_t unique_fetches = 0;  // all unique input locations
  std::uint64_t vector_fetches = 0;  // vector traffic only
  double checksum = 0.0;             // keeps the timed loops observable
};

// Times `repeats` matvecs of the chosen scheme on a seeded Gaussian
// circulant and input vector. Both schemes run the same ascending-j
// per-entry accumulation; only the storage they read differs.
inline SchemeTiming matvec_scheme_bench(Eigen::Index n, SchemeKind scheme,
                                        int repeats, std::uint64_t seed = 1) {
  if (n < 1) throw ParameterError("matvec_scheme_bench: n must be >= 1");
  if (repeats < 1)
    throw ParameterError("matvec_scheme_bench: repeats must be >= 1");
  if (scheme == SchemeKind::kReference) detail::check_dense_cap(n, kDenseCap);

  SeededRng rng(detail::derive_seed(seed, detail::kRowStream));
  Vector<double> row(n);
  for (Eigen::Index i = 0; i < n; ++i) row[i] = rng.normal();
  Vector<double> x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();

  std::vector<double> dense;
  if (scheme == SchemeKind::kReference) {
    dense.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        dense[static_cast<std::size_t>(i * n + j)] =
            detail::circ_entry(row, i, j);
  }

  SchemeTiming record;
  record.scheme = scheme;
  record.n = n;
  record.repeats = repeats;
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  if (scheme == SchemeKind::kCirculant) {
    record.unique_fetches = 2 * un;
    record.vector_fetches = 2 * un;
  } else {
    record.unique_fetches = un * un + un;
    record.vector_fetches = 3 * un;
  }

  Vector<double> out(n);
  double total = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < repeats; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    if (scheme == SchemeKind::kCirculant) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
          acc += detail::circ_entry(row, i, j) * x[j];
        out[i] = acc;
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double* mrow = dense.data() + static_cast<std::size_t>(i * n);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += mrow[j] * x[j];
        out[i] = acc;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(t1 - t0).count();
    total += elapsed;
    best = std::min(best, elapsed);
    record.checksum += out.sum();
  }
  record.min_seconds = best;
  record.mean_seconds = total / repeats;
  return record;
}

}  // namespace circlasso

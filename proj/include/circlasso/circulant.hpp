// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Circulant and diagonal linear operators with O(n) storage.
//
// A circulant matrix is stored as its first row only; the implied dense
// entry rule is A(i,j) = first_row[(j - i) mod n], so every row is a right
// circulation of the row above it. Products, transposed products, Gram
// inversions and compositions all reduce to elementwise work on the DFT of
// the first row.

#pragma once

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"

namespace circlasso {

// Dense materializations above this row/column count are refused unless the
// caller raises the cap explicitly.
inline constexpr Eigen::Index kDenseCap = 4096;

// An n-by-n circulant operator stored as its first row. The DFT of the first
// row (the operator's spectrum) is computed lazily on first use and then
// shared; population is compute-then-publish, safe under concurrent readers.
template <typename Scalar = double>
class CirculantMatrix {
 public:
  using Spectrum = ComplexVector<Scalar>;

  CirculantMatrix() = default;

  explicit CirculantMatrix(Vector<Scalar> first_row)
      : first_row_(std::move(first_row)) {}

  static CirculantMatrix Identity(Eigen::Index n) {
    Vector<Scalar> row = Vector<Scalar>::Zero(n);
    if (n > 0) row[0] = Scalar(1);
    return CirculantMatrix(std::move(row));
  }

  CirculantMatrix(const CirculantMatrix& other)
      : first_row_(other.first_row_), spectrum_cache_(other.cached()) {}

  CirculantMatrix(CirculantMatrix&& other) noexcept
      : first_row_(std::move(other.first_row_)),
        spectrum_cache_(other.cached()) {}

  CirculantMatrix& operator=(const CirculantMatrix& other) {
    if (this != &other) {
      first_row_ = other.first_row_;
      std::lock_guard<std::mutex> lock(cache_mutex_);
      spectrum_cache_ = other.cached();
    }
    return *this;
  }

  CirculantMatrix& operator=(CirculantMatrix&& other) noexcept {
    if (this != &other) {
      first_row_ = std::move(other.first_row_);
      std::lock_guard<std::mutex> lock(cache_mutex_);
      spectrum_cache_ = other.cached();
    }
    return *this;
  }

  Eigen::Index n() const { return first_row_.size(); }

  const Vector<Scalar>& first_row() const { return first_row_; }

  // DFT of the first row. The first caller computes it; later callers share
  // the published copy. Duplicated computation under contention is harmless.
  std::shared_ptr<const Spectrum> spectrum() const {
    if (auto hit = cached()) return hit;
    auto fresh = std::make_shared<const Spectrum>(dft<Scalar>(first_row_));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (!spectrum_cache_) spectrum_cache_ = fresh;
    return spectrum_cache_;
  }

  bool spectrum_cached() const { return cached() != nullptr; }

  // Defining storage, excluding the optional spectrum cache.
  Eigen::Index stored_scalars() const { return n(); }

 private:
  std::shared_ptr<const Spectrum> cached() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return spectrum_cache_;
  }

  Vector<Scalar> first_row_;
  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const Spectrum> spectrum_cache_;
};

// Elementwise multiplication by a fixed diagonal.
template <typename Scalar = double>
class DiagonalOperator {
 public:
  DiagonalOperator() = default;

  explicit DiagonalOperator(Vector<Scalar> diag) : diag_(std::move(diag)) {}

  Eigen::Index n() const { return diag_.size(); }

  const Vector<Scalar>& diag() const { return diag_; }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    detail::check_same_size(x.size(), n(), "DiagonalOperator::apply");
    return diag_.cwiseProduct(x);
  }

 private:
  Vector<Scalar> diag_;
};

// Row-subsampling operator P: keeps the rows listed in omega. Stored as the
// sorted index set; apply gathers, embed scatters (the transpose).
class SubsamplingMask {
 public:
  SubsamplingMask() = default;

  SubsamplingMask(std::vector<Eigen::Index> omega, Eigen::Index n)
      : omega_(std::move(omega)), n_(n) {
    if (n_ < 0) throw ParameterError("SubsamplingMask: negative dimension");
    Eigen::Index prev = -1;
    for (Eigen::Index idx : omega_) {
      if (idx <= prev || idx >= n_) {
        throw ParameterError(
            "SubsamplingMask: indices must be strictly increasing and "
            "within [0, n)");
      }
      prev = idx;
    }
  }

  static SubsamplingMask Full(Eigen::Index n) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    return SubsamplingMask(std::move(all), n);
  }

  Eigen::Index m() const { return static_cast<Eigen::Index>(omega_.size()); }
  Eigen::Index n() const { return n_; }

  const std::vector<Eigen::Index>& omega() const { return omega_; }

  // P x: gather the kept coordinates.
  template <typename Scalar>
  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    detail::check_same_size(x.size(), n_, "SubsamplingMask::apply");
    Vector<Scalar> out(m());
    for (Eigen::Index i = 0; i < m(); ++i)
      out[i] = x[omega_[static_cast<std::size_t>(i)]];
    return out;
  }

  // P^T y: scatter back into the ambient dimension, zero elsewhere.
  template <typename Scalar>
  Vector<Scalar> embed(const Vector<Scalar>& y) const {
    detail::check_same_size(y.size(), m(), "SubsamplingMask::embed");
    Vector<Scalar> out = Vector<Scalar>::Zero(n_);
    for (Eigen::Index i = 0; i < m(); ++i)
      out[omega_[static_cast<std::size_t>(i)]] = y[i];
    return out;
  }

  Eigen::Index stored_indices() const { return m(); }

 private:
  std::vector<Eigen::Index> omega_;
  Eigen::Index n_ = 0;
};

// The partial circulant sensing operator A = P C: an n-by-n circulant with
// only the rows in omega observed.
template <typename Scalar = double>
class PartialCirculantOperator {
 public:
  PartialCirculantOperator() = default;

  PartialCirculantOperator(CirculantMatrix<Scalar> circulant,
                           SubsamplingMask mask)
      : circulant_(std::move(circulant)), mask_(std::move(mask)) {
    detail::check_same_size(circulant_.n(), mask_.n(),
                            "PartialCirculantOperator");
  }

  Eigen::Index n() const { return circulant_.n(); }
  Eigen::Index m() const { return mask_.m(); }

  const CirculantMatrix<Scalar>& circulant() const { return circulant_; }
  const SubsamplingMask& mask() const { return mask_; }

  Eigen::Index stored_scalars() const { return circulant_.stored_scalars(); }
  Eigen::Index stored_indices() const { return mask_.stored_indices(); }

 private:
  CirculantMatrix<Scalar> circulant_;
  SubsamplingMask mask_;
};

// y[i] = sum_j first_row[(j - i) mod n] * x[j], accumulated in ascending j.
// O(n^2); the reference the FFT path is checked against.
template <typename Scalar>
Vector<Scalar> circ_matvec_naive(const CirculantMatrix<Scalar>& M,
                                 const Vector<Scalar>& x) {
  const Eigen::Index n = M.n();
  detail::check_same_size(x.size(), n, "circ_matvec_naive");
  const Vector<Scalar>& row = M.first_row();
  Vector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index shift = j >= i ? j - i : j - i + n;
      acc += row[shift] * x[j];
    }
    out[i] = acc;
  }
  return out;
}

// Same product through the DFT diagonalization: C x = idft(conj(ĉ) ∘ x̂).
// O(n log n); populates the spectrum cache on first use.
template <typename Scalar>
Vector<Scalar> circ_matvec_fft(const CirculantMatrix<Scalar>& M,
                               const Vector<Scalar>& x) {
  detail::check_same_size(x.size(), M.n(), "circ_matvec_fft");
  auto spectrum = M.spectrum();
  ComplexVector<Scalar> prod =
      spectrum->conjugate().cwiseProduct(dft<Scalar>(x));
  return idft_real<Scalar>(prod);
}

// y[i] = sum_j first_row[(i - j) mod n] * x[j]: the transposed product,
// ascending-j accumulation.
template <typename Scalar>
Vector<Scalar> circ_transpose_matvec_naive(const CirculantMatrix<Scalar>& M,
                                           const Vector<Scalar>& x) {
  const Eigen::Index n = M.n();
  detail::check_same_size(x.size(), n, "circ_transpose_matvec_naive");
  const Vector<Scalar>& row = M.first_row();
  Vector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index shift = i >= j ? i - j : i - j + n;
      acc += row[shift] * x[j];
    }
    out[i] = acc;
  }
  return out;
}

// Transposed product through the DFT: C^T x = idft(ĉ ∘ x̂).
template <typename Scalar>
Vector<Scalar> circ_transpose_matvec(const CirculantMatrix<Scalar>& M,
                                     const Vector<Scalar>& x) {
  detail::check_same_size(x.size(), M.n(), "circ_transpose_matvec");
  auto spectrum = M.spectrum();
  ComplexVector<Scalar> prod = spectrum->cwiseProduct(dft<Scalar>(x));
  return idft_real<Scalar>(prod);
}

// A x = P (C x): full circulant product, then gather the observed rows.
template <typename Scalar>
Vector<Scalar> partial_matvec(const PartialCirculantOperator<Scalar>& A,
                              const Vector<Scalar>& x) {
  detail::check_same_size(x.size(), A.n(), "partial_matvec");
  return A.mask().apply(circ_matvec_fft(A.circulant(), x));
}

// A^T y = C^T (P^T y): scatter into the ambient dimension, then transposed
// circulant product.
template <typename Scalar>
Vector<Scalar> partial_transpose_matvec(
    const PartialCirculantOperator<Scalar>& A, const Vector<Scalar>& y) {
  detail::check_same_size(y.size(), A.m(), "partial_transpose_matvec");
  return circ_transpose_matvec(A.circulant(), A.mask().embed(y));
}

// B = (rho C^T C + sigma I)^{-1}. C^T C is circulant with eigenvalues
// |ĉ_k|^2, so B is circulant with eigenvalues 1/(rho |ĉ_k|^2 + sigma); the
// first row is recovered by inverse DFT. Any denominator below 1e-14 makes
// the system numerically singular.
template <typename Scalar>
CirculantMatrix<Scalar> regularized_gram_inverse(
    const CirculantMatrix<Scalar>& C, Scalar rho, Scalar sigma) {
  if (rho < Scalar(0) || sigma < Scalar(0) ||
      (rho == Scalar(0) && sigma == Scalar(0))) {
    throw ParameterError(
        "regularized_gram_inverse: rho and sigma must be nonnegative with "
        "at least one strictly positive");
  }
  auto spectrum = C.spectrum();
  ComplexVector<Scalar> inverted(spectrum->size());
  for (Eigen::Index k = 0; k < spectrum->size(); ++k) {
    const Scalar denom = rho * std::norm((*spectrum)[k]) + sigma;
    if (denom < Scalar(1e-14)) {
      std::ostringstream msg;
      msg << "regularized_gram_inverse: eigenvalue " << k
          << " of (rho C^T C + sigma I) is " << denom
          << ", below the invertibility floor 1e-14";
      throw SingularityError(msg.str());
    }
    inverted[k] = std::complex<Scalar>(Scalar(1) / denom, Scalar(0));
  }
  return CirculantMatrix<Scalar>(idft_real<Scalar>(inverted));
}

// D = (P^T P + rho I)^{-1}: diagonal with 1/(1+rho) on the observed indices
// and 1/rho elsewhere.
template <typename Scalar>
DiagonalOperator<Scalar> mask_gram_inverse(const SubsamplingMask& P,
                                           Scalar rho) {
  if (!(rho > Scalar(0)))
    throw ParameterError("mask_gram_inverse: rho must be positive");
  Vector<Scalar> diag =
      Vector<Scalar>::Constant(P.n(), Scalar(1) / rho);
  for (Eigen::Index idx : P.omega()) diag[idx] = Scalar(1) / (Scalar(1) + rho);
  return DiagonalOperator<Scalar>(std::move(diag));
}

// First row of the product C B: the circular convolution of the two defining
// vectors, computed as an elementwise spectrum product.
template <typename Scalar>
CirculantMatrix<Scalar> circ_compose(const CirculantMatrix<Scalar>& C,
                                     const CirculantMatrix<Scalar>& B) {
  detail::check_same_size(C.n(), B.n(), "circ_compose");
  ComplexVector<Scalar> prod = C.spectrum()->cwiseProduct(*B.spectrum());
  return CirculantMatrix<Scalar>(idft_real<Scalar>(prod));
}

// The operator 2-norm of a circulant is the largest eigenvalue magnitude,
// max_k |ĉ_k|. For a partial operator P C this is an upper bound on ‖PC‖₂.
template <typename Scalar>
Scalar spectral_norm(const CirculantMatrix<Scalar>& C) {
  if (C.n() < 1) throw ParameterError("spectral_norm: empty operator");
  return C.spectrum()->cwiseAbs().maxCoeff();
}

namespace detail {

inline void check_dense_cap(Eigen::Index n, Eigen::Index cap) {
  if (n > cap) {
    std::ostringstream msg;
    msg << "dense_materialize: n = " << n << " exceeds the dense cap " << cap;
    throw CapacityError(msg.str());
  }
}

}  // namespace detail

// Dense n-by-n image of a circulant, entry rule first_row[(j - i) mod n].
// Intended for oracles and small problems; refuses n above the cap.
template <typename Scalar>
Matrix<Scalar> dense_materialize(const CirculantMatrix<Scalar>& C,
                                 Eigen::Index cap = kDenseCap) {
  detail::check_dense_cap(C.n(), cap);
  const Eigen::Index n = C.n();
  const Vector<Scalar>& row = C.first_row();
  Matrix<Scalar> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = row[j >= i ? j - i : j - i + n];
  return out;
}

// Dense m-by-n image of a partial circulant: the observed rows of C.
template <typename Scalar>
Matrix<Scalar> dense_materialize(const PartialCirculantOperator<Scalar>& A,
                                 Eigen::Index cap = kDenseCap) {
  detail::check_dense_cap(A.n(), cap);
  const Eigen::Index n = A.n();
  const Vector<Scalar>& row = A.circulant().first_row();
  Matrix<Scalar> out(A.m(), n);
  for (Eigen::Index r = 0; r < A.m(); ++r) {
    const Eigen::Index i = A.mask().omega()[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < n; ++j)
      out(r, j) = row[j >= i ? j - i : j - i + n];
  }
  return out;
}

}  // namespace circlasso

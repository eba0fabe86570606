// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "circlasso/errors.hpp"

namespace circlasso {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline void check_same_size(Eigen::Index a, Eigen::Index b, const char* op) {
  if (a != b) {
    std::ostringstream msg;
    msg << op << ": dimension mismatch, " << a << " vs " << b;
    throw DimensionError(msg.str());
  }
}

// One FFT engine per thread so cached plans are reused without locking.
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

}  // namespace detail

// Forward DFT of a real vector, full spectrum. Length 0 and 1 are trivial
// transforms handled here; the FFT backend requires n >= 2.
template <typename Scalar>
ComplexVector<Scalar> dft(const Vector<Scalar>& x) {
  ComplexVector<Scalar> out(x.size());
  if (x.size() == 0) return out;
  if (x.size() == 1) {
    out[0] = std::complex<Scalar>(x[0], Scalar(0));
    return out;
  }
  detail::fft_engine<Scalar>().fwd(out, x);
  return out;
}

// Inverse DFT (includes the 1/n factor), complex result.
template <typename Scalar>
ComplexVector<Scalar> idft(const ComplexVector<Scalar>& f) {
  ComplexVector<Scalar> out(f.size());
  if (f.size() == 0) return out;
  if (f.size() == 1) {
    out[0] = f[0];
    return out;
  }
  detail::fft_engine<Scalar>().inv(out, f);
  return out;
}

// Inverse DFT of a spectrum whose time-domain image is mathematically real.
// An imaginary residue above rel_tol (relative to the result magnitude)
// indicates an internal defect and raises ConsistencyError.
template <typename Scalar>
Vector<Scalar> idft_real(const ComplexVector<Scalar>& f,
                         Scalar rel_tol = Scalar(1e-10)) {
  ComplexVector<Scalar> t = idft(f);
  if (t.size() == 0) return Vector<Scalar>();
  Scalar scale = t.real().cwiseAbs().maxCoeff();
  if (scale < Scalar(1)) scale = Scalar(1);
  Scalar residue = t.imag().cwiseAbs().maxCoeff();
  if (residue > rel_tol * scale) {
    std::ostringstream msg;
    msg << "inverse DFT of a real-valued quantity has imaginary residue "
        << residue << " (relative tolerance " << rel_tol << ")";
    throw ConsistencyError(msg.str());
  }
  return t.real();
}

}  // namespace circlasso

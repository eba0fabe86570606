// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-stable artifact formats:
//
//   vectors    8-byte magic "CIRCVEC1", u64 length, little-endian f64 data
//   operators  8-byte magic "CIRCOPR1", u64 n, u64 m, f64 first row, u64 Ω
//   bench CSV  fixed versioned header, one row per solver run
//
// Integers and floats are stored little-endian; the build targets
// little-endian hosts and the readers below enforce that at compile time.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "circlasso/circulant.hpp"
#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"

namespace circlasso {

static_assert(std::endian::native == std::endian::little,
              "binary formats are defined little-endian");

namespace detail {

inline constexpr char kVectorMagic[8] = {'C', 'I', 'R', 'C',
                                         'V', 'E', 'C', '1'};
inline constexpr char kOperatorMagic[8] = {'C', 'I', 'R', 'C',
                                           'O', 'P', 'R', '1'};

inline void write_u64(std::ostream& out, std::uint64_t value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

inline std::uint64_t read_u64(std::istream& in, const char* field) {
  std::uint64_t value = 0;
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in)
    throw FormatError(std::string("binary read: truncated ") + field);
  return value;
}

inline void write_f64_block(std::ostream& out, const double* data,
                            std::uint64_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

inline void read_f64_block(std::istream& in, double* data,
                           std::uint64_t count, const char* field) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in)
    throw FormatError(std::string("binary read: truncated ") + field);
}

inline void check_magic(std::istream& in, const char (&expected)[8],
                        const char* kind) {
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, expected, sizeof(magic)) != 0) {
    std::ostringstream msg;
    msg << "binary read: bad magic for " << kind << ", expected '"
        << std::string(expected, sizeof(expected)) << "'";
    throw FormatError(msg.str());
  }
}

}  // namespace detail

inline void write_vector(const Vector<double>& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_vector: cannot open '" + path + "'");
  out.write(detail::kVectorMagic, sizeof(detail::kVectorMagic));
  detail::write_u64(out, static_cast<std::uint64_t>(v.size()));
  detail::write_f64_block(out, v.data(), static_cast<std::uint64_t>(v.size()));
  if (!out) throw FormatError("write_vector: write to '" + path + "' failed");
}

inline Vector<double> read_vector(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_vector: cannot open '" + path + "'");
  detail::check_magic(in, detail::kVectorMagic, "vector");
  const std::uint64_t n = detail::read_u64(in, "vector length");
  Vector<double> v(static_cast<Eigen::Index>(n));
  detail::read_f64_block(in, v.data(), n, "vector data");
  return v;
}

inline void write_operator(const PartialCirculantOperator<double>& A,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("write_operator: cannot open '" + path + "'");
  out.write(detail::kOperatorMagic, sizeof(detail::kOperatorMagic));
  detail::write_u64(out, static_cast<std::uint64_t>(A.n()));
  detail::write_u64(out, static_cast<std::uint64_t>(A.m()));
  detail::write_f64_block(out, A.circulant().first_row().data(),
                          static_cast<std::uint64_t>(A.n()));
  for (Eigen::Index idx : A.mask().omega())
    detail::write_u64(out, static_cast<std::uint64_t>(idx));
  if (!out)
    throw FormatError("write_operator: write to '" + path + "' failed");
}

inline PartialCirculantOperator<double> read_operator(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_operator: cannot open '" + path + "'");
  detail::check_magic(in, detail::kOperatorMagic, "operator");
  const std::uint64_t n = detail::read_u64(in, "operator n");
  const std::uint64_t m = detail::read_u64(in, "operator m");
  if (m > n) throw FormatError("read_operator: m exceeds n");
  Vector<double> row(static_cast<Eigen::Index>(n));
  detail::read_f64_block(in, row.data(), n, "operator first row");
  std::vector<Eigen::Index> omega(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    omega[i] = static_cast<Eigen::Index>(detail::read_u64(in, "operator mask"));
  }
  return PartialCirculantOperator<double>(
      CirculantMatrix<double>(std::move(row)),
      SubsamplingMask(std::move(omega), static_cast<Eigen::Index>(n)));
}

// One benchmark run in the fixed CSV schema.
struct BenchRow {
  std::string algorithm;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index k = 0;
  std::uint64_t seed = 0;
  long iterations = 0;
  double setup_seconds = 0.0;
  double total_seconds = 0.0;
  double final_mse = 0.0;
  std::uint64_t footprint_bytes = 0;
  std::string status = "ok";

  double iterations_per_second() const {
    const double active = total_seconds - setup_seconds;
    if (!(active > 0.0) || iterations <= 0) return 0.0;
    return static_cast<double>(iterations) / active;
  }
};

inline constexpr const char* kBenchCsvHeader =
    "algorithm,n,m,k,seed,iterations,setup_s,total_s,final_mse,"
    "footprint_bytes,iters_per_s,status";

inline void write_bench_header(std::ostream& out) {
  out << kBenchCsvHeader << "\n";
}

inline void write_bench_row(std::ostream& out, const BenchRow& row) {
  out << row.algorithm << ',' << row.n << ',' << row.m << ',' << row.k << ','
      << row.seed << ',' << row.iterations << ',' << std::setprecision(9)
      << row.setup_seconds << ',' << row.total_seconds << ','
      << std::setprecision(17) << row.final_mse << ',' << row.footprint_bytes
      << ',' << std::setprecision(9) << row.iterations_per_second() << ','
      << row.status << "\n";
}

}  // namespace circlasso

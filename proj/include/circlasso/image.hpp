// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Grayscale images as row-major intensity vectors, with binary PGM (P5,
// 8-bit) import and export. Intensities are clamped to [0, 1] only when an
// image is constructed or written; intermediate math runs on unclamped
// reals.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"

namespace circlasso {

template <typename Scalar = double>
struct GrayImage {
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  Vector<Scalar> pixels;  // row-major, width * height entries in [0, 1]

  Eigen::Index size() const { return width * height; }

  Scalar& at(Eigen::Index row, Eigen::Index col) {
    return pixels[row * width + col];
  }
  Scalar at(Eigen::Index row, Eigen::Index col) const {
    return pixels[row * width + col];
  }
};

// Builds an image from arbitrary reals, clamping into [0, 1].
template <typename Scalar>
GrayImage<Scalar> make_image(Eigen::Index width, Eigen::Index height,
                             const Vector<Scalar>& values) {
  if (width < 1 || height < 1)
    throw ParameterError("make_image: dimensions must be positive");
  detail::check_same_size(values.size(), width * height, "make_image");
  GrayImage<Scalar> img;
  img.width = width;
  img.height = height;
  img.pixels = values.unaryExpr([](Scalar v) {
    return std::min(Scalar(1), std::max(Scalar(0), v));
  });
  return img;
}

namespace detail {

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  return token;
}

inline long pgm_number(const std::string& token, const char* field) {
  if (token.empty())
    throw FormatError(std::string("pgm: missing ") + field + " token");
  for (char c : token) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      std::ostringstream msg;
      msg << "pgm: " << field << " token '" << token << "' is not a number";
      throw FormatError(msg.str());
    }
  }
  return std::stol(token);
}

}  // namespace detail

// Reads a binary PGM (P5) file with maxval up to 255. Other PGM variants
// are rejected with the offending header token in the message.
template <typename Scalar = double>
GrayImage<Scalar> read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("pgm: cannot open '" + path + "'");

  const std::string magic = detail::pgm_token(in);
  if (magic != "P5")
    throw FormatError("pgm: unsupported magic token '" + magic +
                      "', expected P5");
  const long width = detail::pgm_number(detail::pgm_token(in), "width");
  const long height = detail::pgm_number(detail::pgm_token(in), "height");
  const long maxval = detail::pgm_number(detail::pgm_token(in), "maxval");
  if (width < 1 || height < 1)
    throw FormatError("pgm: non-positive dimensions");
  if (maxval < 1 || maxval > 255) {
    std::ostringstream msg;
    msg << "pgm: unsupported maxval token '" << maxval
        << "', expected 1..255";
    throw FormatError(msg.str());
  }

  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::string raw(count, '\0');
  in.read(raw.data(), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    throw FormatError("pgm: truncated pixel data");

  GrayImage<Scalar> img;
  img.width = width;
  img.height = height;
  img.pixels = Vector<Scalar>(width * height);
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels[static_cast<Eigen::Index>(i)] =
        static_cast<Scalar>(static_cast<unsigned char>(raw[i])) /
        static_cast<Scalar>(maxval);
  }
  return img;
}

// Writes a binary PGM (P5, maxval 255). Intensities are clamped to [0, 1]
// and quantized to 8 bits here; the in-memory image is untouched.
template <typename Scalar>
void write_pgm(const GrayImage<Scalar>& img, const std::string& path) {
  if (img.width < 1 || img.height < 1)
    throw ParameterError("write_pgm: empty image");
  detail::check_same_size(img.pixels.size(), img.size(), "write_pgm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("pgm: cannot open '" + path + "' for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
    const Scalar clamped =
        std::min(Scalar(1), std::max(Scalar(0), img.pixels[i]));
    const int level = static_cast<int>(
        std::lround(static_cast<double>(clamped) * 255.0));
    out.put(static_cast<char>(static_cast<unsigned char>(level)));
  }
  if (!out) throw FormatError("pgm: write to '" + path + "' failed");
}

}  // namespace circlasso

// Copyright 2026 The circlasso Authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header for the circlasso library.

#pragma once

#include "circlasso/circulant.hpp"
#include "circlasso/deblur.hpp"
#include "circlasso/errors.hpp"
#include "circlasso/fft.hpp"
#include "circlasso/image.hpp"
#include "circlasso/io.hpp"
#include "circlasso/parallel.hpp"
#include "circlasso/sensing.hpp"
#include "circlasso/solvers.hpp"

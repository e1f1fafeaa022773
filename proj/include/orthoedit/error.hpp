// Copyright 2026 The orthoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace orthoedit {

// The three failure classes map onto the CLI exit codes 1, 2 and 3.

/// Bad arguments, invalid recipe, unknown keys.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed files, shape or name mismatches, non-finite tensors.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical contract could not be met (degenerate spectrum, SVD
/// non-convergence, forward-check tolerance exceeded).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace orthoedit

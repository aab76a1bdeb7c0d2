// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 stmkit contributors
#pragma once

#include <stdexcept>
#include <string>

namespace stmkit {

// Error hierarchy mirrored by the CLI exit-code contract:
// input problems -> 2, non-convergence -> 3, artifact mismatch -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unparseable input (bad JSON/CSV, malformed artifact files). Carries a
// line number in the message when one is known.
class FormatError : public Error {
public:
    using Error::Error;
};

// Input that parses but violates a contract (duplicate ids, year <= 0, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration (K < 2, empty vocabulary, bad sweep range, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite intermediate in a numerical routine.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Stored artifacts that do not belong together (vocab hash, shape mismatch).
class ArtifactMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace stmkit

// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace wavevid {

// Base for every error the library raises. Callers that only need to
// distinguish "bad usage" from "bad data" can catch this and DataError.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Signal length is odd, empty or mismatched.
class LengthError : public Error {
public:
    using Error::Error;
};

// Grid dimensions incompatible with the requested transform or mask.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Index, parameter or identifier outside its valid range.
class RangeError : public Error {
public:
    using Error::Error;
};

// Anything wrong with the bytes of a video file.
class DataError : public Error {
public:
    using Error::Error;
};

enum class FormatFault {
    Malformed,          // truncated or structurally broken
    UnsupportedFormat,  // magic mismatch
    UnsupportedVersion,
    Invariant,          // fields parse but contradict each other
};

class FormatError : public DataError {
public:
    FormatError(FormatFault fault, const std::string& what)
        : DataError(what), fault_(fault) {}
    FormatFault fault() const noexcept { return fault_; }

private:
    FormatFault fault_;
};

// Coefficient payload inconsistent with its block table.
class CorruptStream : public DataError {
public:
    using DataError::DataError;
};

// A projection sampled a pixel outside the decoded footprint.
class CoverageError : public Error {
public:
    using Error::Error;
};

}  // namespace wavevid

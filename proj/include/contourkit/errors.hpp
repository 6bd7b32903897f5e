#pragma once

#include <stdexcept>
#include <string>

namespace contourkit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by mask/geometry operations on invalid input (dim mismatch, empty mask).
class MaskError : public Error {
public:
    using Error::Error;
};

/// Raised by dataset loading when the on-disk layout or JSON is broken.
class DatasetError : public Error {
public:
    using Error::Error;
};

/// Raised by PNG read/write failures.
class PngError : public Error {
public:
    using Error::Error;
};

/// Raised by encoding construction (e.g. nothing to encode).
class EncodingError : public Error {
public:
    using Error::Error;
};

/// Raised by segmenter implementations on unusable queries.
class SegmenterError : public Error {
public:
    using Error::Error;
};

} // namespace contourkit

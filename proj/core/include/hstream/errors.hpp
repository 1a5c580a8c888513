// Copyright 2026 The hstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hstream {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument value (non-positive size, wrong frame count, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Tensor shapes that do not fit the operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Broken call protocol, e.g. a cache handed to the wrong layer.
class ContractError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Bad magic, version or dtype in a tensor file, or malformed JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Payload shorter (or longer) than the header declares.
class LengthError : public Error {
public:
    using Error::Error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

/// Head segment too short to normalize by; the sequence is unusable.
class DegenerateHeadError : public Error {
public:
    using Error::Error;
};

}  // namespace hstream

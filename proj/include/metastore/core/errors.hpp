#pragma once

#include <stdexcept>
#include <string>

namespace metastore {

/// Base class for all metastore errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A sequence contained a character outside {A,C,G,T}.
class EncodingError : public Error {
public:
    using Error::Error;
};

/// An argument fell outside its documented range (e.g. k > 60).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (FASTQ/FASTA record, binary header, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Bucket planning failed (empty sample, bad target count).
class PlanError : public Error {
public:
    using Error::Error;
};

/// Database/sketch construction failed.
class BuildError : public Error {
public:
    using Error::Error;
};

/// A stream that must be strictly increasing was not.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration (k mismatch, invalid device geometry, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Inconsistent data encountered at run time (missing index, zero sketch).
class DataError : public Error {
public:
    using Error::Error;
};

/// Requested data does not fit the simulated device.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace metastore

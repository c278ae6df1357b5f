#pragma once

#include <stdexcept>
#include <string>

namespace wlogit {

/// Coarse classification used by front ends to map failures onto exit codes.
enum class ErrorKind {
    invalid_argument,
    dimension_mismatch,
    insufficient_samples,
    data,
    not_positive_definite,
    numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorKind::invalid_argument, what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what)
        : Error(ErrorKind::dimension_mismatch, what) {}
};

class InsufficientSamples : public Error {
public:
    explicit InsufficientSamples(const std::string& what)
        : Error(ErrorKind::insufficient_samples, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what)
        : Error(ErrorKind::not_positive_definite, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what)
        : Error(ErrorKind::numerical, what) {}
};

}  // namespace wlogit

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pca_ids {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

class TooFewRows : public Error {
public:
    explicit TooFewRows(std::size_t n)
        : Error("need at least 2 rows, got " + std::to_string(n)) {}
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class EmptyScores : public Error {
public:
    EmptyScores() : Error("threshold calibration needs at least one score") {}
};

class LengthMismatch : public Error {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EmptyMatrix : public Error {
public:
    EmptyMatrix() : Error("confusion matrix has no observations") {}
};

class EmptyGrid : public Error {
public:
    EmptyGrid() : Error("threshold grid is empty") {}
};

/// Bad or tampered model file (parse failure, version mismatch, integrity check).
class ModelFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace pca_ids

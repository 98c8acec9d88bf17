#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decmetrics {

// Base of every error raised by the library. The CLI maps ValidationError
// (and its subclasses) to exit status 1 and everything else to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// A NodePath that does not resolve inside its tree.
class AddressError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Remote backend unreachable, timed out after retries, or non-200 status.
class BackendError : public Error {
public:
    using Error::Error;
};

// The backend answered, but the body does not follow the wire protocol.
class ProtocolError : public BackendError {
public:
    ProtocolError(const std::string& what, std::string raw_body)
        : BackendError(what), raw_body_(std::move(raw_body)) {}

    const std::string& raw_body() const noexcept { return raw_body_; }

private:
    std::string raw_body_;
};

// One element of a batch failed; index() names the offending input.
class BatchError : public BackendError {
public:
    BatchError(std::size_t index, const std::string& what)
        : BackendError("batch element " + std::to_string(index) + ": " + what),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Generated text could not be parsed (missing answer block, bad verdict lines).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string raw_reply)
        : Error(what), raw_reply_(std::move(raw_reply)) {}

    const std::string& raw_reply() const noexcept { return raw_reply_; }

private:
    std::string raw_reply_;
};

// Recursive decomposition still splitting at the depth cap.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(std::string claim, int depth)
        : Error("claim still splittable at depth " + std::to_string(depth) + ": " + claim),
          claim_(std::move(claim)), depth_(depth) {}

    const std::string& claim() const noexcept { return claim_; }
    int depth() const noexcept { return depth_; }

private:
    std::string claim_;
    int depth_;
};

class SummaryNotFoundError : public Error {
public:
    using Error::Error;
};

class DisambiguationError : public Error {
public:
    using Error::Error;
};

} // namespace decmetrics

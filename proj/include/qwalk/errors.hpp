#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A graph, distribution, or marked set violates its invariants.
class InvalidInstance : public Error {
  public:
    using Error::Error;
};

// An operation was called outside its documented precondition.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

// stationary_distribution on a graph with zero total weight.
class EmptyGraphError : public Error {
  public:
    using Error::Error;
};

// Some source vertex has no path to the marked set.
class DisconnectedSourceError : public Error {
  public:
    using Error::Error;
};

// A flow fails conservation beyond tolerance.
class InvalidFlowError : public Error {
  public:
    using Error::Error;
};

// The walk space or a state vector is not normalized.
class UnnormalizedStateError : public Error {
  public:
    using Error::Error;
};

// An input lies outside a learning graph's declared domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

// An enumerated construction exceeded the desk-scale budget.
class ScaleExceededError : public Error {
  public:
    ScaleExceededError(const std::string& what, std::size_t size)
        : Error(what + " (basis size " + std::to_string(size) + ")"), size_(size) {}

    std::size_t size() const { return size_; }

  private:
    std::size_t size_;
};

// Reading or writing a file failed; the message names the path.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace qwalk

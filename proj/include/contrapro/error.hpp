#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contrapro {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed input structure: line-count mismatches, bad boundaries, bad indices.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Annotation or test-set records that do not validate.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A scorer answered, but not according to the wire protocol.
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// The scorer process could not be reached or died mid-session.
class TransportError : public Error {
public:
  TransportError(const std::string& what, std::size_t completed, std::size_t requested)
      : Error(what + " (" + std::to_string(completed) + " of " + std::to_string(requested) +
              " requests answered)"),
        completed_(completed),
        requested_(requested) {}

  std::size_t completed() const noexcept { return completed_; }
  std::size_t requested() const noexcept { return requested_; }

private:
  std::size_t completed_;
  std::size_t requested_;
};

/// Balanced sampling asked for more examples of a class than were extracted.
class InsufficientCandidates : public Error {
public:
  InsufficientCandidates(const std::string& pronoun_class, std::size_t available, std::size_t wanted)
      : Error("class '" + pronoun_class + "' has " + std::to_string(available) + " candidates, " +
              std::to_string(wanted) + " requested (short by " + std::to_string(wanted - available) + ")"),
        pronoun_class_(pronoun_class),
        shortfall_(wanted - available) {}

  const std::string& pronoun_class() const noexcept { return pronoun_class_; }
  std::size_t shortfall() const noexcept { return shortfall_; }

private:
  std::string pronoun_class_;
  std::size_t shortfall_;
};

}  // namespace contrapro

#pragma once

#include <stdexcept>
#include <string>

namespace cod3s {

// Every toolkit failure derives from Error so callers (the CLI in particular)
// can map the whole family to one exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents (bad magic, truncated payload).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Embedding rows and sidecar sentences disagree in count.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// A stored value violates a type invariant (e.g. an all-zero embedding row).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition that is not a plain range check.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Scorer backend failure; raw_reply holds whatever the backend emitted.
class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, std::string raw_reply)
      : Error(what), raw_reply_(std::move(raw_reply)) {}

  const std::string& raw_reply() const noexcept { return raw_reply_; }

 private:
  std::string raw_reply_;
};

}  // namespace cod3s

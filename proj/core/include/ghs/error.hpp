#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "ghs/time.hpp"

namespace ghs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A raw record or filter field failed validation.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A range clause with min > max.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operator-facing misuse: unknown language, missing credentials, bad flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

// --- forge ---------------------------------------------------------------

/// Backend unreachable or 5xx. Retried with backoff by the client.
class TransientError : public Error {
 public:
  using Error::Error;
};

/// The backend rejected the credential. Fatal for that token only.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// The backend refused the request because the token's budget is spent.
class RateLimitedError : public Error {
 public:
  explicit RateLimitedError(std::optional<TimePoint> retry_at,
                            const std::string& message = "rate limited")
      : Error(message), retry_at_(retry_at) {}
  std::optional<TimePoint> retry_at() const noexcept { return retry_at_; }

 private:
  std::optional<TimePoint> retry_at_;
};

/// A page index beyond the 10-page (1,000-result) ceiling.
class CapViolation : public Error {
 public:
  using Error::Error;
};

/// The query string does not follow the search grammar.
class MalformedQuery : public Error {
 public:
  using Error::Error;
};

/// A blocking wait was aborted by shutdown.
class CancelledError : public Error {
 public:
  CancelledError() : Error("cancelled") {}
};

// --- pages ---------------------------------------------------------------

class FetchError : public Error {
 public:
  using Error::Error;
};

/// The document is structurally empty; distinct from a single missing metric.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

// --- store ---------------------------------------------------------------

/// Storage failure; the caller may replay since writes are idempotent.
class StoreError : public Error {
 public:
  using Error::Error;
};

class CheckpointRegression : public Error {
 public:
  using Error::Error;
};

}  // namespace ghs

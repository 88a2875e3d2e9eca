#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace campus {

// Every failure the node can report. Names are the wire codes.
#define CAMPUS_ERROR_CODES(X) \
  X(MALFORMED)                \
  X(BAD_HEIGHT)               \
  X(BAD_PREV_HASH)            \
  X(BAD_MERKLE)               \
  X(BAD_SIGNATURE)            \
  X(BAD_TIMESTAMP)            \
  X(BAD_GENESIS)              \
  X(EMPTY_VALIDATOR_SET)      \
  X(NOT_SCHEDULED)            \
  X(WRONG_PROPOSER)           \
  X(BAD_SEAL_SIGNATURE)       \
  X(INVALID_CHAIN)            \
  X(INVALID_PUBKEY)           \
  X(ADDRESS_MISMATCH)         \
  X(BAD_SIG)                  \
  X(INSUFFICIENT_BALANCE)     \
  X(BAD_NONCE)                \
  X(UNAUTHORIZED_MINT)        \
  X(ZERO_GOAL)                \
  X(UNKNOWN_BENEFICIARY)      \
  X(CAMPAIGN_CLOSED)          \
  X(OVERSHOOT)                \
  X(INVALID_DONATION)         \
  X(ALREADY_GRADED)           \
  X(COMPONENT_OUT_OF_RANGE)   \
  X(NOT_PROJECT_FACULTY)      \
  X(NOT_PROJECT_MEMBER)       \
  X(PROJECT_NOT_APPROVED)     \
  X(NO_GRADED_REPORTS)        \
  X(ZERO_AUTHORS)             \
  X(UNVERIFIED_PUBLICATION)   \
  X(ALREADY_VERIFIED)         \
  X(MISSING_WALLET)           \
  X(BUDGET_EXCEEDED)          \
  X(PERIOD_ALREADY_AWARDED)   \
  X(NO_APPLICANTS)            \
  X(POSTING_NOT_OPEN)         \
  X(DUPLICATE_APPLICATION)    \
  X(OUT_OF_RANGE)             \
  X(NOT_SUPERVISOR)           \
  X(ALREADY_RATED)            \
  X(NOT_COMPLETED)            \
  X(HOURS_EXCEED_CAP)         \
  X(BAD_HOURS_INCREMENT)      \
  X(DUPLICATE_TIMESHEET)      \
  X(INACTIVE_ASSIGNMENT)      \
  X(SCHEMA_VIOLATION)         \
  X(BROKEN_REFERENCE)         \
  X(REFERENCED)               \
  X(DUPLICATE_UNIQUE_KEY)     \
  X(UNKNOWN_FIELD)            \
  X(UNKNOWN_COLLECTION)       \
  X(UNAUTHENTICATED)          \
  X(EXPIRED_TOKEN)            \
  X(FORBIDDEN)                \
  X(UNKNOWN_RECIPIENT)        \
  X(NOT_VALIDATOR)            \
  X(NOT_FOUND)                \
  X(IO_ERROR)                 \
  X(INTERNAL)

enum class Errc {
#define CAMPUS_ENUM_ENTRY(name) name,
  CAMPUS_ERROR_CODES(CAMPUS_ENUM_ENTRY)
#undef CAMPUS_ENUM_ENTRY
};

std::string_view to_string(Errc code);

/// Domain failure carrying a wire code and structured details.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  Errc code_;
  nlohmann::json details_;
};

/// Outcome of a pure check: either accepted or the first failed check with context.
struct Verdict {
  std::optional<Errc> failure;
  std::string detail;

  static Verdict accept() { return {}; }
  static Verdict reject(Errc code, std::string why = {}) { return {code, std::move(why)}; }

  bool ok() const noexcept { return !failure.has_value(); }
  explicit operator bool() const noexcept { return ok(); }
};

}  // namespace campus

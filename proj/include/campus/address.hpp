#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace campus {

/// Wallet address: "vj1" followed by 40 lowercase hex digits, or the MINT
/// sender sentinel "AUTHORITY".
class Address {
 public:
  static constexpr std::string_view kPrefix = "vj1";
  static constexpr std::string_view kAuthority = "AUTHORITY";

  Address() = default;

  static std::optional<Address> parse(std::string_view text);
  static Address authority() { return Address(std::string(kAuthority)); }

  bool is_authority() const { return value_ == kAuthority; }
  const std::string& str() const { return value_; }

  auto operator<=>(const Address&) const = default;

 private:
  explicit Address(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

}  // namespace campus

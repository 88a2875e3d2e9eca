#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace campus {

/// Non-negative fixed-point value with exactly four fractional digits.
///
/// All scoring arithmetic goes through this type so that every node computes
/// byte-identical scores. Division rounds half up at the fourth digit.
class Decimal4 {
 public:
  static constexpr std::int64_t kScale = 10'000;

  constexpr Decimal4() = default;

  static constexpr Decimal4 from_units(std::int64_t units) { return Decimal4(units); }
  static constexpr Decimal4 from_int(std::int64_t whole) { return Decimal4(whole * kScale); }

  /// Exact ratio numerator/denominator of integers, rounded half up.
  static Decimal4 ratio(std::int64_t numerator, std::int64_t denominator);

  /// Parses "12", "2.467", "0.8223". More than four fractional digits is rejected.
  static std::optional<Decimal4> parse(std::string_view text);

  constexpr std::int64_t units() const { return units_; }

  /// Always renders four fractional digits, e.g. "8.0000".
  std::string to_string() const;

  Decimal4 divided_by(std::int64_t divisor) const;

  constexpr Decimal4 operator+(Decimal4 o) const { return Decimal4(units_ + o.units_); }
  constexpr Decimal4& operator+=(Decimal4 o) {
    units_ += o.units_;
    return *this;
  }
  constexpr auto operator<=>(const Decimal4&) const = default;

 private:
  constexpr explicit Decimal4(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

/// Arithmetic mean rounded half up; empty input yields nullopt.
std::optional<Decimal4> mean(std::span<const Decimal4> values);

}  // namespace campus

#include "campus/decimal.hpp"

#include <cassert>
#include <charconv>
#include <cstdio>

namespace campus {

Decimal4 Decimal4::ratio(std::int64_t numerator, std::int64_t denominator) {
  assert(numerator >= 0 && denominator > 0);
  // round(n * scale / d) with ties away from zero: floor((2*n*scale + d) / (2*d)).
  const __int128 scaled = static_cast<__int128>(numerator) * kScale;
  const __int128 twice_d = static_cast<__int128>(denominator) * 2;
  return Decimal4(static_cast<std::int64_t>((scaled * 2 + denominator) / twice_d));
}

Decimal4 Decimal4::divided_by(std::int64_t divisor) const {
  assert(units_ >= 0 && divisor > 0);
  const __int128 twice_d = static_cast<__int128>(divisor) * 2;
  return Decimal4(static_cast<std::int64_t>((static_cast<__int128>(units_) * 2 + divisor) / twice_d));
}

std::optional<Decimal4> Decimal4::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 4) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  for (char c : whole)
    if (c < '0' || c > '9') return std::nullopt;
  for (char c : frac)
    if (c < '0' || c > '9') return std::nullopt;

  std::int64_t w = 0;
  auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
  if (ec != std::errc{} || w > 100'000'000'000'000LL) return std::nullopt;
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 4; ++i) f = f * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  return Decimal4(w * kScale + f);
}

std::string Decimal4::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%04lld", static_cast<long long>(units_ / kScale),
                static_cast<long long>(units_ % kScale));
  return buf;
}

std::optional<Decimal4> mean(std::span<const Decimal4> values) {
  if (values.empty()) return std::nullopt;
  Decimal4 total;
  for (Decimal4 v : values) total += v;
  return total.divided_by(static_cast<std::int64_t>(values.size()));
}

}  // namespace campus

#include "campus/address.hpp"

namespace campus {

std::optional<Address> Address::parse(std::string_view text) {
  if (text == kAuthority) return authority();
  if (text.size() != kPrefix.size() + 40 || !text.starts_with(kPrefix)) return std::nullopt;
  for (char c : text.substr(kPrefix.size()))
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return std::nullopt;
  return Address(std::string(text));
}

}  // namespace campus

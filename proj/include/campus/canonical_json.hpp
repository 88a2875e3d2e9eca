#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace campus {

using Json = nlohmann::json;

/// Sorted keys, no insignificant whitespace, raw UTF-8. Floating-point values
/// are never produced by this codebase, so integer formatting is the only
/// number form that appears.
std::string canonical_dump(const Json& value);

/// Parses text and requires it to already be in canonical form.
Json parse_canonical(std::string_view text);

}  // namespace campus

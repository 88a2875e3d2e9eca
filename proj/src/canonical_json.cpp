#include "campus/canonical_json.hpp"

#include "campus/error.hpp"

namespace campus {

namespace {
void reject_floats(const Json& v) {
  if (v.is_number_float()) throw Error(Errc::MALFORMED, "floating-point value in canonical document");
  if (v.is_structured())
    for (const auto& child : v) reject_floats(child);
}
}  // namespace

std::string canonical_dump(const Json& value) {
  reject_floats(value);
  return value.dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json parse_canonical(std::string_view text) {
  Json parsed;
  try {
    parsed = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::MALFORMED, std::string("unparseable JSON: ") + e.what());
  }
  if (canonical_dump(parsed) != text) throw Error(Errc::MALFORMED, "document is not in canonical form");
  return parsed;
}

}  // namespace campus

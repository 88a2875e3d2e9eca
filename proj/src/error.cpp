#include "campus/error.hpp"

namespace campus {

std::string_view to_string(Errc code) {
  switch (code) {
#define CAMPUS_NAME_ENTRY(name) \
  case Errc::name:              \
    return #name;
    CAMPUS_ERROR_CODES(CAMPUS_NAME_ENTRY)
#undef CAMPUS_NAME_ENTRY
  }
  return "INTERNAL";
}

}  // namespace campus

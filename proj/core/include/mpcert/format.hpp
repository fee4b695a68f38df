#pragma once

#include <string>
#include <string_view>

#include "mpcert/matprims.hpp"

namespace mpcert {

/// Locale-independent decimal rendering with 17 significant digits, which
/// round-trips every finite double bit-exactly. Infinities render as
/// "inf"/"-inf" and NaN as "nan".
std::string format_double(double v);

/// Inverse of format_double; accepts "inf", "-inf" and "nan".
double parse_double(std::string_view text);

/// JSON array literal of a vector, numbers via format_double.
std::string format_vector_json(const Vector& v);

/// Quoted, escaped JSON string literal.
std::string json_string(std::string_view s);

}  // namespace mpcert

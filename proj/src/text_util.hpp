#pragma once

#include <map>
#include <string>
#include <string_view>

namespace tsearch::text {

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower(std::string_view s);
bool istarts_with(std::string_view s, std::string_view prefix);

// Replaces every {name} placeholder. Unknown placeholders are an error so
// template drift is caught early.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

std::string sha256_hex(std::string_view data);

}  // namespace tsearch::text

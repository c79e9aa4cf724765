#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace drpo::llm {

// Pulls a JSON value out of free-form model text.
//
// Order of attempts: the first ``` fenced block (an optional language tag such
// as "json" is skipped), then the longest balanced {...} span in the text.
// Raw newlines and tabs inside string literals, a frequent model mistake, are
// escaped before giving up on a candidate. Strings that spell a number in
// full ("4", " 3.5 ") are converted to numbers everywhere in the result.
//
// Throws ExtractionError carrying `text` when nothing parses.
nlohmann::json extract_json(std::string_view text);

// Pretty-prints `value` inside a ```json fence, the shape models are asked to
// answer in. extract_json(render_fenced(v)) == v for any v without
// number-like strings.
std::string render_fenced(const nlohmann::json& value);

// Reads `key` of `object` as text; numbers are formatted, missing -> "".
std::string text_field(const nlohmann::json& object, std::string_view key);

} // namespace drpo::llm

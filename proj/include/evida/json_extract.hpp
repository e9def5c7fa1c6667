#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace evida {

// Returns the first substring of `text` that is a balanced, parseable JSON
// object, ignoring code fences and surrounding prose. `saw_candidate` (when
// given) reports whether any balanced {...} span existed at all, letting the
// caller distinguish "no JSON" from "malformed JSON".
std::optional<std::string> extract_first_json_object(std::string_view text,
                                                     bool* saw_candidate = nullptr);

// First balanced JSON object or array starting at or after `marker`.
std::optional<std::string> extract_json_after(std::string_view text,
                                              std::string_view marker, char open);

// First balanced, parseable JSON value opening with `open` at or after
// `pos`. When found, `next_pos` (if given) is set just past the opening
// bracket, so callers can resume scanning for further candidates.
std::optional<std::string> extract_json_from(std::string_view text, std::size_t pos,
                                             char open, std::size_t* next_pos = nullptr);

}  // namespace evida

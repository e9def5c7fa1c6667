#include "evida/json_extract.hpp"

#include <nlohmann/json.hpp>

namespace evida {

namespace {

// Span of the balanced bracket structure opening at `start`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start, char open, char close) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == open) {
      ++depth;
    } else if (c == close) {
      --depth;
      if (depth == 0) return i;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<std::string> extract_first_json_object(std::string_view text,
                                                     bool* saw_candidate) {
  if (saw_candidate != nullptr) *saw_candidate = false;
  std::size_t search = 0;
  while (true) {
    const std::size_t start = text.find('{', search);
    if (start == std::string_view::npos) return std::nullopt;
    const std::size_t end = balanced_end(text, start, '{', '}');
    if (end == std::string_view::npos) {
      search = start + 1;
      continue;
    }
    if (saw_candidate != nullptr) *saw_candidate = true;
    std::string candidate(text.substr(start, end - start + 1));
    if (nlohmann::json::accept(candidate)) {
      return candidate;
    }
    search = start + 1;
  }
}

std::optional<std::string> extract_json_after(std::string_view text,
                                              std::string_view marker, char open) {
  const std::size_t anchor = text.find(marker);
  if (anchor == std::string_view::npos) return std::nullopt;
  return extract_json_from(text, anchor + marker.size(), open);
}

std::optional<std::string> extract_json_from(std::string_view text, std::size_t pos,
                                             char open, std::size_t* next_pos) {
  const char close = open == '{' ? '}' : ']';
  std::size_t search = pos;
  while (true) {
    const std::size_t start = text.find(open, search);
    if (start == std::string_view::npos) return std::nullopt;
    const std::size_t end = balanced_end(text, start, open, close);
    if (end != std::string_view::npos) {
      std::string candidate(text.substr(start, end - start + 1));
      if (nlohmann::json::accept(candidate)) {
        if (next_pos != nullptr) *next_pos = start + 1;
        return candidate;
      }
    }
    search = start + 1;
  }
}

}  // namespace evida

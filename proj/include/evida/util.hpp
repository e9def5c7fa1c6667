#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace evida {

// FNV-1a 64-bit. Stable across platforms; used for cache addressing and
// the deterministic test encoder, never for security.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

// splitmix64 step; the portable PRNG underneath seeded mocks and shuffles.
std::uint64_t splitmix64(std::uint64_t& state);

// Uniform double in [0,1) from a splitmix64 stream.
double splitmix_unit(std::uint64_t& state);

// Fisher-Yates with splitmix64 so shuffles are identical on every platform
// (std::shuffle is implementation-defined).
template <typename T>
void deterministic_shuffle(std::vector<T>& values, std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ull;
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(splitmix64(state) % i);
    std::swap(values[i - 1], values[j]);
  }
}

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

// Lowercase alphanumeric tokens; the unit of the hashing encoder.
std::vector<std::string> tokenize_words(std::string_view text);

std::string read_file(const std::filesystem::path& path);       // throws InputError
void write_file(const std::filesystem::path& path, std::string_view content);

// Calls fn(line_number, line) per line; '\r' stripped. Returns line count.
std::size_t for_each_line(std::string_view content,
                          const std::function<void(std::size_t, std::string_view)>& fn);

// CRC32 (zlib) of a byte string as 8 lowercase hex chars.
std::string crc32_hex(std::string_view data);

std::string getenv_or(const std::string& name, const std::string& fallback);

}  // namespace evida

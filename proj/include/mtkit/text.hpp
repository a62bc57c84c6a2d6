#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtkit {

// Splits on runs of ASCII whitespace; never yields empty pieces.
std::vector<std::string_view> split_ws(std::string_view text);

// Splits on every occurrence of sep (no collapsing; may yield empty pieces).
std::vector<std::string_view> split_on(std::string_view text, std::string_view sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool contains_ws(std::string_view s);

// Decodes UTF-8 into per-code-point strings. Bytes that do not form a valid
// sequence pass through one byte at a time.
std::vector<std::string> utf8_codepoints(std::string_view text);

bool is_single_codepoint(std::string_view s);

// Simple case mapping covering ASCII, Latin-1 supplement and Latin
// Extended-A; other code points pass through unchanged.
std::string utf8_lowercase(std::string_view text);

std::uint64_t fnv1a64(std::string_view data);

// Lowercased, whitespace-normalized form used for exclusion hashing.
std::string canonical_line(std::string_view line);
std::uint64_t canonical_line_hash(std::string_view line);

}  // namespace mtkit

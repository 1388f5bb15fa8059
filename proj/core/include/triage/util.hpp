#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

using Digest = std::array<unsigned char, 32>;

Digest sha256(std::span<const unsigned char> bytes);
Digest sha256(std::string_view text);
std::string to_hex(const Digest& d);
std::optional<Digest> digest_from_hex(std::string_view hex);

std::string base64_encode(std::span<const unsigned char> bytes);
// Whitespace tolerated; returns nullopt on any other non-alphabet byte.
std::optional<std::vector<unsigned char>> base64_decode(std::string_view text);

// Shannon entropy of the byte histogram, in bits per byte. Empty input -> 0.
double shannon_entropy(std::span<const unsigned char> bytes);
double shannon_entropy(std::string_view text);

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Percent-escaping for the single-line structured payload fields of the
// action log (escapes '%', ';', '=', TAB, CR, LF).
std::string field_escape(std::string_view raw);
std::string field_unescape(std::string_view escaped);

struct UrlParts {
  std::string scheme;
  std::string host;  // lowercased, no port, no userinfo
  int port = 0;      // 0 = default for scheme
  std::string target;  // path + query, "/" when absent
};
// Accepts http/https absolute URLs; nullopt otherwise.
std::optional<UrlParts> parse_url(std::string_view url);
std::string host_of_url(std::string_view url);  // "" when unparsable

bool looks_like_ipv4(std::string_view host);

// splitmix64; used to derive per-scenario seeds from a master seed.
std::uint64_t mix64(std::uint64_t x);

bool is_valid_utf8(std::string_view s);

// Injective, total encoding of arbitrary byte strings into JSON-safe text:
// valid UTF-8 without NUL passes through; anything else becomes a
// NUL-'x'-prefixed hex form. Plain strings never start with NUL, so the two
// images cannot collide.
std::string canon_encode(std::string_view raw);
std::string canon_decode(std::string_view encoded);

}  // namespace triage

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ig::hex {

inline bool is_hex_digit(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

inline int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return c - 'A' + 10;
}

/// Lowercase hex, no prefix.
inline std::string encode(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

inline std::string encode0x(std::span<const std::uint8_t> bytes) {
    return "0x" + encode(bytes);
}

/// Accepts mixed case, with or without 0x prefix; even length required.
inline std::optional<std::vector<std::uint8_t>> decode(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
    if (text.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out(text.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        char hi = text[2 * i], lo = text[2 * i + 1];
        if (!is_hex_digit(hi) || !is_hex_digit(lo)) return std::nullopt;
        out[i] = static_cast<std::uint8_t>(nibble(hi) << 4 | nibble(lo));
    }
    return out;
}

inline bool matches_0x_hex(std::string_view text, std::size_t digits) {
    if (text.size() != digits + 2 || text[0] != '0' || text[1] != 'x') return false;
    for (std::size_t i = 2; i < text.size(); ++i)
        if (!is_hex_digit(text[i])) return false;
    return true;
}

}  // namespace ig::hex

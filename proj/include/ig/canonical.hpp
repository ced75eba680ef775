#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"

namespace ig {

using json = nlohmann::json;

// Canonical JSON serialization: RFC 8785 semantics restricted to this value
// domain. Keys sort byte-lexicographically over their UTF-8 encodings; no
// whitespace; strings escape only what JSON requires (short escapes where
// defined, lowercase \u00xx otherwise); integers print verbatim. The only
// permitted non-integer number is a "riskScore" member value, written as the
// minimal decimal with at most six fractional digits.

inline std::string render_risk_micro(std::int64_t micro) {
    std::int64_t whole = micro / 1000000;
    std::int64_t frac = micro % 1000000;
    if (frac == 0) return std::to_string(whole);
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frac));
    std::string_view digits(buf, 6);
    while (digits.back() == '0') digits.remove_suffix(1);
    return std::to_string(whole) + "." + std::string(digits);
}

/// Micro-units (1e-6) representation of a double, or nullopt when the value
/// is not exactly a decimal with <= 6 fractional digits.
inline std::optional<std::int64_t> risk_micro_from_double(double v) {
    if (!std::isfinite(v) || v < 0 || v > 9e12) return std::nullopt;
    auto micro = static_cast<std::int64_t>(std::llround(v * 1e6));
    std::string text = render_risk_micro(micro);
    double back = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
    if (ec != std::errc() || ptr != text.data() + text.size() || back != v) return std::nullopt;
    return micro;
}

namespace detail {

inline void canonical_string(std::string_view s, std::string& out) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\f': out += "\\f"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

inline void canonical_value(const json& v, std::string_view key, std::string& out) {
    switch (v.type()) {
        case json::value_t::null:
            out += "null";
            break;
        case json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case json::value_t::number_float: {
            if (key != "riskScore")
                throw UncanonicalizableNumber(
                    "non-integer number outside riskScore (key '" + std::string(key) + "')");
            auto micro = risk_micro_from_double(v.get<double>());
            if (!micro)
                throw UncanonicalizableNumber("riskScore not representable with <= 6 decimal places");
            out += render_risk_micro(*micro);
            break;
        }
        case json::value_t::string:
            canonical_string(v.get_ref<const std::string&>(), out);
            break;
        case json::value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& item : v) {
                if (!first) out.push_back(',');
                first = false;
                canonical_value(item, {}, out);
            }
            out.push_back(']');
            break;
        }
        case json::value_t::object: {
            std::vector<const std::string*> keys;
            keys.reserve(v.size());
            for (auto it = v.begin(); it != v.end(); ++it) keys.push_back(&it.key());
            std::sort(keys.begin(), keys.end(),
                      [](const std::string* a, const std::string* b) { return *a < *b; });
            out.push_back('{');
            bool first = true;
            for (const std::string* k : keys) {
                if (!first) out.push_back(',');
                first = false;
                canonical_string(*k, out);
                out.push_back(':');
                canonical_value(v.at(*k), *k, out);
            }
            out.push_back('}');
            break;
        }
        default:
            throw UncanonicalizableNumber("binary/discarded value has no canonical form");
    }
}

}  // namespace detail

inline std::string canonicalize(const json& value) {
    std::string out;
    detail::canonical_value(value, {}, out);
    return out;
}

}  // namespace ig

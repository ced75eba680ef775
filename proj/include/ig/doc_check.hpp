#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/hex.hpp"
#include "ig/time_codec.hpp"
#include "ig/uint_decimal.hpp"

namespace ig::check {

using json = nlohmann::json;

inline std::string escape_pointer_token(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out.push_back(c);
    }
    return out;
}

inline std::string join(const std::string& parent, std::string_view key) {
    return parent + "/" + escape_pointer_token(key);
}

inline bool is_uuid_text(std::string_view s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < 36; ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (s[i] != '-') return false;
        } else if (!hex::is_hex_digit(s[i])) {
            return false;
        }
    }
    return true;
}

struct Ctx {
    std::vector<Finding> out;

    void fail(std::string path, std::string reason) {
        out.push_back({std::move(path), std::move(reason)});
    }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void unknown_keys(const json& obj, const std::string& path,
                      std::initializer_list<std::string_view> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (auto a : allowed)
                if (it.key() == a) { known = true; break; }
            if (!known) fail(join(path, it.key()), "unexpected property");
        }
    }

    const json* required(const json& obj, const std::string& path, std::string_view key) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            fail(join(path, key), "missing required property");
            return nullptr;
        }
        return &*it;
    }

    bool string(const json& j, const std::string& path) {
        if (j.is_string()) return true;
        fail(path, "expected a string");
        return false;
    }

    // JSON integers only: floats and exponent forms are rejected
    bool integer(const json& j, const std::string& path, std::int64_t min,
                 std::int64_t max = INT64_MAX) {
        if (!j.is_number_integer()) {
            fail(path, "expected an integer");
            return false;
        }
        if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
            fail(path, "integer out of range");
            return false;
        }
        std::int64_t v = j.get<std::int64_t>();
        if (v < min || v > max) {
            fail(path, "integer out of range [" + std::to_string(min) + ", " +
                           (max == INT64_MAX ? std::string("..") : std::to_string(max)) + "]");
            return false;
        }
        return true;
    }

    bool uint_string(const json& j, const std::string& path) {
        if (!string(j, path)) return false;
        const auto& s = j.get_ref<const std::string&>();
        bool digits = !s.empty();
        for (char c : s)
            if (c < '0' || c > '9') digits = false;
        if (!digits) {
            fail(path, "does not match UintString pattern ^[0-9]+$");
            return false;
        }
        if (!UintDecimal::is_canonical(s)) {
            fail(path, "UintDecimal must not carry leading zeros");
            return false;
        }
        return true;
    }

    bool address(const json& j, const std::string& path) {
        if (!string(j, path)) return false;
        if (!hex::matches_0x_hex(j.get_ref<const std::string&>(), 40)) {
            fail(path, "does not match Address pattern ^0x[a-fA-F0-9]{40}$");
            return false;
        }
        return true;
    }

    bool uuid(const json& j, const std::string& path) {
        if (!string(j, path)) return false;
        if (!is_uuid_text(j.get_ref<const std::string&>())) {
            fail(path, "not a UUID");
            return false;
        }
        return true;
    }

    bool rfc3339(const json& j, const std::string& path) {
        if (!string(j, path)) return false;
        if (!parse_rfc3339(j.get_ref<const std::string&>())) {
            fail(path, "not an RFC 3339 UTC timestamp (YYYY-MM-DDTHH:MM:SSZ)");
            return false;
        }
        return true;
    }
};

}  // namespace ig::check

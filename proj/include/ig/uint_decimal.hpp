#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ig/errors.hpp"

namespace ig {

/// Arbitrary-precision non-negative integer in canonical base-10 text form:
/// digits only, no leading zeros except the single digit "0".
class UintDecimal {
public:
    UintDecimal() : digits_("0") {}

    static bool is_canonical(std::string_view text) {
        if (text.empty()) return false;
        for (char c : text)
            if (c < '0' || c > '9') return false;
        return text.size() == 1 || text[0] != '0';
    }

    static std::optional<UintDecimal> from_string(std::string_view text) {
        if (!is_canonical(text)) return std::nullopt;
        return UintDecimal(std::string(text));
    }

    /// Bypasses canonical-form validation; for constructing deliberately
    /// malformed values in tests.
    static UintDecimal unchecked(std::string text) { return UintDecimal(std::move(text)); }

    static UintDecimal from_u64(std::uint64_t v) { return UintDecimal(std::to_string(v)); }

    const std::string& str() const { return digits_; }

    std::strong_ordering operator<=>(const UintDecimal& other) const {
        if (digits_.size() != other.digits_.size())
            return digits_.size() <=> other.digits_.size();
        return digits_.compare(other.digits_) <=> 0;
    }
    bool operator==(const UintDecimal& other) const = default;

    UintDecimal operator+(const UintDecimal& other) const {
        const std::string& a = digits_;
        const std::string& b = other.digits_;
        std::string out;
        out.reserve(std::max(a.size(), b.size()) + 1);
        int carry = 0;
        for (std::size_t i = 0; i < std::max(a.size(), b.size()) || carry; ++i) {
            int da = i < a.size() ? a[a.size() - 1 - i] - '0' : 0;
            int db = i < b.size() ? b[b.size() - 1 - i] - '0' : 0;
            int s = da + db + carry;
            out.push_back(static_cast<char>('0' + s % 10));
            carry = s / 10;
        }
        std::reverse(out.begin(), out.end());
        return UintDecimal(std::move(out));
    }

    static const UintDecimal& min(const UintDecimal& a, const UintDecimal& b) {
        return b < a ? b : a;
    }

private:
    explicit UintDecimal(std::string digits) : digits_(std::move(digits)) {}
    std::string digits_;
};

inline UintDecimal parse_uint_decimal(std::string_view text) {
    auto v = UintDecimal::from_string(text);
    if (!v) throw Error("not a canonical unsigned decimal: '" + std::string(text) + "'");
    return *v;
}

}  // namespace ig

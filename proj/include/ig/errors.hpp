#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ig {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One validation defect, addressed by an RFC 6901 pointer into the document.
struct Finding {
    std::string path;
    std::string reason;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

inline std::string describe(const std::vector<Finding>& findings) {
    std::string out;
    for (const auto& f : findings) {
        if (!out.empty()) out += "; ";
        out += f.path.empty() ? "(root)" : f.path;
        out += ": ";
        out += f.reason;
    }
    return out;
}

struct MalformedJson : Error {
    using Error::Error;
};

struct SchemaViolation : Error {
    std::vector<Finding> findings;
    explicit SchemaViolation(std::vector<Finding> f)
        : Error(describe(f)), findings(std::move(f)) {}
    SchemaViolation(std::string path, std::string reason)
        : SchemaViolation(std::vector<Finding>{{std::move(path), std::move(reason)}}) {}
    const std::string& path() const { return findings.front().path; }
};

struct UncanonicalizableNumber : Error {
    using Error::Error;
};

struct InvalidSeed : Error {
    using Error::Error;
};

struct MalformedSignature : Error {
    using Error::Error;
};

struct UnsupportedLegacyShape : Error {
    using Error::Error;
};

struct PointerUnresolvable : Error {
    std::string pointer;
    PointerUnresolvable(std::string ptr, const std::string& reason)
        : Error(ptr + ": " + reason), pointer(std::move(ptr)) {}
};

struct ResultInvalid : Error {
    std::vector<Finding> findings;
    explicit ResultInvalid(std::vector<Finding> f)
        : Error("modified intent is invalid: " + describe(f)), findings(std::move(f)) {}
};

struct ClockInvalid : Error {
    using Error::Error;
};

struct TimestampRegression : Error {
    using Error::Error;
};

struct DeadlineExceeded : Error {
    using Error::Error;
};

struct InsufficientBalance : Error {
    using Error::Error;
};

struct ScenarioConfigError : Error {
    using Error::Error;
};

}  // namespace ig

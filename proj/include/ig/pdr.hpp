#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/crypto.hpp"
#include "ig/doc_check.hpp"
#include "ig/errors.hpp"
#include "ig/time_codec.hpp"
#include "ig/uint_decimal.hpp"

namespace ig {

// Policy Decision Record: a signed attestation that one specific intent
// (identified by its canonical hash) was evaluated under a named policy. The
// signature covers the canonical document with the policyEngineSignature
// member removed; everything else is tamper-evident.

inline constexpr std::string_view kPdrVersion = "1.0.0";
inline constexpr std::string_view kSignatureAlg = "ES256K";

enum class ModOp { Add, Replace, Remove };

inline std::string_view mod_op_name(ModOp op) {
    switch (op) {
        case ModOp::Add: return "ADD";
        case ModOp::Replace: return "REPLACE";
        default: return "REMOVE";
    }
}

struct Modification {
    std::string path;  // RFC 6901
    ModOp operation = ModOp::Replace;
    std::optional<json> value;  // absent for REMOVE

    bool operator==(const Modification&) const = default;
};

struct BoundConstraints {
    std::optional<UintDecimal> max_gas_price_wei;
    std::optional<UintDecimal> max_value_wei;
    std::optional<std::int64_t> tight_deadline;

    bool empty() const { return !max_gas_price_wei && !max_value_wei && !tight_deadline; }
    bool operator==(const BoundConstraints&) const = default;
};

enum class Outcome { Approved, Rejected };

struct Decision {
    Outcome outcome = Outcome::Rejected;
    std::string policy_id;
    std::optional<std::string> reason;
    std::optional<std::int64_t> risk_score_micro;  // riskScore * 1e6
    std::optional<BoundConstraints> bound_constraints;
    std::optional<std::vector<Modification>> modified_parameters;

    bool operator==(const Decision&) const = default;
};

struct SignatureInfo {
    SemanticAddress signer;
    std::optional<std::string> alg;
    std::string signature;  // 0x hex text; decoded lazily at verification

    bool operator==(const SignatureInfo&) const = default;
};

struct PolicyDecisionRecord {
    std::string version{kPdrVersion};
    std::string pdr_id;
    std::string issuer;
    std::optional<std::string> subject;
    std::string audience;
    std::int64_t issued_at = 0;   // unix seconds; rendered RFC 3339 Z
    std::int64_t expires_at = 0;  // exclusive
    Digest32 tis_hash;
    Decision decision;
    SignatureInfo signature;

    bool operator==(const PolicyDecisionRecord&) const = default;
};

// ---------------------------------------------------------------- document

namespace detail {

inline void check_bound_constraints(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"maxGasPriceWei", "maxValueWei", "tightDeadline"});
    if (auto it = j.find("maxGasPriceWei"); it != j.end())
        c.uint_string(*it, check::join(path, "maxGasPriceWei"));
    if (auto it = j.find("maxValueWei"); it != j.end())
        c.uint_string(*it, check::join(path, "maxValueWei"));
    if (auto it = j.find("tightDeadline"); it != j.end())
        c.integer(*it, check::join(path, "tightDeadline"), 0);
}

inline bool pointer_syntax_ok(std::string_view p) {
    return p.empty() || p.front() == '/';
}

inline void check_modification(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"path", "operation", "value"});
    if (const json* v = c.required(j, path, "path")) {
        if (c.string(*v, check::join(path, "path")) &&
            !pointer_syntax_ok(v->get_ref<const std::string&>()))
            c.fail(check::join(path, "path"), "not a valid JSON Pointer");
    }
    const json* op = c.required(j, path, "operation");
    if (!op) return;
    std::string op_path = check::join(path, "operation");
    if (!c.string(*op, op_path)) return;
    const auto& name = op->get_ref<const std::string&>();
    if (name != "ADD" && name != "REPLACE" && name != "REMOVE") {
        c.fail(op_path, "not one of [ADD, REPLACE, REMOVE]");
        return;
    }
    bool has_value = j.contains("value");
    if (name == "REMOVE" && has_value)
        c.fail(check::join(path, "value"), "REMOVE must not carry a value");
    if (name != "REMOVE" && !has_value)
        c.fail(check::join(path, "value"), name + " requires a value");
}

inline void check_decision(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"outcome", "policyId", "reason", "riskScore", "boundConstraints",
                             "modifiedParameters"});
    bool rejected = false;
    if (const json* v = c.required(j, path, "outcome")) {
        std::string opath = check::join(path, "outcome");
        if (c.string(*v, opath)) {
            const auto& s = v->get_ref<const std::string&>();
            if (s != "APPROVED" && s != "REJECTED")
                c.fail(opath, "not one of [APPROVED, REJECTED]");
            rejected = s == "REJECTED";
        }
    }
    if (const json* v = c.required(j, path, "policyId")) c.string(*v, check::join(path, "policyId"));
    if (auto it = j.find("reason"); it != j.end()) {
        c.string(*it, check::join(path, "reason"));
    } else if (rejected) {
        c.fail(check::join(path, "reason"), "REJECTED decisions must carry a reason");
    }
    if (auto it = j.find("riskScore"); it != j.end()) {
        std::string rpath = check::join(path, "riskScore");
        if (!it->is_number()) {
            c.fail(rpath, "expected a number");
        } else {
            double v = it->get<double>();
            if (v < 0.0 || v > 1.0) {
                c.fail(rpath, "riskScore out of range [0, 1]");
            } else if (!risk_micro_from_double(v)) {
                c.fail(rpath, "riskScore must be a decimal with at most 6 fractional digits");
            }
        }
    }
    if (auto it = j.find("boundConstraints"); it != j.end())
        check_bound_constraints(c, *it, check::join(path, "boundConstraints"));
    if (auto it = j.find("modifiedParameters"); it != j.end()) {
        std::string mpath = check::join(path, "modifiedParameters");
        if (!it->is_array()) {
            c.fail(mpath, "expected an array");
        } else {
            for (std::size_t i = 0; i < it->size(); ++i)
                check_modification(c, (*it)[i], mpath + "/" + std::to_string(i));
        }
    }
}

}  // namespace detail

/// Full schema conformance check plus the local strengthenings
/// (issuedAt < expiresAt, REJECTED => reason, riskScore decimal form,
/// modification value arity and pointer syntax).
inline std::vector<Finding> check_pdr_document(const json& doc) {
    check::Ctx c;
    if (!doc.is_object()) {
        c.fail("", "PDR document must be a JSON object");
        return c.out;
    }
    c.unknown_keys(doc, "", {"version", "pdrId", "issuer", "subject", "audience", "issuedAt",
                             "expiresAt", "tisHash", "decision", "policyEngineSignature"});
    if (const json* v = c.required(doc, "", "version")) {
        if (c.string(*v, "/version") && v->get_ref<const std::string&>() != kPdrVersion)
            c.fail("/version", "version must be \"1.0.0\"");
    }
    if (const json* v = c.required(doc, "", "pdrId")) c.uuid(*v, "/pdrId");
    if (const json* v = c.required(doc, "", "issuer")) c.string(*v, "/issuer");
    if (auto it = doc.find("subject"); it != doc.end()) c.string(*it, "/subject");
    if (const json* v = c.required(doc, "", "audience")) c.string(*v, "/audience");
    bool times_ok = true;
    if (const json* v = c.required(doc, "", "issuedAt")) times_ok &= c.rfc3339(*v, "/issuedAt");
    else times_ok = false;
    if (const json* v = c.required(doc, "", "expiresAt")) times_ok &= c.rfc3339(*v, "/expiresAt");
    else times_ok = false;
    if (times_ok) {
        auto ia = parse_rfc3339(doc["issuedAt"].get_ref<const std::string&>());
        auto ea = parse_rfc3339(doc["expiresAt"].get_ref<const std::string&>());
        if (*ia >= *ea) c.fail("/expiresAt", "expiresAt must be after issuedAt");
    }
    if (const json* v = c.required(doc, "", "tisHash")) {
        if (c.string(*v, "/tisHash") && !Digest32::is_digest_text(v->get_ref<const std::string&>()))
            c.fail("/tisHash", "does not match pattern ^0x[a-fA-F0-9]{64}$");
    }
    if (const json* v = c.required(doc, "", "decision")) detail::check_decision(c, *v, "/decision");
    if (const json* v = c.required(doc, "", "policyEngineSignature")) {
        std::string path = "/policyEngineSignature";
        if (c.object(*v, path)) {
            c.unknown_keys(*v, path, {"signer", "alg", "signature"});
            if (const json* f = c.required(*v, path, "signer"))
                c.address(*f, check::join(path, "signer"));
            if (auto it = v->find("alg"); it != v->end()) c.string(*it, check::join(path, "alg"));
            if (const json* f = c.required(*v, path, "signature")) {
                std::string spath = check::join(path, "signature");
                if (c.string(*f, spath)) {
                    const auto& s = f->get_ref<const std::string&>();
                    bool ok = s.size() >= 2 && s[0] == '0' && s[1] == 'x';
                    for (std::size_t i = 2; ok && i < s.size(); ++i)
                        ok = hex::is_hex_digit(s[i]);
                    if (!ok) c.fail(spath, "does not match pattern ^0x[a-fA-F0-9]+$");
                }
            }
        }
    }
    return c.out;
}

// ------------------------------------------------------------------- typed

inline PolicyDecisionRecord pdr_from_json(const json& doc) {
    PolicyDecisionRecord pdr;
    pdr.version = doc.at("version").get<std::string>();
    pdr.pdr_id = doc.at("pdrId").get<std::string>();
    pdr.issuer = doc.at("issuer").get<std::string>();
    if (auto it = doc.find("subject"); it != doc.end()) pdr.subject = it->get<std::string>();
    pdr.audience = doc.at("audience").get<std::string>();
    pdr.issued_at = *parse_rfc3339(doc.at("issuedAt").get_ref<const std::string&>());
    pdr.expires_at = *parse_rfc3339(doc.at("expiresAt").get_ref<const std::string&>());
    pdr.tis_hash = *Digest32::parse(doc.at("tisHash").get_ref<const std::string&>());
    const json& d = doc.at("decision");
    pdr.decision.outcome =
        d.at("outcome").get_ref<const std::string&>() == "APPROVED" ? Outcome::Approved
                                                                    : Outcome::Rejected;
    pdr.decision.policy_id = d.at("policyId").get<std::string>();
    if (auto it = d.find("reason"); it != d.end()) pdr.decision.reason = it->get<std::string>();
    if (auto it = d.find("riskScore"); it != d.end())
        pdr.decision.risk_score_micro = *risk_micro_from_double(it->get<double>());
    if (auto it = d.find("boundConstraints"); it != d.end()) {
        BoundConstraints bc;
        if (auto f = it->find("maxGasPriceWei"); f != it->end())
            bc.max_gas_price_wei = parse_uint_decimal(f->get_ref<const std::string&>());
        if (auto f = it->find("maxValueWei"); f != it->end())
            bc.max_value_wei = parse_uint_decimal(f->get_ref<const std::string&>());
        if (auto f = it->find("tightDeadline"); f != it->end())
            bc.tight_deadline = f->get<std::int64_t>();
        pdr.decision.bound_constraints = std::move(bc);
    }
    if (auto it = d.find("modifiedParameters"); it != d.end()) {
        std::vector<Modification> mods;
        for (const auto& m : *it) {
            Modification mod;
            mod.path = m.at("path").get<std::string>();
            const auto& op = m.at("operation").get_ref<const std::string&>();
            mod.operation = op == "ADD" ? ModOp::Add : op == "REPLACE" ? ModOp::Replace : ModOp::Remove;
            if (auto f = m.find("value"); f != m.end()) mod.value = *f;
            mods.push_back(std::move(mod));
        }
        pdr.decision.modified_parameters = std::move(mods);
    }
    const json& sig = doc.at("policyEngineSignature");
    pdr.signature.signer = *SemanticAddress::parse(sig.at("signer").get_ref<const std::string&>());
    if (auto it = sig.find("alg"); it != sig.end()) pdr.signature.alg = it->get<std::string>();
    pdr.signature.signature = sig.at("signature").get<std::string>();
    return pdr;
}

inline json to_json(const Decision& d) {
    json out{{"outcome", d.outcome == Outcome::Approved ? "APPROVED" : "REJECTED"},
             {"policyId", d.policy_id}};
    if (d.reason) out["reason"] = *d.reason;
    if (d.risk_score_micro)
        out["riskScore"] = static_cast<double>(*d.risk_score_micro) / 1e6;
    if (d.bound_constraints) {
        json bc = json::object();
        if (d.bound_constraints->max_gas_price_wei)
            bc["maxGasPriceWei"] = d.bound_constraints->max_gas_price_wei->str();
        if (d.bound_constraints->max_value_wei)
            bc["maxValueWei"] = d.bound_constraints->max_value_wei->str();
        if (d.bound_constraints->tight_deadline)
            bc["tightDeadline"] = *d.bound_constraints->tight_deadline;
        out["boundConstraints"] = std::move(bc);
    }
    if (d.modified_parameters) {
        json arr = json::array();
        for (const auto& m : *d.modified_parameters) {
            json mj{{"path", m.path}, {"operation", std::string(mod_op_name(m.operation))}};
            if (m.value) mj["value"] = *m.value;
            arr.push_back(std::move(mj));
        }
        out["modifiedParameters"] = std::move(arr);
    }
    return out;
}

inline json to_json(const PolicyDecisionRecord& pdr) {
    json doc{{"version", pdr.version},
             {"pdrId", pdr.pdr_id},
             {"issuer", pdr.issuer},
             {"audience", pdr.audience},
             {"issuedAt", format_rfc3339(pdr.issued_at)},
             {"expiresAt", format_rfc3339(pdr.expires_at)},
             {"tisHash", pdr.tis_hash.str()},
             {"decision", to_json(pdr.decision)}};
    if (pdr.subject) doc["subject"] = *pdr.subject;
    json sig{{"signer", pdr.signature.signer.str()}, {"signature", pdr.signature.signature}};
    if (pdr.signature.alg) sig["alg"] = *pdr.signature.alg;
    doc["policyEngineSignature"] = std::move(sig);
    return doc;
}

inline PolicyDecisionRecord parse_pdr_json(const json& doc) {
    auto findings = check_pdr_document(doc);
    if (!findings.empty()) throw SchemaViolation(std::move(findings));
    return pdr_from_json(doc);
}

inline PolicyDecisionRecord parse_pdr(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedJson("input is not well-formed JSON");
    return parse_pdr_json(doc);
}

inline std::string serialize_pdr(const PolicyDecisionRecord& pdr) {
    return canonicalize(to_json(pdr));
}

inline ValidationReport validate_pdr(const PolicyDecisionRecord& pdr) {
    return ValidationReport{check_pdr_document(to_json(pdr))};
}

/// Exact signing preimage: the canonical PDR document with the whole
/// policyEngineSignature member removed.
inline std::string pdr_signing_payload(const PolicyDecisionRecord& pdr) {
    json doc = to_json(pdr);
    doc.erase("policyEngineSignature");
    return canonicalize(doc);
}

inline Digest32 pdr_signing_digest(const PolicyDecisionRecord& pdr) {
    return keccak_digest(pdr_signing_payload(pdr));
}

/// Deterministic v4-format pdrId derived from the issuance tuple, so issuing
/// the same approval twice names the same record.
inline std::string derive_pdr_id(const Digest32& tis_hash, std::int64_t issued_at,
                                 std::int64_t ttl_seconds, std::string_view issuer,
                                 std::string_view audience) {
    std::vector<std::uint8_t> pre;
    const char tag[] = "tis-pdr-id-v1";
    pre.insert(pre.end(), tag, tag + 13);
    pre.insert(pre.end(), tis_hash.bytes.begin(), tis_hash.bytes.end());
    for (int shift = 56; shift >= 0; shift -= 8)
        pre.push_back(static_cast<std::uint8_t>(issued_at >> shift));
    for (int shift = 56; shift >= 0; shift -= 8)
        pre.push_back(static_cast<std::uint8_t>(ttl_seconds >> shift));
    pre.insert(pre.end(), issuer.begin(), issuer.end());
    pre.push_back(0x00);
    pre.insert(pre.end(), audience.begin(), audience.end());
    auto h = keccak::hash256(std::span<const std::uint8_t>(pre.data(), pre.size()));
    h[6] = static_cast<std::uint8_t>(0x40 | (h[6] & 0x0F));
    h[8] = static_cast<std::uint8_t>(0x80 | (h[8] & 0x3F));
    std::string hexstr = hex::encode(std::span<const std::uint8_t>(h.data(), 16));
    return hexstr.substr(0, 8) + "-" + hexstr.substr(8, 4) + "-" + hexstr.substr(12, 4) + "-" +
           hexstr.substr(16, 4) + "-" + hexstr.substr(20, 12);
}

/// Signs in place: sets signer/alg and the signature over the canonical
/// payload.
inline void sign_pdr(PolicyDecisionRecord& pdr, const Keypair& key) {
    pdr.signature.signer = key.address;
    pdr.signature.alg = std::string(kSignatureAlg);
    pdr.signature.signature = sign_digest(key, pdr_signing_digest(pdr)).str();
}

}  // namespace ig

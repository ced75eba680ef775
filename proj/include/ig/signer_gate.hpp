#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/intent.hpp"
#include "ig/pdr.hpp"

namespace ig {

// Executor boundary. Nothing executes unless signature, issuer trust,
// audience, time window, hash binding, decision outcome and replay checks
// all pass, in that order. Verification is pure; the nonce registry is the
// single point of mutation and is linearizable.

inline constexpr std::int64_t kIssuedAtSkewSeconds = 30;

struct TrustAnchors {
    std::map<std::string, SemanticAddress> issuers;
    std::string self_identity;
};

inline TrustAnchors anchors_from_json(const json& doc, std::string self_identity) {
    if (!doc.is_object() || !doc.contains("issuers"))
        throw SchemaViolation("", "anchors file requires an issuers map");
    TrustAnchors anchors;
    anchors.self_identity = std::move(self_identity);
    for (auto it = doc["issuers"].begin(); it != doc["issuers"].end(); ++it) {
        auto addr = SemanticAddress::parse(it.value().get<std::string>());
        if (!addr) throw SchemaViolation("/issuers/" + it.key(), "not an address");
        anchors.issuers.emplace(it.key(), *addr);
    }
    return anchors;
}

/// Replay scope key: the intent's requiredSigner, else the PDR subject, else
/// a fixed anonymous scope.
inline std::string replay_subject_key(const Intent& intent, const PolicyDecisionRecord& pdr) {
    if (intent.constraints.required_signer) return intent.constraints.required_signer->str();
    if (pdr.subject) return *pdr.subject;
    return "anonymous";
}

/// Once consumed, a pdrId or (subject, nonce) pair never frees up within the
/// registry's lifetime. Journal lines make refusals survive restarts.
class NonceRegistry {
public:
    NonceRegistry() = default;

    /// Attaches an append-only journal, replaying any existing lines so
    /// refusals survive restarts.
    void open_journal(const std::string& path) {
        std::lock_guard<std::mutex> lock(mutex_);
        journal_path_ = path;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) throw MalformedJson("registry journal line is not JSON: " + line);
            std::optional<UintDecimal> nonce;
            if (auto it = j.find("nonce"); it != j.end())
                nonce = parse_uint_decimal(it->get_ref<const std::string&>());
            insert_locked(j.at("subjectKey").get<std::string>(), nonce,
                          j.at("pdrId").get<std::string>());
        }
    }

    /// True and state updated iff neither the pdrId nor the (subject, nonce)
    /// pair was consumed before; otherwise false with no state change.
    bool consume(const std::string& subject_key, const std::optional<UintDecimal>& nonce,
                 const std::string& pdr_id, std::int64_t ts) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (is_consumed(subject_key, nonce, pdr_id)) return false;
        insert_locked(subject_key, nonce, pdr_id);
        if (journal_path_) {
            json j{{"subjectKey", subject_key}, {"pdrId", pdr_id}, {"ts", ts}};
            if (nonce) j["nonce"] = nonce->str();
            std::ofstream out(*journal_path_, std::ios::app);
            if (!out) throw Error("cannot append to registry journal: " + *journal_path_);
            out << canonicalize(j) << "\n";
        }
        return true;
    }

    bool would_refuse(const std::string& subject_key, const std::optional<UintDecimal>& nonce,
                      const std::string& pdr_id) const {
        std::lock_guard<std::mutex> lock(mutex_);
        return is_consumed(subject_key, nonce, pdr_id);
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return pdr_ids_.size() + pairs_.size();
    }

private:
    bool is_consumed(const std::string& subject_key, const std::optional<UintDecimal>& nonce,
                    const std::string& pdr_id) const {
        if (pdr_ids_.contains(pdr_id)) return true;
        return nonce && pairs_.contains({subject_key, nonce->str()});
    }

    void insert_locked(const std::string& subject_key, const std::optional<UintDecimal>& nonce,
                       const std::string& pdr_id) {
        pdr_ids_.insert(pdr_id);
        if (nonce) pairs_.insert({subject_key, nonce->str()});
    }

    mutable std::mutex mutex_;
    std::set<std::string> pdr_ids_;
    std::set<std::pair<std::string, std::string>> pairs_;
    std::optional<std::string> journal_path_;
};

enum class GateStep {
    Signature,
    IssuerTrust,
    Audience,
    TimeValidity,
    HashBinding,
    DecisionOutcome,
    Replay,
};

inline std::string_view gate_step_name(GateStep s) {
    switch (s) {
        case GateStep::Signature: return "Signature";
        case GateStep::IssuerTrust: return "IssuerTrust";
        case GateStep::Audience: return "Audience";
        case GateStep::TimeValidity: return "TimeValidity";
        case GateStep::HashBinding: return "HashBinding";
        case GateStep::DecisionOutcome: return "DecisionOutcome";
        case GateStep::Replay: return "Replay";
    }
    return "?";
}

struct StepResult {
    GateStep step;
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<StepResult> steps;
    bool ok = false;

    std::optional<GateStep> failed_step() const {
        for (const auto& s : steps)
            if (!s.pass) return s.step;
        return std::nullopt;
    }
};

inline json to_json(const VerificationReport& report) {
    json steps = json::array();
    for (const auto& s : report.steps)
        steps.push_back(json{{"check", std::string(gate_step_name(s.step))},
                             {"pass", s.pass},
                             {"detail", s.detail}});
    return json{{"steps", std::move(steps)}, {"outcome", report.ok ? "PASS" : "FAIL"}};
}

/// Ordered verification; short-circuits at the first failure but reports all
/// steps up to and including it. Pass a registry to make the Replay step
/// meaningful; without one it records a vacuous pass.
inline VerificationReport verify_pair(const Intent& intent, const PolicyDecisionRecord& pdr,
                                      const TrustAnchors& anchors, std::int64_t clock,
                                      const NonceRegistry* registry = nullptr) {
    VerificationReport report;
    auto step = [&](GateStep s, bool pass, std::string detail) {
        report.steps.push_back({s, pass, std::move(detail)});
        return pass;
    };

    // 1. signature over the canonical no-signature payload
    {
        bool pass = false;
        std::string detail;
        if (pdr.signature.alg && *pdr.signature.alg != kSignatureAlg) {
            detail = "unsupported alg '" + *pdr.signature.alg + "'";
        } else {
            try {
                Digest32 digest = pdr_signing_digest(pdr);
                pass = verify_signature(digest, pdr.signature.signature, pdr.signature.signer);
                detail = pass ? "signature matches signer " + pdr.signature.signer.str()
                              : "recovered signer does not match " + pdr.signature.signer.str();
            } catch (const MalformedSignature& e) {
                detail = std::string("malformed signature: ") + e.what();
            }
        }
        if (!step(GateStep::Signature, pass, detail)) return report;
    }
    // 2. issuer known and anchored to the signing address
    {
        auto it = anchors.issuers.find(pdr.issuer);
        bool pass = it != anchors.issuers.end() && it->second == pdr.signature.signer;
        std::string detail = it == anchors.issuers.end()
                                 ? "issuer '" + pdr.issuer + "' is not a trust anchor"
                                 : (pass ? "issuer anchored"
                                         : "anchored address " + it->second.str() +
                                               " differs from signer");
        if (!step(GateStep::IssuerTrust, pass, detail)) return report;
    }
    // 3. audience binding
    {
        bool pass = pdr.audience == anchors.self_identity;
        if (!step(GateStep::Audience, pass,
                  pass ? "audience matches" : "PDR audience '" + pdr.audience + "' is not us"))
            return report;
    }
    // 4. time window: issuedAt within skew, expiry exclusive
    {
        bool future = pdr.issued_at > clock + kIssuedAtSkewSeconds;
        bool expired = clock >= pdr.expires_at;
        bool pass = !future && !expired;
        std::string detail = future    ? "issuedAt is in the future beyond allowed skew"
                             : expired ? "PDR expired at " + format_rfc3339(pdr.expires_at)
                                       : "within validity window";
        if (!step(GateStep::TimeValidity, pass, detail)) return report;
    }
    // 5. hash binding: recompute from the presented TIS
    {
        Digest32 actual = intent_hash(intent);
        bool pass = actual == pdr.tis_hash;
        if (!step(GateStep::HashBinding, pass,
                  pass ? "tisHash matches canonical intent"
                       : "canonical intent hashes to " + actual.str() + ", PDR binds " +
                             pdr.tis_hash.str()))
            return report;
    }
    // 6. outcome
    {
        bool pass = pdr.decision.outcome == Outcome::Approved;
        if (!step(GateStep::DecisionOutcome, pass,
                  pass ? "decision is APPROVED"
                       : "decision is REJECTED" +
                             (pdr.decision.reason ? " (" + *pdr.decision.reason + ")" : "")))
            return report;
    }
    // 7. replay
    {
        bool pass = true;
        std::string detail = "replay not checked (no registry)";
        if (registry) {
            std::string key = replay_subject_key(intent, pdr);
            pass = !registry->would_refuse(key, intent.constraints.nonce, pdr.pdr_id);
            detail = pass ? "pdrId and nonce unseen"
                          : "pdrId or (subject, nonce) already consumed";
        }
        if (!step(GateStep::Replay, pass, detail)) return report;
    }
    report.ok = true;
    return report;
}

struct GateRefused : Error {
    VerificationReport report;
    explicit GateRefused(VerificationReport r)
        : Error("gate refused at " +
                std::string(r.failed_step() ? gate_step_name(*r.failed_step()) : "Unknown")),
          report(std::move(r)) {}
};

/// Applies policy-ordered RFC 6901 modifications and re-validates the result.
/// The replay nonce is off limits.
inline Intent apply_modifications(const Intent& intent, const std::vector<Modification>& mods) {
    json doc = to_json(intent);
    for (const Modification& mod : mods) {
        if (mod.path == "/constraints/nonce" || mod.path.starts_with("/constraints/nonce/"))
            throw PointerUnresolvable(mod.path, "modifying the replay nonce is forbidden");
        json patch = json::array();
        json op{{"op", mod.operation == ModOp::Add       ? "add"
                       : mod.operation == ModOp::Replace ? "replace"
                                                         : "remove"},
                {"path", mod.path}};
        if (mod.operation != ModOp::Remove) {
            if (!mod.value) throw PointerUnresolvable(mod.path, "modification lacks a value");
            op["value"] = *mod.value;
        }
        patch.push_back(std::move(op));
        try {
            doc = doc.patch(patch);
        } catch (const json::exception& e) {
            throw PointerUnresolvable(mod.path, e.what());
        }
    }
    auto findings = check_intent_document(doc);
    if (!findings.empty()) throw ResultInvalid(std::move(findings));
    return intent_from_json(doc);
}

struct ExecutionEnvelope {
    Intent intent;  // post-modification
    std::optional<UintDecimal> effective_max_gas_price_wei;
    std::int64_t effective_deadline = 0;
    std::optional<UintDecimal> effective_max_value_wei;
    std::string pdr_id;
    std::string issuer;
    std::int64_t authorized_at = 0;
    Digest32 original_tis_hash;
};

inline json to_json(const ExecutionEnvelope& env) {
    json j{{"intent", to_json(env.intent)},
           {"effectiveDeadline", env.effective_deadline},
           {"pdrId", env.pdr_id},
           {"issuer", env.issuer},
           {"authorizedAt", env.authorized_at},
           {"originalTisHash", env.original_tis_hash.str()}};
    if (env.effective_max_gas_price_wei)
        j["effectiveMaxGasPriceWei"] = env.effective_max_gas_price_wei->str();
    if (env.effective_max_value_wei)
        j["effectiveMaxValueWei"] = env.effective_max_value_wei->str();
    return j;
}

/// Append-only JSON-lines sink; one record per gate call.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::string path) : path_(std::move(path)) {}

    void append(const json& record) {
        std::lock_guard<std::mutex> lock(mutex_);
        records_.push_back(record);
        if (path_) {
            std::ofstream out(*path_, std::ios::app);
            if (!out) throw Error("cannot append to audit log: " + *path_);
            out << canonicalize(record) << "\n";
        }
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return records_.size();
    }
    std::vector<json> records() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return records_;
    }

private:
    mutable std::mutex mutex_;
    std::vector<json> records_;
    std::optional<std::string> path_;
};

namespace detail {

inline void audit_gate(AuditLog* audit, std::int64_t clock, const PolicyDecisionRecord& pdr,
                       bool pass, const std::string& failed_step) {
    if (!audit) return;
    json record{{"ts", clock},
                {"pdrId", pdr.pdr_id},
                {"tisHash", pdr.tis_hash.str()},
                {"outcome", pass ? "EXECUTED" : "REFUSED"},
                {"issuer", pdr.issuer}};
    if (!pass) record["failedStep"] = failed_step;
    audit->append(record);
}

}  // namespace detail

/// Full gate: verify, apply modifications, tighten limits, consume replay
/// state atomically with success. A refused call leaves the registry
/// untouched and still audits.
inline ExecutionEnvelope gate(const Intent& intent, const PolicyDecisionRecord& pdr,
                              const TrustAnchors& anchors, NonceRegistry& registry,
                              std::int64_t clock, AuditLog* audit = nullptr) {
    VerificationReport report = verify_pair(intent, pdr, anchors, clock, &registry);
    if (!report.ok) {
        detail::audit_gate(audit, clock, pdr, false,
                           std::string(gate_step_name(*report.failed_step())));
        throw GateRefused(std::move(report));
    }

    Intent effective = intent;
    try {
        if (pdr.decision.modified_parameters && !pdr.decision.modified_parameters->empty())
            effective = apply_modifications(intent, *pdr.decision.modified_parameters);
    } catch (...) {
        detail::audit_gate(audit, clock, pdr, false, "Modifications");
        throw;
    }

    ExecutionEnvelope env;
    env.intent = std::move(effective);
    env.pdr_id = pdr.pdr_id;
    env.issuer = pdr.issuer;
    env.authorized_at = clock;
    env.original_tis_hash = pdr.tis_hash;
    env.effective_deadline = env.intent.constraints.deadline;
    const BoundConstraints* bc =
        pdr.decision.bound_constraints ? &*pdr.decision.bound_constraints : nullptr;
    if (bc && bc->tight_deadline)
        env.effective_deadline = std::min(env.effective_deadline, *bc->tight_deadline);
    {
        const auto& intent_gas = env.intent.constraints.max_gas_price_wei;
        const auto* pdr_gas = bc && bc->max_gas_price_wei ? &*bc->max_gas_price_wei : nullptr;
        if (intent_gas && pdr_gas)
            env.effective_max_gas_price_wei = UintDecimal::min(*intent_gas, *pdr_gas);
        else if (intent_gas)
            env.effective_max_gas_price_wei = *intent_gas;
        else if (pdr_gas)
            env.effective_max_gas_price_wei = *pdr_gas;
    }
    {
        const UintDecimal* intent_value = nullptr;
        if (const Delegate* d = std::get_if<Delegate>(&env.intent.action))
            if (d->scope.max_value_wei) intent_value = &*d->scope.max_value_wei;
        const auto* pdr_value = bc && bc->max_value_wei ? &*bc->max_value_wei : nullptr;
        if (intent_value && pdr_value)
            env.effective_max_value_wei = UintDecimal::min(*intent_value, *pdr_value);
        else if (intent_value)
            env.effective_max_value_wei = *intent_value;
        else if (pdr_value)
            env.effective_max_value_wei = *pdr_value;
    }

    // original intent decides the replay scope; the nonce cannot be modified
    std::string key = replay_subject_key(intent, pdr);
    if (!registry.consume(key, intent.constraints.nonce, pdr.pdr_id, clock)) {
        report.ok = false;
        report.steps.push_back({GateStep::Replay, false, "consumed concurrently"});
        detail::audit_gate(audit, clock, pdr, false, "Replay");
        throw GateRefused(std::move(report));
    }
    detail::audit_gate(audit, clock, pdr, true, {});
    return env;
}

}  // namespace ig

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/legacy_intent.hpp"
#include "ig/mock_ledger.hpp"
#include "ig/policy.hpp"
#include "ig/signer_gate.hpp"

namespace ig {

// End-to-end planner -> verifier -> executor harness over the mock ledger.
// Clocks are scripted, never wall time, so transcripts are byte-identical
// across runs.

enum class Stage {
    Observe,
    ConstructTis,
    PolicyEval,
    PdrIssued,
    GateVerify,
    Execute,
    VerifyState,
};

inline std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::Observe: return "OBSERVE";
        case Stage::ConstructTis: return "CONSTRUCT_TIS";
        case Stage::PolicyEval: return "POLICY_EVAL";
        case Stage::PdrIssued: return "PDR_ISSUED";
        case Stage::GateVerify: return "GATE_VERIFY";
        case Stage::Execute: return "EXECUTE";
        case Stage::VerifyState: return "VERIFY_STATE";
    }
    return "?";
}

struct TranscriptEvent {
    Stage stage;
    std::string detail;
    std::int64_t ts = 0;
};

struct PipelineTranscript {
    std::string name;
    std::vector<TranscriptEvent> events;
    bool executed = false;
    std::optional<Stage> refused_at;
};

inline json to_json(const PipelineTranscript& t) {
    json events = json::array();
    for (const auto& e : t.events)
        events.push_back(json{{"stage", std::string(stage_name(e.stage))},
                              {"detail", e.detail},
                              {"ts", e.ts}});
    json summary{{"name", t.name},
                 {"outcome", t.executed
                                 ? std::string("EXECUTED")
                                 : "REFUSED_AT(" +
                                       std::string(t.refused_at ? stage_name(*t.refused_at) : "?") +
                                       ")"}};
    return json{{"events", std::move(events)}, {"summary", std::move(summary)}};
}

class ClockScript {
public:
    explicit ClockScript(std::vector<std::int64_t> stamps) : stamps_(std::move(stamps)) {
        if (stamps_.empty()) throw ScenarioConfigError("clock script must not be empty");
    }
    std::int64_t next() {
        std::int64_t v = stamps_[cursor_ < stamps_.size() ? cursor_ : stamps_.size() - 1];
        ++cursor_;
        return v;
    }

private:
    std::vector<std::int64_t> stamps_;
    std::size_t cursor_ = 0;
};

struct ScenarioIssuer {
    std::string id;
    Keypair key;
    std::string audience;
    std::int64_t ttl_seconds = 300;
};

struct ScenarioSpec {
    std::string name;
    json intent_doc;
    bool legacy = false;
    std::int64_t default_chain_id = 1;
    PolicySet policy;
    ScenarioIssuer issuer;
    TrustAnchors anchors;
    std::string sender;
    std::optional<std::string> pool;
    std::vector<std::int64_t> clock;
    std::optional<std::pair<std::string, json>> tamper;  // pointer -> new value
    bool replay = false;
};

namespace detail {

inline TranscriptEvent event(Stage stage, std::int64_t ts, std::string detail) {
    return TranscriptEvent{stage, std::move(detail), ts};
}

}  // namespace detail

/// One pass through the full pipeline. The caller owns ledger/context/
/// registry so replayed attempts and multi-scenario suites can share state.
inline PipelineTranscript run_scenario(const ScenarioSpec& spec, MockLedger& ledger,
                                       EvaluationContext& ctx, NonceRegistry& registry,
                                       AuditLog* audit = nullptr) {
    if (spec.anchors.issuers.find(spec.issuer.id) == spec.anchors.issuers.end())
        throw ScenarioConfigError("issuer '" + spec.issuer.id + "' is not anchored");
    if (spec.anchors.issuers.at(spec.issuer.id) != spec.issuer.key.address)
        throw ScenarioConfigError("anchored address does not match the issuer key");

    PipelineTranscript t;
    t.name = spec.name;
    ClockScript clock(spec.clock);

    auto refuse = [&](Stage stage) {
        t.executed = false;
        t.refused_at = stage;
        return t;
    };

    std::int64_t ts = clock.next();
    ledger.advance_time(ts);
    t.events.push_back(detail::event(Stage::Observe, ts,
                                     "ledger at block time " + std::to_string(ledger.block_time())));

    ts = clock.next();
    Intent intent;
    try {
        intent = spec.legacy ? normalize_legacy_intent(spec.intent_doc,
                                                       LegacyOptions{spec.default_chain_id})
                             : parse_intent_json(spec.intent_doc);
    } catch (const Error& e) {
        t.events.push_back(detail::event(Stage::ConstructTis, ts,
                                         std::string("intent rejected: ") + e.what()));
        return refuse(Stage::ConstructTis);
    }
    t.events.push_back(detail::event(Stage::ConstructTis, ts, render_preview(intent)));

    ts = clock.next();
    ctx.clock = ts;
    Decision decision = evaluate(intent, spec.policy, ctx);
    if (decision.outcome == Outcome::Rejected) {
        t.events.push_back(detail::event(Stage::PolicyEval, ts,
                                         "REJECTED: " + decision.reason.value_or("(no reason)")));
        return refuse(Stage::PolicyEval);
    }
    t.events.push_back(detail::event(Stage::PolicyEval, ts,
                                     "APPROVED under policy " + decision.policy_id));

    ts = clock.next();
    ctx.clock = ts;
    PolicyDecisionRecord pdr = issue_pdr(intent, decision, spec.issuer.key, spec.issuer.id,
                                         spec.issuer.audience, spec.issuer.ttl_seconds, ctx);
    t.events.push_back(detail::event(Stage::PdrIssued, ts,
                                     "pdr " + pdr.pdr_id + " expires " +
                                         format_rfc3339(pdr.expires_at)));

    Intent presented = intent;
    if (spec.tamper) {
        json doc = to_json(intent);
        try {
            doc[json::json_pointer(spec.tamper->first)] = spec.tamper->second;
        } catch (const json::exception& e) {
            throw ScenarioConfigError(std::string("tamper pointer invalid: ") + e.what());
        }
        auto findings = check_intent_document(doc);
        if (!findings.empty())
            throw ScenarioConfigError("tampered intent no longer parses: " + describe(findings));
        presented = intent_from_json(doc);
    }

    ts = clock.next();
    std::optional<ExecutionEnvelope> env;
    try {
        env = gate(presented, pdr, spec.anchors, registry, ts, audit);
    } catch (const GateRefused& e) {
        auto failed = e.report.failed_step();
        t.events.push_back(detail::event(
            Stage::GateVerify, ts,
            "refused at " + std::string(failed ? gate_step_name(*failed) : "Unknown")));
        return refuse(Stage::GateVerify);
    }
    t.events.push_back(detail::event(Stage::GateVerify, ts,
                                     "all checks passed (single-key gate stands in for the "
                                     "user-approval signing step)"));

    ts = clock.next();
    ledger.advance_time(ts);
    json receipt;
    try {
        receipt = ledger.execute_envelope(*env, MockLedger::Execution{spec.sender, spec.pool});
    } catch (const Error& e) {
        t.events.push_back(detail::event(Stage::Execute, ts, std::string("failed: ") + e.what()));
        return refuse(Stage::Execute);
    }
    record_spend(ctx, env->intent, ts);
    t.events.push_back(detail::event(Stage::Execute, ts, "receipt " + canonicalize(receipt)));

    ts = clock.next();
    t.events.push_back(detail::event(Stage::VerifyState, ts,
                                     std::to_string(ledger.receipts().size()) +
                                         " receipt(s); post-state " +
                                         canonicalize(ledger.snapshot()["balances"])));
    t.executed = true;
    return t;
}

/// Re-presents an already-gated (TIS, PDR) pair; used by replay scenarios.
inline PipelineTranscript replay_attempt(const ScenarioSpec& spec, const Intent& intent,
                                         const PolicyDecisionRecord& pdr, MockLedger& ledger,
                                         NonceRegistry& registry, std::int64_t ts,
                                         AuditLog* audit = nullptr) {
    PipelineTranscript t;
    t.name = spec.name + " (replay)";
    try {
        ExecutionEnvelope env = gate(intent, pdr, spec.anchors, registry, ts, audit);
        ledger.advance_time(ts);
        ledger.execute_envelope(env, MockLedger::Execution{spec.sender, spec.pool});
        t.events.push_back(detail::event(Stage::GateVerify, ts, "unexpectedly passed"));
        t.executed = true;
    } catch (const GateRefused& e) {
        auto failed = e.report.failed_step();
        t.events.push_back(detail::event(
            Stage::GateVerify, ts,
            "refused at " + std::string(failed ? gate_step_name(*failed) : "Unknown")));
        t.executed = false;
        t.refused_at = Stage::GateVerify;
    }
    return t;
}

// ------------------------------------------------------------ subscription

inline constexpr std::int64_t kThirtyDays = 30 * 86400;

/// Recurring payment loop. Produces one EXECUTED
/// transcript per month, then an injected day-29 attempt (cadence refusal)
/// and an over-cap attempt (per-transaction cap refusal) when configured.
struct SubscriptionSpec {
    PolicySet policy;
    int months = 3;
    Token token{1,
                *SemanticAddress::parse("0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48"),
                "USDC",
                6};
    SemanticAddress service = *SemanticAddress::parse("0x000000000000000000000000000000000000beef");
    std::string sender = "0x000000000000000000000000000000000000a9e7";
    std::string originator = "subscription:stream-svc";
    UintDecimal amount = *UintDecimal::from_string("10000000");
    std::int64_t start = 1767225600;  // first billing instant
    std::int64_t step_seconds = kThirtyDays;
    bool inject_early_attempt = true;
    std::optional<UintDecimal> inject_overcap_amount;
    ScenarioIssuer issuer;
    TrustAnchors anchors;
};

namespace detail {

inline Intent subscription_intent(const SubscriptionSpec& spec, int sequence, std::int64_t ts,
                                  const UintDecimal& amount) {
    Intent intent;
    intent.intent_id = derive_pdr_id(keccak_digest("billing-cycle-" + std::to_string(sequence) +
                                                   "@" + std::to_string(ts)),
                                     ts, sequence + 1, spec.originator, spec.service.str());
    Metadata md;
    md.originator = spec.originator;
    intent.metadata = md;
    Transfer transfer;
    transfer.token = spec.token;
    transfer.to = spec.service;
    transfer.amount = amount;
    transfer.memo = "billing cycle " + std::to_string(sequence);
    intent.action = transfer;
    intent.constraints.deadline = ts + 3600;
    intent.constraints.nonce = UintDecimal::from_u64(static_cast<std::uint64_t>(sequence));
    return intent;
}

}  // namespace detail

inline std::vector<PipelineTranscript> run_subscription_loop(const SubscriptionSpec& spec,
                                                             MockLedger& ledger,
                                                             EvaluationContext& ctx,
                                                             NonceRegistry& registry,
                                                             AuditLog* audit = nullptr) {
    if (spec.months < 1) throw ScenarioConfigError("months must be >= 1");
    std::vector<PipelineTranscript> out;
    auto attempt = [&](int sequence, std::int64_t ts, const UintDecimal& amount,
                       const std::string& label) {
        ScenarioSpec run;
        run.name = label;
        run.intent_doc = to_json(detail::subscription_intent(spec, sequence, ts, amount));
        run.policy = spec.policy;
        run.issuer = spec.issuer;
        run.anchors = spec.anchors;
        run.sender = spec.sender;
        // execution lands on the billing instant itself so the next cycle's
        // cadence check measures exactly one step
        run.clock = {ts, ts, ts, ts, ts, ts, ts};
        out.push_back(run_scenario(run, ledger, ctx, registry, audit));
    };

    std::int64_t ts = spec.start;
    for (int m = 1; m <= spec.months; ++m) {
        attempt(m, ts, spec.amount, "billing month " + std::to_string(m));
        ts += spec.step_seconds;
    }
    std::int64_t last_paid = ts - spec.step_seconds;
    if (spec.inject_early_attempt)
        attempt(spec.months + 1, last_paid + 29 * 86400, spec.amount, "early attempt (day 29)");
    if (spec.inject_overcap_amount)
        attempt(spec.months + 2, last_paid + 31 * 86400, *spec.inject_overcap_amount,
                "over-cap attempt");
    return out;
}

// ------------------------------------------------------------ file loading

inline ScenarioSpec scenario_from_json(const json& doc, const std::string& base_dir = ".") {
    if (!doc.is_object()) throw ScenarioConfigError("scenario must be a JSON object");
    ScenarioSpec spec;
    spec.name = doc.value("name", std::string("scenario"));
    if (doc.contains("legacyIntent")) {
        spec.intent_doc = doc["legacyIntent"];
        spec.legacy = true;
    } else if (doc.contains("intent")) {
        spec.intent_doc = doc["intent"];
    } else {
        throw ScenarioConfigError("scenario requires `intent` or `legacyIntent`");
    }
    spec.default_chain_id = doc.value("defaultChainId", std::int64_t{1});
    if (doc.contains("policy"))
        spec.policy = policy_from_json(doc["policy"]);
    else if (doc.contains("policyFile"))
        spec.policy = load_policy_file(base_dir + "/" + doc["policyFile"].get<std::string>());
    else
        throw ScenarioConfigError("scenario requires `policy` or `policyFile`");
    if (!doc.contains("issuer")) throw ScenarioConfigError("scenario requires `issuer`");
    const json& issuer = doc["issuer"];
    try {
        spec.issuer.id = issuer.at("id").get<std::string>();
        spec.issuer.key = keygen_from_hex(issuer.at("seed").get<std::string>());
        spec.issuer.audience = issuer.at("audience").get<std::string>();
        spec.issuer.ttl_seconds = issuer.value("ttlSeconds", std::int64_t{300});
    } catch (const json::exception& e) {
        throw ScenarioConfigError(std::string("malformed issuer: ") + e.what());
    }
    if (!doc.contains("sender") || !doc["sender"].is_string())
        throw ScenarioConfigError("scenario requires a `sender` account");
    spec.sender = doc["sender"].get<std::string>();
    if (doc.contains("pool")) spec.pool = doc["pool"].get<std::string>();
    if (!doc.contains("clock") || !doc["clock"].is_array() || doc["clock"].empty())
        throw ScenarioConfigError("scenario requires a non-empty `clock` script");
    for (const auto& ts : doc["clock"]) spec.clock.push_back(ts.get<std::int64_t>());
    if (doc.contains("anchors")) {
        spec.anchors = anchors_from_json(doc["anchors"],
                                         doc["anchors"].value("identity", spec.issuer.audience));
    } else {
        spec.anchors.self_identity = spec.issuer.audience;
        spec.anchors.issuers.emplace(spec.issuer.id, spec.issuer.key.address);
    }
    if (doc.contains("tamper")) {
        const json& t = doc["tamper"];
        if (!t.is_object() || !t.contains("path") || !t.contains("value"))
            throw ScenarioConfigError("tamper requires {path, value}");
        spec.tamper = {t["path"].get<std::string>(), t["value"]};
    }
    spec.replay = doc.value("replay", false);
    return spec;
}

inline MockLedger ledger_from_json(const json& doc) {
    MockLedger ledger;
    if (!doc.is_object()) return ledger;
    if (doc.contains("blockTime")) ledger.advance_time(doc["blockTime"].get<std::int64_t>());
    if (auto it = doc.find("balances"); it != doc.end()) {
        for (const auto& row : *it) {
            auto amount = UintDecimal::from_string(row.at("amount").get<std::string>());
            if (!amount) throw ScenarioConfigError("ledger balance amount is not a decimal");
            ledger.mint(row.at("account").get<std::string>(),
                        {row.at("token").at("chainId").get<std::int64_t>(),
                         row.at("token").at("address").get<std::string>()},
                        *amount);
        }
    }
    return ledger;
}

struct ScenarioOutcome {
    std::vector<PipelineTranscript> transcripts;
    json ledger_snapshot;
    std::size_t audit_records = 0;
};

/// Loads and runs a scenario document end to end (including the optional
/// replayed second presentation).
inline ScenarioOutcome run_scenario_document(const json& doc, const std::string& base_dir = ".") {
    ScenarioSpec spec = scenario_from_json(doc, base_dir);
    MockLedger ledger =
        doc.contains("ledger") ? ledger_from_json(doc["ledger"]) : MockLedger{};
    EvaluationContext ctx;
    NonceRegistry registry;
    AuditLog audit;
    ScenarioOutcome outcome;
    outcome.transcripts.push_back(run_scenario(spec, ledger, ctx, registry, &audit));
    if (spec.replay && outcome.transcripts.back().executed) {
        // rebuild the exact pair and present it again
        Intent intent = spec.legacy
                            ? normalize_legacy_intent(spec.intent_doc,
                                                      LegacyOptions{spec.default_chain_id})
                            : parse_intent_json(spec.intent_doc);
        ClockScript clock(spec.clock);
        std::int64_t eval_ts = 0;
        for (int i = 0; i < 3; ++i) eval_ts = clock.next();
        std::int64_t issue_ts = clock.next();
        std::int64_t gate_ts = clock.next();
        EvaluationContext issue_ctx;
        issue_ctx.clock = issue_ts;
        EvaluationContext eval_ctx;
        eval_ctx.clock = eval_ts;
        Decision decision = evaluate(intent, spec.policy, eval_ctx);
        PolicyDecisionRecord pdr = issue_pdr(intent, decision, spec.issuer.key, spec.issuer.id,
                                             spec.issuer.audience, spec.issuer.ttl_seconds,
                                             issue_ctx);
        outcome.transcripts.push_back(
            replay_attempt(spec, intent, pdr, ledger, registry, gate_ts, &audit));
    }
    outcome.ledger_snapshot = ledger.snapshot();
    outcome.audit_records = audit.size();
    return outcome;
}

}  // namespace ig

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/intent.hpp"
#include "ig/pdr.hpp"

namespace ig {

// The verifier of the reference architecture: evaluates an Intent against an
// ordered rule set under an injected clock and spend history, and issues
// signed PDRs. Combination is deny-overrides on top of default-deny: an
// empty rule list approves nothing.

using TokenKey = std::pair<std::int64_t, std::string>;

inline TokenKey token_key(const Token& t) { return t.key(); }

struct ActionAllowlist {
    std::set<ActionType> types;
};
struct RecipientAllowlist {
    std::set<std::string> addresses;  // canonical lowercase
};
struct TokenAllowlist {
    std::set<TokenKey> tokens;
};
struct PerTxCap {
    TokenKey token;
    UintDecimal max_amount;
};
struct WindowCap {
    TokenKey token;
    UintDecimal max_amount;
    std::int64_t window_seconds = 1;
};
struct CadenceMin {
    std::int64_t min_seconds_between = 1;
    std::string scope_key;
};
struct DeadlineMax {
    std::int64_t max_seconds_ahead = 1;
};
struct GasCeiling {
    UintDecimal max_gas_price_wei;
};
struct DelegateScopeGuard {
    std::int64_t max_contracts = 0;
    UintDecimal max_value_wei;
    std::int64_t max_validity_seconds = 0;
};
struct RequireSigner {
    SemanticAddress address;
};

using PolicyRule = std::variant<ActionAllowlist, RecipientAllowlist, TokenAllowlist, PerTxCap,
                                WindowCap, CadenceMin, DeadlineMax, GasCeiling,
                                DelegateScopeGuard, RequireSigner>;

inline std::string_view rule_name(const PolicyRule& rule) {
    struct Namer {
        std::string_view operator()(const ActionAllowlist&) { return "ActionAllowlist"; }
        std::string_view operator()(const RecipientAllowlist&) { return "RecipientAllowlist"; }
        std::string_view operator()(const TokenAllowlist&) { return "TokenAllowlist"; }
        std::string_view operator()(const PerTxCap&) { return "PerTxCap"; }
        std::string_view operator()(const WindowCap&) { return "WindowCap"; }
        std::string_view operator()(const CadenceMin&) { return "CadenceMin"; }
        std::string_view operator()(const DeadlineMax&) { return "DeadlineMax"; }
        std::string_view operator()(const GasCeiling&) { return "GasCeiling"; }
        std::string_view operator()(const DelegateScopeGuard&) { return "DelegateScopeGuard"; }
        std::string_view operator()(const RequireSigner&) { return "RequireSigner"; }
    };
    return std::visit(Namer{}, rule);
}

// Named predicates that contribute to riskScore without blocking approval.
struct AdvisorySignal {
    enum class Kind { AmountAtLeast, DeadlineWithin, ActionIs };
    std::string name;
    Kind kind = Kind::ActionIs;
    std::optional<TokenKey> token;        // AmountAtLeast
    std::optional<UintDecimal> threshold;  // AmountAtLeast
    std::int64_t seconds = 0;              // DeadlineWithin
    std::optional<ActionType> action;      // ActionIs
};

struct PolicySet {
    std::string policy_id;
    std::vector<PolicyRule> rules;
    std::vector<AdvisorySignal> advisory_signals;
};

struct SpendEvent {
    std::string scope_key;
    std::optional<TokenKey> token;
    std::optional<UintDecimal> amount;
    std::int64_t ts = 0;
};

/// Mutable evaluation state. evaluate() never touches it; record_spend() is
/// the single writer and callers serialize writers per subject.
struct EvaluationContext {
    std::int64_t clock = 0;
    std::vector<SpendEvent> spend_ledger;
    std::map<std::string, std::int64_t> last_action_at;
};

/// Scope key an intent's spends are accounted under; mirrors the signer-gate
/// replay subject key.
inline std::string intent_scope_key(const Intent& intent) {
    if (intent.metadata && intent.metadata->originator) return *intent.metadata->originator;
    if (intent.constraints.required_signer) return intent.constraints.required_signer->str();
    return "anonymous";
}

/// (token, amount) the intent spends, if its action spends at all.
inline std::optional<std::pair<TokenKey, UintDecimal>> intent_spend(const Intent& intent) {
    if (const Swap* s = std::get_if<Swap>(&intent.action))
        return std::pair{token_key(s->token_in), s->amount_in};
    if (const Transfer* t = std::get_if<Transfer>(&intent.action))
        return std::pair{token_key(t->token), t->amount};
    return std::nullopt;
}

namespace detail {

// nullopt = pass; string = failure detail
using RuleOutcome = std::optional<std::string>;

struct RuleEval {
    const Intent& intent;
    const EvaluationContext& ctx;

    RuleOutcome operator()(const ActionAllowlist& r) const {
        ActionType t = action_type(intent.action);
        if (r.types.contains(t)) return std::nullopt;
        return "action " + std::string(action_type_name(t)) + " is not allowlisted";
    }

    RuleOutcome operator()(const RecipientAllowlist& r) const {
        std::optional<std::string> recipient;
        if (const Transfer* t = std::get_if<Transfer>(&intent.action)) recipient = t->to.str();
        else if (const Swap* s = std::get_if<Swap>(&intent.action)) {
            if (s->recipient) recipient = s->recipient->str();
        } else if (const Delegate* d = std::get_if<Delegate>(&intent.action))
            recipient = d->delegatee.str();
        if (!recipient) return std::nullopt;  // no recipient to constrain
        if (r.addresses.contains(*recipient)) return std::nullopt;
        return "recipient " + *recipient + " is not allowlisted";
    }

    RuleOutcome operator()(const TokenAllowlist& r) const {
        auto miss = [&](const Token& t) -> RuleOutcome {
            if (r.tokens.contains(token_key(t))) return std::nullopt;
            return "token " + t.address.str() + " on chain " + std::to_string(t.chain_id) +
                   " is not allowlisted";
        };
        if (const Swap* s = std::get_if<Swap>(&intent.action)) {
            if (auto m = miss(s->token_in)) return m;
            return miss(s->token_out);
        }
        if (const Transfer* t = std::get_if<Transfer>(&intent.action)) return miss(t->token);
        return std::nullopt;
    }

    RuleOutcome operator()(const PerTxCap& r) const {
        auto spend = intent_spend(intent);
        if (!spend || spend->first != r.token) return std::nullopt;
        if (spend->second <= r.max_amount) return std::nullopt;
        return "amount " + spend->second.str() + " exceeds per-transaction cap " +
               r.max_amount.str();
    }

    RuleOutcome operator()(const WindowCap& r) const {
        auto spend = intent_spend(intent);
        if (!spend || spend->first != r.token) return std::nullopt;
        UintDecimal total = spend->second;
        for (const SpendEvent& ev : ctx.spend_ledger) {
            if (!ev.token || !ev.amount || *ev.token != r.token) continue;
            if (ctx.clock - ev.ts < r.window_seconds) total = total + *ev.amount;
        }
        if (total <= r.max_amount) return std::nullopt;
        return "window total " + total.str() + " exceeds cap " + r.max_amount.str() + " over " +
               std::to_string(r.window_seconds) + "s";
    }

    RuleOutcome operator()(const CadenceMin& r) const {
        auto it = ctx.last_action_at.find(r.scope_key);
        if (it == ctx.last_action_at.end()) return std::nullopt;
        if (ctx.clock - it->second >= r.min_seconds_between) return std::nullopt;
        return "scope '" + r.scope_key + "' acted " + std::to_string(ctx.clock - it->second) +
               "s ago, minimum interval is " + std::to_string(r.min_seconds_between) + "s";
    }

    RuleOutcome operator()(const DeadlineMax& r) const {
        std::int64_t deadline = intent.constraints.deadline;
        if (deadline < ctx.clock) return "intent deadline is already in the past";
        if (deadline > ctx.clock + r.max_seconds_ahead)
            return "deadline " + std::to_string(deadline) + " is more than " +
                   std::to_string(r.max_seconds_ahead) + "s ahead";
        return std::nullopt;
    }

    RuleOutcome operator()(const GasCeiling&) const {
        return std::nullopt;  // never blocks; surfaces as a bound constraint
    }

    RuleOutcome operator()(const DelegateScopeGuard& r) const {
        const Delegate* d = std::get_if<Delegate>(&intent.action);
        if (!d) return std::nullopt;
        std::size_t contracts = d->scope.contracts ? d->scope.contracts->size() : 0;
        if (static_cast<std::int64_t>(contracts) > r.max_contracts)
            return "delegation covers " + std::to_string(contracts) + " contracts, limit " +
                   std::to_string(r.max_contracts);
        if (!d->scope.max_value_wei) return "delegation has no value bound";
        if (r.max_value_wei < *d->scope.max_value_wei)
            return "delegation value bound " + d->scope.max_value_wei->str() + " exceeds " +
                   r.max_value_wei.str();
        if (!d->scope.valid_until) return "delegation has no expiry";
        if (*d->scope.valid_until - ctx.clock > r.max_validity_seconds)
            return "delegation validity exceeds " + std::to_string(r.max_validity_seconds) + "s";
        return std::nullopt;
    }

    RuleOutcome operator()(const RequireSigner& r) const {
        if (intent.constraints.required_signer && *intent.constraints.required_signer == r.address)
            return std::nullopt;
        return "intent does not require signer " + r.address.str();
    }
};

inline bool signal_triggered(const AdvisorySignal& s, const Intent& intent,
                             const EvaluationContext& ctx) {
    switch (s.kind) {
        case AdvisorySignal::Kind::AmountAtLeast: {
            auto spend = intent_spend(intent);
            return spend && s.token && spend->first == *s.token && s.threshold &&
                   !(spend->second < *s.threshold);
        }
        case AdvisorySignal::Kind::DeadlineWithin:
            return intent.constraints.deadline - ctx.clock < s.seconds;
        case AdvisorySignal::Kind::ActionIs:
            return s.action && action_type(intent.action) == *s.action;
    }
    return false;
}

}  // namespace detail

/// Deny-overrides evaluation; pure in ctx. The first failing rule names the
/// rejection reason; GasCeiling/DeadlineMax tightenings surface as
/// boundConstraints on approval.
inline Decision evaluate(const Intent& intent, const PolicySet& policy,
                         const EvaluationContext& ctx) {
    Decision decision;
    decision.policy_id = policy.policy_id;

    std::int64_t triggered = 0;
    for (const AdvisorySignal& s : policy.advisory_signals)
        if (detail::signal_triggered(s, intent, ctx)) ++triggered;
    decision.risk_score_micro =
        policy.advisory_signals.empty()
            ? 0
            : (triggered * 1000000 + static_cast<std::int64_t>(policy.advisory_signals.size()) / 2) /
                  static_cast<std::int64_t>(policy.advisory_signals.size());

    if (policy.rules.empty()) {
        decision.outcome = Outcome::Rejected;
        decision.reason = "default-deny: policy has no rules";
        return decision;
    }
    for (const PolicyRule& rule : policy.rules) {
        if (auto failure = std::visit(detail::RuleEval{intent, ctx}, rule)) {
            decision.outcome = Outcome::Rejected;
            decision.reason = std::string(rule_name(rule)) + ": " + *failure;
            return decision;
        }
    }

    decision.outcome = Outcome::Approved;
    BoundConstraints bc;
    for (const PolicyRule& rule : policy.rules) {
        if (const GasCeiling* g = std::get_if<GasCeiling>(&rule)) {
            bc.max_gas_price_wei = bc.max_gas_price_wei
                                       ? UintDecimal::min(*bc.max_gas_price_wei, g->max_gas_price_wei)
                                       : g->max_gas_price_wei;
        } else if (const DeadlineMax* d = std::get_if<DeadlineMax>(&rule)) {
            std::int64_t tight = std::min(intent.constraints.deadline,
                                          ctx.clock + d->max_seconds_ahead);
            bc.tight_deadline = bc.tight_deadline ? std::min(*bc.tight_deadline, tight) : tight;
        }
    }
    if (!bc.empty()) decision.bound_constraints = bc;
    return decision;
}

/// Issues and signs a PDR over a decision made for this intent.
inline PolicyDecisionRecord issue_pdr(const Intent& intent, const Decision& decision,
                                      const Keypair& issuer_key, const std::string& issuer_id,
                                      const std::string& audience, std::int64_t ttl_seconds,
                                      const EvaluationContext& ctx) {
    if (ttl_seconds <= 0) throw ClockInvalid("ttlSeconds must be positive");
    PolicyDecisionRecord pdr;
    pdr.issuer = issuer_id;
    pdr.audience = audience;
    pdr.issued_at = ctx.clock;
    pdr.expires_at = ctx.clock + ttl_seconds;
    pdr.tis_hash = intent_hash(intent);
    pdr.decision = decision;
    if (intent.constraints.required_signer) pdr.subject = intent.constraints.required_signer->str();
    pdr.pdr_id = derive_pdr_id(pdr.tis_hash, pdr.issued_at, ttl_seconds, issuer_id, audience);
    sign_pdr(pdr, issuer_key);
    return pdr;
}

/// Spend accounting, applied only after confirmed execution.
inline void record_spend(EvaluationContext& ctx, const Intent& intent, std::int64_t at) {
    std::string scope = intent_scope_key(intent);
    if (auto it = ctx.last_action_at.find(scope); it != ctx.last_action_at.end() && at < it->second)
        throw TimestampRegression("timestamp " + std::to_string(at) + " precedes latest record " +
                                  std::to_string(it->second) + " for scope '" + scope + "'");
    SpendEvent ev;
    ev.scope_key = scope;
    ev.ts = at;
    if (auto spend = intent_spend(intent)) {
        ev.token = spend->first;
        ev.amount = spend->second;
    }
    ctx.spend_ledger.push_back(ev);
    ctx.last_action_at[scope] = at;
}

// --------------------------------------------------------------- file I/O

namespace detail {

inline TokenKey token_key_from_json(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("chainId") || !j.contains("address"))
        throw SchemaViolation(path, "expected {chainId, address}");
    auto addr = SemanticAddress::parse(j["address"].get<std::string>());
    if (!addr) throw SchemaViolation(path + "/address", "not an address");
    return {j["chainId"].get<std::int64_t>(), addr->str()};
}

inline json token_key_to_json(const TokenKey& k) {
    return json{{"chainId", k.first}, {"address", k.second}};
}

}  // namespace detail

inline PolicySet policy_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("policyId") || !doc.contains("rules"))
        throw SchemaViolation("", "policy file requires policyId and rules");
    PolicySet policy;
    policy.policy_id = doc.at("policyId").get<std::string>();
    if (policy.policy_id.empty()) throw SchemaViolation("/policyId", "policyId must be non-empty");
    const json& rules = doc.at("rules");
    if (!rules.is_array()) throw SchemaViolation("/rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const json& r = rules[i];
        std::string path = "/rules/" + std::to_string(i);
        if (!r.is_object() || !r.contains("type"))
            throw SchemaViolation(path, "rule requires a type tag");
        const std::string type = r.at("type").get<std::string>();
        auto uint_field = [&](const char* key) {
            auto v = UintDecimal::from_string(r.at(key).get<std::string>());
            if (!v) throw SchemaViolation(path + "/" + key, "not a canonical unsigned decimal");
            return *v;
        };
        auto positive = [&](const char* key) {
            std::int64_t v = r.at(key).get<std::int64_t>();
            if (v < 1) throw SchemaViolation(path + "/" + key, "must be >= 1");
            return v;
        };
        try {
            if (type == "ActionAllowlist") {
                ActionAllowlist rule;
                for (const auto& t : r.at("types")) {
                    auto at = action_type_from_name(t.get<std::string>());
                    if (!at) throw SchemaViolation(path + "/types", "unknown action type");
                    rule.types.insert(*at);
                }
                policy.rules.push_back(rule);
            } else if (type == "RecipientAllowlist") {
                RecipientAllowlist rule;
                for (const auto& a : r.at("addresses")) {
                    auto addr = SemanticAddress::parse(a.get<std::string>());
                    if (!addr) throw SchemaViolation(path + "/addresses", "not an address");
                    rule.addresses.insert(addr->str());
                }
                policy.rules.push_back(rule);
            } else if (type == "TokenAllowlist") {
                TokenAllowlist rule;
                for (const auto& t : r.at("tokens"))
                    rule.tokens.insert(detail::token_key_from_json(t, path + "/tokens"));
                policy.rules.push_back(rule);
            } else if (type == "PerTxCap") {
                policy.rules.push_back(PerTxCap{
                    detail::token_key_from_json(r.at("token"), path + "/token"),
                    uint_field("maxAmount")});
            } else if (type == "WindowCap") {
                policy.rules.push_back(WindowCap{
                    detail::token_key_from_json(r.at("token"), path + "/token"),
                    uint_field("maxAmount"), positive("windowSeconds")});
            } else if (type == "CadenceMin") {
                policy.rules.push_back(CadenceMin{positive("minSecondsBetween"),
                                                  r.at("scopeKey").get<std::string>()});
            } else if (type == "DeadlineMax") {
                policy.rules.push_back(DeadlineMax{positive("maxSecondsAhead")});
            } else if (type == "GasCeiling") {
                policy.rules.push_back(GasCeiling{uint_field("maxGasPriceWei")});
            } else if (type == "DelegateScopeGuard") {
                policy.rules.push_back(DelegateScopeGuard{r.at("maxContracts").get<std::int64_t>(),
                                                          uint_field("maxValueWei"),
                                                          r.at("maxValiditySeconds").get<std::int64_t>()});
            } else if (type == "RequireSigner") {
                auto addr = SemanticAddress::parse(r.at("address").get<std::string>());
                if (!addr) throw SchemaViolation(path + "/address", "not an address");
                policy.rules.push_back(RequireSigner{*addr});
            } else {
                throw SchemaViolation(path + "/type", "unknown rule type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw SchemaViolation(path, std::string("malformed rule: ") + e.what());
        }
    }
    if (auto it = doc.find("advisorySignals"); it != doc.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& s = (*it)[i];
            std::string path = "/advisorySignals/" + std::to_string(i);
            AdvisorySignal signal;
            signal.name = s.at("name").get<std::string>();
            const std::string kind = s.at("kind").get<std::string>();
            if (kind == "AMOUNT_AT_LEAST") {
                signal.kind = AdvisorySignal::Kind::AmountAtLeast;
                signal.token = detail::token_key_from_json(s.at("token"), path + "/token");
                auto thr = UintDecimal::from_string(s.at("threshold").get<std::string>());
                if (!thr) throw SchemaViolation(path + "/threshold", "not a canonical unsigned decimal");
                signal.threshold = *thr;
            } else if (kind == "DEADLINE_WITHIN") {
                signal.kind = AdvisorySignal::Kind::DeadlineWithin;
                signal.seconds = s.at("seconds").get<std::int64_t>();
            } else if (kind == "ACTION_IS") {
                signal.kind = AdvisorySignal::Kind::ActionIs;
                auto at = action_type_from_name(s.at("action").get<std::string>());
                if (!at) throw SchemaViolation(path + "/action", "unknown action type");
                signal.action = *at;
            } else {
                throw SchemaViolation(path + "/kind", "unknown signal kind '" + kind + "'");
            }
            policy.advisory_signals.push_back(std::move(signal));
        }
    }
    return policy;
}

inline PolicySet load_policy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open policy file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw MalformedJson("policy file is not well-formed JSON: " + path);
    return policy_from_json(doc);
}

// Spend ledger persistence: append-only JSON lines, one executed intent per
// line, replayable into an EvaluationContext.

inline json to_json(const SpendEvent& ev) {
    json j{{"scopeKey", ev.scope_key}, {"ts", ev.ts}};
    if (ev.token) j["token"] = detail::token_key_to_json(*ev.token);
    if (ev.amount) j["amount"] = ev.amount->str();
    return j;
}

inline SpendEvent spend_event_from_json(const json& j) {
    SpendEvent ev;
    ev.scope_key = j.at("scopeKey").get<std::string>();
    ev.ts = j.at("ts").get<std::int64_t>();
    if (auto it = j.find("token"); it != j.end())
        ev.token = detail::token_key_from_json(*it, "/token");
    if (auto it = j.find("amount"); it != j.end())
        ev.amount = parse_uint_decimal(it->get_ref<const std::string&>());
    return ev;
}

inline void replay_spend_ledger(EvaluationContext& ctx, std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw MalformedJson("spend ledger line is not JSON: " + line);
        SpendEvent ev = spend_event_from_json(j);
        ctx.spend_ledger.push_back(ev);
        auto [it, inserted] = ctx.last_action_at.try_emplace(ev.scope_key, ev.ts);
        if (!inserted) it->second = std::max(it->second, ev.ts);
    }
}

inline EvaluationContext load_spend_ledger(const std::string& path, std::int64_t clock) {
    EvaluationContext ctx;
    ctx.clock = clock;
    std::ifstream in(path);
    if (in) replay_spend_ledger(ctx, in);
    return ctx;
}

inline void append_spend_ledger(const std::string& path, const SpendEvent& ev) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot open spend ledger for append: " + path);
    out << canonicalize(to_json(ev)) << "\n";
}

}  // namespace ig

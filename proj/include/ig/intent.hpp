#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/crypto.hpp"
#include "ig/doc_check.hpp"
#include "ig/errors.hpp"
#include "ig/time_codec.hpp"
#include "ig/uint_decimal.hpp"

namespace ig {

// Transaction Intent Schema: the declarative "what", never the "how". One
// action plus validity constraints, optional routing preferences and
// provenance metadata. Version is pinned; unknown keys are hard errors
// because these documents get hashed and signed.

inline constexpr std::string_view kTisVersion = "1.0.0";

struct Token {
    std::int64_t chain_id = 1;
    SemanticAddress address;
    std::optional<std::string> symbol;
    std::optional<int> decimals;

    std::pair<std::int64_t, std::string> key() const { return {chain_id, address.str()}; }
    bool operator==(const Token&) const = default;
};

struct Constraints {
    std::optional<UintDecimal> nonce;
    std::int64_t deadline = 0;
    std::optional<std::int64_t> valid_from_block;
    std::optional<std::int64_t> valid_until_block;
    std::optional<UintDecimal> max_gas_price_wei;
    std::optional<SemanticAddress> required_signer;
    std::optional<SemanticAddress> exclusivity;

    bool operator==(const Constraints&) const = default;
};

enum class PrivacyMode { Public, Private };
enum class ExecutionSpeed { Fast, Normal, Slow };
enum class Routing { BestPrice, MinGas, MinRisk };

struct Preferences {
    std::optional<PrivacyMode> privacy_mode;
    std::optional<ExecutionSpeed> execution_speed;
    std::optional<Routing> routing;

    bool operator==(const Preferences&) const = default;
};

struct Swap {
    Token token_in;
    Token token_out;
    UintDecimal amount_in;
    UintDecimal min_amount_out;
    std::optional<int> slippage_bps;
    std::optional<SemanticAddress> recipient;

    bool operator==(const Swap&) const = default;
};

struct Transfer {
    Token token;
    SemanticAddress to;
    UintDecimal amount;
    std::optional<std::string> memo;

    bool operator==(const Transfer&) const = default;
};

struct DelegateScope {
    std::optional<std::vector<SemanticAddress>> contracts;
    std::optional<std::vector<std::string>> functions;
    std::optional<UintDecimal> max_value_wei;
    std::optional<std::int64_t> valid_until;

    bool operator==(const DelegateScope&) const = default;
};

struct Delegate {
    SemanticAddress delegatee;
    DelegateScope scope;

    bool operator==(const Delegate&) const = default;
};

using Action = std::variant<Swap, Transfer, Delegate>;

enum class ActionType { Swap, Transfer, Delegate };

inline ActionType action_type(const Action& a) {
    if (std::holds_alternative<Swap>(a)) return ActionType::Swap;
    if (std::holds_alternative<Transfer>(a)) return ActionType::Transfer;
    return ActionType::Delegate;
}

inline std::string_view action_type_name(ActionType t) {
    switch (t) {
        case ActionType::Swap: return "SWAP";
        case ActionType::Transfer: return "TRANSFER";
        case ActionType::Delegate: return "DELEGATE";
    }
    return "?";
}

inline std::optional<ActionType> action_type_from_name(std::string_view name) {
    if (name == "SWAP") return ActionType::Swap;
    if (name == "TRANSFER") return ActionType::Transfer;
    if (name == "DELEGATE") return ActionType::Delegate;
    return std::nullopt;
}

struct Metadata {
    std::optional<std::string> originator;
    std::optional<std::string> created_at;  // kept textual, validated RFC 3339
    std::optional<std::int64_t> origin_chain_id;
    std::optional<std::vector<std::string>> tags;

    bool operator==(const Metadata&) const = default;
};

struct Intent {
    std::string version{kTisVersion};
    std::string intent_id;
    std::optional<Metadata> metadata;
    Action action;
    Constraints constraints;
    std::optional<Preferences> preferences;

    bool operator==(const Intent&) const = default;
};

// ---------------------------------------------------------------- document

namespace detail {

inline void check_token(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"chainId", "address", "symbol", "decimals"});
    if (const json* v = c.required(j, path, "chainId")) c.integer(*v, check::join(path, "chainId"), 1);
    if (const json* v = c.required(j, path, "address")) c.address(*v, check::join(path, "address"));
    if (auto it = j.find("symbol"); it != j.end()) c.string(*it, check::join(path, "symbol"));
    if (auto it = j.find("decimals"); it != j.end())
        c.integer(*it, check::join(path, "decimals"), 0, 255);
}

inline void check_action(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    auto type_it = j.find("type");
    if (type_it == j.end()) {
        c.fail(check::join(path, "type"), "missing required property");
        return;
    }
    if (!c.string(*type_it, check::join(path, "type"))) return;
    const auto& type = type_it->get_ref<const std::string&>();
    auto at = action_type_from_name(type);
    if (!at) {
        c.fail(check::join(path, "type"), "unknown action type '" + type + "'");
        return;
    }
    switch (*at) {
        case ActionType::Swap: {
            c.unknown_keys(j, path, {"type", "tokenIn", "tokenOut", "amountIn", "minAmountOut",
                                     "slippageBps", "recipient"});
            if (const json* v = c.required(j, path, "tokenIn"))
                check_token(c, *v, check::join(path, "tokenIn"));
            if (const json* v = c.required(j, path, "tokenOut"))
                check_token(c, *v, check::join(path, "tokenOut"));
            if (const json* v = c.required(j, path, "amountIn"))
                c.uint_string(*v, check::join(path, "amountIn"));
            if (const json* v = c.required(j, path, "minAmountOut"))
                c.uint_string(*v, check::join(path, "minAmountOut"));
            if (auto it = j.find("slippageBps"); it != j.end())
                c.integer(*it, check::join(path, "slippageBps"), 0, 10000);
            if (auto it = j.find("recipient"); it != j.end())
                c.address(*it, check::join(path, "recipient"));
            break;
        }
        case ActionType::Transfer: {
            c.unknown_keys(j, path, {"type", "token", "to", "amount", "memo"});
            if (const json* v = c.required(j, path, "token"))
                check_token(c, *v, check::join(path, "token"));
            if (const json* v = c.required(j, path, "to")) c.address(*v, check::join(path, "to"));
            if (const json* v = c.required(j, path, "amount"))
                c.uint_string(*v, check::join(path, "amount"));
            if (auto it = j.find("memo"); it != j.end()) c.string(*it, check::join(path, "memo"));
            break;
        }
        case ActionType::Delegate: {
            c.unknown_keys(j, path, {"type", "delegatee", "scope"});
            if (const json* v = c.required(j, path, "delegatee"))
                c.address(*v, check::join(path, "delegatee"));
            const json* scope = c.required(j, path, "scope");
            if (!scope || !c.object(*scope, check::join(path, "scope"))) break;
            std::string spath = check::join(path, "scope");
            c.unknown_keys(*scope, spath, {"contracts", "functions", "maxValueWei", "validUntil"});
            if (auto it = scope->find("contracts"); it != scope->end()) {
                std::string apath = check::join(spath, "contracts");
                if (!it->is_array()) {
                    c.fail(apath, "expected an array");
                } else {
                    for (std::size_t i = 0; i < it->size(); ++i)
                        c.address((*it)[i], apath + "/" + std::to_string(i));
                }
            }
            if (auto it = scope->find("functions"); it != scope->end()) {
                std::string apath = check::join(spath, "functions");
                if (!it->is_array()) {
                    c.fail(apath, "expected an array");
                } else {
                    for (std::size_t i = 0; i < it->size(); ++i)
                        c.string((*it)[i], apath + "/" + std::to_string(i));
                }
            }
            if (auto it = scope->find("maxValueWei"); it != scope->end())
                c.uint_string(*it, check::join(spath, "maxValueWei"));
            if (auto it = scope->find("validUntil"); it != scope->end())
                c.integer(*it, check::join(spath, "validUntil"), 0);
            break;
        }
    }
}

inline void check_constraints(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"nonce", "deadline", "validFromBlock", "validUntilBlock",
                             "maxGasPriceWei", "requiredSigner", "exclusivity"});
    if (const json* v = c.required(j, path, "deadline"))
        c.integer(*v, check::join(path, "deadline"), 0);
    if (auto it = j.find("nonce"); it != j.end()) c.uint_string(*it, check::join(path, "nonce"));
    bool blocks_ok = true;
    if (auto it = j.find("validFromBlock"); it != j.end())
        blocks_ok &= c.integer(*it, check::join(path, "validFromBlock"), 0);
    if (auto it = j.find("validUntilBlock"); it != j.end())
        blocks_ok &= c.integer(*it, check::join(path, "validUntilBlock"), 0);
    if (blocks_ok && j.contains("validFromBlock") && j.contains("validUntilBlock") &&
        j["validFromBlock"].get<std::int64_t>() > j["validUntilBlock"].get<std::int64_t>())
        c.fail(path, "validFromBlock exceeds validUntilBlock");
    if (auto it = j.find("maxGasPriceWei"); it != j.end())
        c.uint_string(*it, check::join(path, "maxGasPriceWei"));
    if (auto it = j.find("requiredSigner"); it != j.end())
        c.address(*it, check::join(path, "requiredSigner"));
    if (auto it = j.find("exclusivity"); it != j.end() && !it->is_null())
        c.address(*it, check::join(path, "exclusivity"));
}

inline void check_enum(check::Ctx& c, const json& j, const std::string& path,
                       std::initializer_list<std::string_view> values) {
    if (!c.string(j, path)) return;
    const auto& s = j.get_ref<const std::string&>();
    for (auto v : values)
        if (s == v) return;
    std::string joined;
    for (auto v : values) {
        if (!joined.empty()) joined += ", ";
        joined += v;
    }
    c.fail(path, "not one of [" + joined + "]");
}

inline void check_metadata(check::Ctx& c, const json& j, const std::string& path) {
    if (!c.object(j, path)) return;
    c.unknown_keys(j, path, {"originator", "createdAt", "originChainId", "tags"});
    if (auto it = j.find("originator"); it != j.end())
        c.string(*it, check::join(path, "originator"));
    if (auto it = j.find("createdAt"); it != j.end())
        c.rfc3339(*it, check::join(path, "createdAt"));
    if (auto it = j.find("originChainId"); it != j.end())
        c.integer(*it, check::join(path, "originChainId"), 1);
    if (auto it = j.find("tags"); it != j.end()) {
        std::string apath = check::join(path, "tags");
        if (!it->is_array()) {
            c.fail(apath, "expected an array");
        } else {
            for (std::size_t i = 0; i < it->size(); ++i)
                c.string((*it)[i], apath + "/" + std::to_string(i));
        }
    }
}

}  // namespace detail

/// Full schema conformance check of a raw document, plus the local
/// strengthenings (UintDecimal canonical form, block-range ordering).
inline std::vector<Finding> check_intent_document(const json& doc) {
    check::Ctx c;
    if (!doc.is_object()) {
        c.fail("", "TIS document must be a JSON object");
        return c.out;
    }
    c.unknown_keys(doc, "", {"version", "intentId", "metadata", "action", "constraints",
                             "preferences"});
    if (const json* v = c.required(doc, "", "version")) {
        if (c.string(*v, "/version") && v->get_ref<const std::string&>() != kTisVersion)
            c.fail("/version", "version must be \"1.0.0\"");
    }
    if (const json* v = c.required(doc, "", "intentId")) c.uuid(*v, "/intentId");
    if (auto it = doc.find("metadata"); it != doc.end())
        detail::check_metadata(c, *it, "/metadata");
    if (const json* v = c.required(doc, "", "action")) detail::check_action(c, *v, "/action");
    if (const json* v = c.required(doc, "", "constraints"))
        detail::check_constraints(c, *v, "/constraints");
    if (auto it = doc.find("preferences"); it != doc.end()) {
        if (c.object(*it, "/preferences")) {
            c.unknown_keys(*it, "/preferences", {"privacyMode", "executionSpeed", "routing"});
            if (auto f = it->find("privacyMode"); f != it->end())
                detail::check_enum(c, *f, "/preferences/privacyMode", {"PUBLIC", "PRIVATE"});
            if (auto f = it->find("executionSpeed"); f != it->end())
                detail::check_enum(c, *f, "/preferences/executionSpeed", {"FAST", "NORMAL", "SLOW"});
            if (auto f = it->find("routing"); f != it->end())
                detail::check_enum(c, *f, "/preferences/routing", {"BEST_PRICE", "MIN_GAS", "MIN_RISK"});
        }
    }
    return c.out;
}

// ------------------------------------------------------------------- typed

namespace detail {

inline Token token_from_json(const json& j) {
    Token t;
    t.chain_id = j.at("chainId").get<std::int64_t>();
    t.address = *SemanticAddress::parse(j.at("address").get_ref<const std::string&>());
    if (auto it = j.find("symbol"); it != j.end()) t.symbol = it->get<std::string>();
    if (auto it = j.find("decimals"); it != j.end()) t.decimals = it->get<int>();
    return t;
}

inline json token_to_json(const Token& t) {
    json j{{"chainId", t.chain_id}, {"address", t.address.str()}};
    if (t.symbol) j["symbol"] = *t.symbol;
    if (t.decimals) j["decimals"] = *t.decimals;
    return j;
}

inline std::string_view privacy_name(PrivacyMode m) {
    return m == PrivacyMode::Public ? "PUBLIC" : "PRIVATE";
}
inline std::string_view speed_name(ExecutionSpeed s) {
    switch (s) {
        case ExecutionSpeed::Fast: return "FAST";
        case ExecutionSpeed::Normal: return "NORMAL";
        default: return "SLOW";
    }
}
inline std::string_view routing_name(Routing r) {
    switch (r) {
        case Routing::BestPrice: return "BEST_PRICE";
        case Routing::MinGas: return "MIN_GAS";
        default: return "MIN_RISK";
    }
}

}  // namespace detail

/// Builds the typed value from a document that already passed
/// check_intent_document.
inline Intent intent_from_json(const json& doc) {
    Intent intent;
    intent.version = doc.at("version").get<std::string>();
    intent.intent_id = doc.at("intentId").get<std::string>();
    if (auto it = doc.find("metadata"); it != doc.end()) {
        Metadata m;
        if (auto f = it->find("originator"); f != it->end()) m.originator = f->get<std::string>();
        if (auto f = it->find("createdAt"); f != it->end()) m.created_at = f->get<std::string>();
        if (auto f = it->find("originChainId"); f != it->end())
            m.origin_chain_id = f->get<std::int64_t>();
        if (auto f = it->find("tags"); f != it->end())
            m.tags = f->get<std::vector<std::string>>();
        intent.metadata = std::move(m);
    }
    const json& action = doc.at("action");
    const auto& type = action.at("type").get_ref<const std::string&>();
    if (type == "SWAP") {
        Swap s;
        s.token_in = detail::token_from_json(action.at("tokenIn"));
        s.token_out = detail::token_from_json(action.at("tokenOut"));
        s.amount_in = parse_uint_decimal(action.at("amountIn").get_ref<const std::string&>());
        s.min_amount_out =
            parse_uint_decimal(action.at("minAmountOut").get_ref<const std::string&>());
        if (auto it = action.find("slippageBps"); it != action.end()) s.slippage_bps = it->get<int>();
        if (auto it = action.find("recipient"); it != action.end())
            s.recipient = *SemanticAddress::parse(it->get_ref<const std::string&>());
        intent.action = std::move(s);
    } else if (type == "TRANSFER") {
        Transfer t;
        t.token = detail::token_from_json(action.at("token"));
        t.to = *SemanticAddress::parse(action.at("to").get_ref<const std::string&>());
        t.amount = parse_uint_decimal(action.at("amount").get_ref<const std::string&>());
        if (auto it = action.find("memo"); it != action.end()) t.memo = it->get<std::string>();
        intent.action = std::move(t);
    } else {
        Delegate d;
        d.delegatee = *SemanticAddress::parse(action.at("delegatee").get_ref<const std::string&>());
        const json& scope = action.at("scope");
        if (auto it = scope.find("contracts"); it != scope.end()) {
            std::vector<SemanticAddress> v;
            for (const auto& a : *it) v.push_back(*SemanticAddress::parse(a.get_ref<const std::string&>()));
            d.scope.contracts = std::move(v);
        }
        if (auto it = scope.find("functions"); it != scope.end())
            d.scope.functions = it->get<std::vector<std::string>>();
        if (auto it = scope.find("maxValueWei"); it != scope.end())
            d.scope.max_value_wei = parse_uint_decimal(it->get_ref<const std::string&>());
        if (auto it = scope.find("validUntil"); it != scope.end())
            d.scope.valid_until = it->get<std::int64_t>();
        intent.action = std::move(d);
    }
    const json& cons = doc.at("constraints");
    intent.constraints.deadline = cons.at("deadline").get<std::int64_t>();
    if (auto it = cons.find("nonce"); it != cons.end())
        intent.constraints.nonce = parse_uint_decimal(it->get_ref<const std::string&>());
    if (auto it = cons.find("validFromBlock"); it != cons.end())
        intent.constraints.valid_from_block = it->get<std::int64_t>();
    if (auto it = cons.find("validUntilBlock"); it != cons.end())
        intent.constraints.valid_until_block = it->get<std::int64_t>();
    if (auto it = cons.find("maxGasPriceWei"); it != cons.end())
        intent.constraints.max_gas_price_wei = parse_uint_decimal(it->get_ref<const std::string&>());
    if (auto it = cons.find("requiredSigner"); it != cons.end())
        intent.constraints.required_signer = *SemanticAddress::parse(it->get_ref<const std::string&>());
    if (auto it = cons.find("exclusivity"); it != cons.end() && !it->is_null())
        intent.constraints.exclusivity = *SemanticAddress::parse(it->get_ref<const std::string&>());
    if (auto it = doc.find("preferences"); it != doc.end()) {
        Preferences p;
        if (auto f = it->find("privacyMode"); f != it->end())
            p.privacy_mode = *f == "PUBLIC" ? PrivacyMode::Public : PrivacyMode::Private;
        if (auto f = it->find("executionSpeed"); f != it->end())
            p.execution_speed = *f == "FAST"     ? ExecutionSpeed::Fast
                                : *f == "NORMAL" ? ExecutionSpeed::Normal
                                                 : ExecutionSpeed::Slow;
        if (auto f = it->find("routing"); f != it->end())
            p.routing = *f == "BEST_PRICE" ? Routing::BestPrice
                        : *f == "MIN_GAS"  ? Routing::MinGas
                                           : Routing::MinRisk;
        intent.preferences = p;
    }
    return intent;
}

inline json to_json(const Intent& intent) {
    json doc{{"version", intent.version}, {"intentId", intent.intent_id}};
    if (intent.metadata) {
        json m = json::object();
        const Metadata& md = *intent.metadata;
        if (md.originator) m["originator"] = *md.originator;
        if (md.created_at) m["createdAt"] = *md.created_at;
        if (md.origin_chain_id) m["originChainId"] = *md.origin_chain_id;
        if (md.tags) m["tags"] = *md.tags;
        doc["metadata"] = std::move(m);
    }
    json a;
    if (const Swap* s = std::get_if<Swap>(&intent.action)) {
        a = json{{"type", "SWAP"},
                 {"tokenIn", detail::token_to_json(s->token_in)},
                 {"tokenOut", detail::token_to_json(s->token_out)},
                 {"amountIn", s->amount_in.str()},
                 {"minAmountOut", s->min_amount_out.str()}};
        if (s->slippage_bps) a["slippageBps"] = *s->slippage_bps;
        if (s->recipient) a["recipient"] = s->recipient->str();
    } else if (const Transfer* t = std::get_if<Transfer>(&intent.action)) {
        a = json{{"type", "TRANSFER"},
                 {"token", detail::token_to_json(t->token)},
                 {"to", t->to.str()},
                 {"amount", t->amount.str()}};
        if (t->memo) a["memo"] = *t->memo;
    } else {
        const Delegate& d = std::get<Delegate>(intent.action);
        json scope = json::object();
        if (d.scope.contracts) {
            json arr = json::array();
            for (const auto& c : *d.scope.contracts) arr.push_back(c.str());
            scope["contracts"] = std::move(arr);
        }
        if (d.scope.functions) scope["functions"] = *d.scope.functions;
        if (d.scope.max_value_wei) scope["maxValueWei"] = d.scope.max_value_wei->str();
        if (d.scope.valid_until) scope["validUntil"] = *d.scope.valid_until;
        a = json{{"type", "DELEGATE"}, {"delegatee", d.delegatee.str()}, {"scope", std::move(scope)}};
    }
    doc["action"] = std::move(a);
    json cons = json::object();
    if (intent.constraints.nonce) cons["nonce"] = intent.constraints.nonce->str();
    cons["deadline"] = intent.constraints.deadline;
    if (intent.constraints.valid_from_block) cons["validFromBlock"] = *intent.constraints.valid_from_block;
    if (intent.constraints.valid_until_block)
        cons["validUntilBlock"] = *intent.constraints.valid_until_block;
    if (intent.constraints.max_gas_price_wei)
        cons["maxGasPriceWei"] = intent.constraints.max_gas_price_wei->str();
    if (intent.constraints.required_signer)
        cons["requiredSigner"] = intent.constraints.required_signer->str();
    if (intent.constraints.exclusivity) cons["exclusivity"] = intent.constraints.exclusivity->str();
    doc["constraints"] = std::move(cons);
    if (intent.preferences) {
        json p = json::object();
        if (intent.preferences->privacy_mode)
            p["privacyMode"] = std::string(detail::privacy_name(*intent.preferences->privacy_mode));
        if (intent.preferences->execution_speed)
            p["executionSpeed"] = std::string(detail::speed_name(*intent.preferences->execution_speed));
        if (intent.preferences->routing)
            p["routing"] = std::string(detail::routing_name(*intent.preferences->routing));
        doc["preferences"] = std::move(p);
    }
    return doc;
}

inline Intent parse_intent_json(const json& doc) {
    auto findings = check_intent_document(doc);
    if (!findings.empty()) throw SchemaViolation(std::move(findings));
    return intent_from_json(doc);
}

inline Intent parse_intent(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedJson("input is not well-formed JSON");
    return parse_intent_json(doc);
}

/// Canonical serialization; parse_intent(serialize_intent(i)) == i.
inline std::string serialize_intent(const Intent& intent) {
    return canonicalize(to_json(intent));
}

/// Re-checks every schema invariant on an already-typed value. Findings are
/// data, not failures.
inline ValidationReport validate_intent(const Intent& intent) {
    return ValidationReport{check_intent_document(to_json(intent))};
}

inline Digest32 intent_hash(const Intent& intent) {
    return hash_canonical(to_json(intent));
}

namespace detail {

inline std::string token_label(const Token& t) {
    if (t.symbol) return *t.symbol + " (chain " + std::to_string(t.chain_id) + ")";
    return "token " + t.address.str() + " (chain " + std::to_string(t.chain_id) + ")";
}

}  // namespace detail

/// Deterministic one-paragraph description regenerated from the structured
/// fields; equal intents produce byte-identical previews.
inline std::string render_preview(const Intent& intent) {
    std::string out;
    if (const Swap* s = std::get_if<Swap>(&intent.action)) {
        out = "SWAP amount " + s->amount_in.str() + " of " + detail::token_label(s->token_in) +
              " for minimum " + s->min_amount_out.str() + " of " + detail::token_label(s->token_out);
        if (s->recipient) out += " to " + s->recipient->str();
        if (s->slippage_bps) out += " within " + std::to_string(*s->slippage_bps) + " bps slippage";
    } else if (const Transfer* t = std::get_if<Transfer>(&intent.action)) {
        out = "TRANSFER amount " + t->amount.str() + " of " + detail::token_label(t->token) +
              " to " + t->to.str();
        if (t->memo) out += " (memo: " + *t->memo + ")";
    } else {
        const Delegate& d = std::get<Delegate>(intent.action);
        out = "DELEGATE authority to " + d.delegatee.str();
        out += " over " + std::to_string(d.scope.contracts ? d.scope.contracts->size() : 0) +
               " contract(s) and " +
               std::to_string(d.scope.functions ? d.scope.functions->size() : 0) + " function(s)";
        if (d.scope.max_value_wei) out += ", max value " + d.scope.max_value_wei->str() + " wei";
        if (d.scope.valid_until) out += ", until " + format_rfc3339(*d.scope.valid_until);
    }
    out += "; valid until " + format_rfc3339(intent.constraints.deadline) + " (UTC)";
    if (intent.constraints.required_signer)
        out += "; required signer " + intent.constraints.required_signer->str();
    out += ".";
    return out;
}

}  // namespace ig

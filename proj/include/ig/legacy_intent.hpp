#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/intent.hpp"

namespace ig {

// Importer for the older illustrative intent shape (action verb +
// inputs/outputs arrays with EXACT/MINIMUM constraints). Only the shapes
// that map losslessly onto the normative action variants are translated;
// everything else is reported, not guessed at.

struct LegacyOptions {
    std::int64_t default_chain_id = 1;  // legacy payloads routinely omit chainId
};

namespace detail {

struct LegacyLeg {
    std::string token;
    std::string amount;
    std::string constraint;
};

inline LegacyLeg legacy_leg(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("token") || !j.contains("amount"))
        throw UnsupportedLegacyShape(std::string(what) + " entry lacks token/amount");
    LegacyLeg leg;
    if (!j["token"].is_string() || !j["amount"].is_string())
        throw UnsupportedLegacyShape(std::string(what) + " token/amount must be strings");
    leg.token = j["token"].get<std::string>();
    leg.amount = j["amount"].get<std::string>();
    leg.constraint = j.value("constraint", std::string());
    return leg;
}

}  // namespace detail

inline Intent normalize_legacy_intent(const json& raw, const LegacyOptions& options = {}) {
    if (!raw.is_object()) throw UnsupportedLegacyShape("legacy intent must be a JSON object");
    if (!raw.contains("action") || !raw["action"].is_string())
        throw UnsupportedLegacyShape("legacy intent lacks a string `action` verb");
    const std::string action = raw["action"].get<std::string>();
    if (!raw.contains("intentId"))
        throw UnsupportedLegacyShape("legacy intent lacks an intentId");

    std::int64_t chain_id = options.default_chain_id;
    json constraints = json::object();
    if (auto it = raw.find("constraints"); it != raw.end() && it->is_object()) {
        if (auto c = it->find("chainId"); c != it->end() && c->is_number_integer())
            chain_id = c->get<std::int64_t>();
        for (const char* key : {"deadline", "nonce", "maxGasPriceWei", "requiredSigner"})
            if (auto c = it->find(key); c != it->end()) constraints[key] = *c;
        if (auto c = it->find("exclusivity"); c != it->end() && !c->is_null())
            constraints["exclusivity"] = *c;
    }

    auto legs = [&](const char* key, const char* what) {
        std::vector<detail::LegacyLeg> out;
        if (auto it = raw.find(key); it != raw.end()) {
            if (!it->is_array()) throw UnsupportedLegacyShape(std::string(what) + " must be an array");
            for (const auto& entry : *it) out.push_back(detail::legacy_leg(entry, what));
        }
        return out;
    };
    auto inputs = legs("inputs", "inputs");
    auto outputs = legs("outputs", "outputs");

    json doc{{"version", std::string(kTisVersion)}, {"intentId", raw["intentId"]}};
    auto token_json = [&](const std::string& address) {
        return json{{"chainId", chain_id}, {"address", address}};
    };

    if (action == "SWAP") {
        if (inputs.size() != 1 || outputs.size() != 1)
            throw UnsupportedLegacyShape("legacy SWAP requires exactly one input and one output");
        if (inputs[0].constraint != "EXACT" || outputs[0].constraint != "MINIMUM")
            throw UnsupportedLegacyShape(
                "legacy SWAP maps only from an EXACT input and a MINIMUM output");
        doc["action"] = json{{"type", "SWAP"},
                             {"tokenIn", token_json(inputs[0].token)},
                             {"tokenOut", token_json(outputs[0].token)},
                             {"amountIn", inputs[0].amount},
                             {"minAmountOut", outputs[0].amount}};
    } else if (action == "TRANSFER") {
        if (inputs.size() != 1 || !outputs.empty())
            throw UnsupportedLegacyShape("legacy TRANSFER requires exactly one input and no outputs");
        if (inputs[0].constraint != "EXACT")
            throw UnsupportedLegacyShape("legacy TRANSFER maps only from an EXACT input");
        if (!raw.contains("recipient") || !raw["recipient"].is_string())
            throw UnsupportedLegacyShape("legacy TRANSFER requires an explicit recipient");
        doc["action"] = json{{"type", "TRANSFER"},
                             {"token", token_json(inputs[0].token)},
                             {"to", raw["recipient"]},
                             {"amount", inputs[0].amount}};
    } else {
        throw UnsupportedLegacyShape("legacy action '" + action + "' has no normative mapping");
    }

    doc["constraints"] = std::move(constraints);
    if (auto it = raw.find("metadata"); it != raw.end() && it->is_object()) {
        json meta = json::object();
        for (const char* key : {"originator", "createdAt", "originChainId", "tags"})
            if (auto m = it->find(key); m != it->end()) meta[key] = *m;
        if (!meta.empty()) doc["metadata"] = std::move(meta);
    }
    return parse_intent_json(doc);  // SchemaViolation surfaces bad field values
}

}  // namespace ig

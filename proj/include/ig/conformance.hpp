#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"

namespace ig {

using json = nlohmann::json;

// Conformance levels L0-L3 over a declared deployment descriptor, plus the
// machine-checkable slice of the safety checklist. Levels are cumulative:
// each tier requires everything below it.

enum class KeyCustody { RawLocal, SessionScoped, Mpc, TeeHsm };

inline std::string_view custody_name(KeyCustody c) {
    switch (c) {
        case KeyCustody::RawLocal: return "RAW_LOCAL";
        case KeyCustody::SessionScoped: return "SESSION_SCOPED";
        case KeyCustody::Mpc: return "MPC";
        default: return "TEE_HSM";
    }
}

inline std::optional<KeyCustody> custody_from_name(std::string_view name) {
    if (name == "RAW_LOCAL") return KeyCustody::RawLocal;
    if (name == "SESSION_SCOPED") return KeyCustody::SessionScoped;
    if (name == "MPC") return KeyCustody::Mpc;
    if (name == "TEE_HSM") return KeyCustody::TeeHsm;
    return std::nullopt;
}

struct DeploymentDescriptor {
    KeyCustody key_custody = KeyCustody::RawLocal;
    bool on_chain_policy_modules = false;
    bool function_allowlist = false;
    bool contract_allowlist = false;
    bool static_spend_limits = false;
    bool off_chain_policy_engine = false;
    bool mandatory_simulation = false;
    bool dynamic_risk_scoring = false;
    bool quorum_for_high_value = false;
    bool recovery_revocation = false;
    bool audit_logging = false;
    bool private_orderflow = false;
};

inline DeploymentDescriptor descriptor_from_json(const json& doc) {
    std::vector<Finding> findings;
    if (!doc.is_object()) throw SchemaViolation("", "descriptor must be a JSON object");
    DeploymentDescriptor d;
    auto it = doc.find("keyCustody");
    if (it == doc.end() || !it->is_string()) {
        findings.push_back({"/keyCustody", "missing or not a string"});
    } else if (auto c = custody_from_name(it->get_ref<const std::string&>())) {
        d.key_custody = *c;
    } else {
        findings.push_back({"/keyCustody", "not one of [RAW_LOCAL, SESSION_SCOPED, MPC, TEE_HSM]"});
    }
    struct Field {
        const char* key;
        bool DeploymentDescriptor::* member;
    };
    static constexpr Field fields[] = {
        {"onChainPolicyModules", &DeploymentDescriptor::on_chain_policy_modules},
        {"functionAllowlist", &DeploymentDescriptor::function_allowlist},
        {"contractAllowlist", &DeploymentDescriptor::contract_allowlist},
        {"staticSpendLimits", &DeploymentDescriptor::static_spend_limits},
        {"offChainPolicyEngine", &DeploymentDescriptor::off_chain_policy_engine},
        {"mandatorySimulation", &DeploymentDescriptor::mandatory_simulation},
        {"dynamicRiskScoring", &DeploymentDescriptor::dynamic_risk_scoring},
        {"quorumForHighValue", &DeploymentDescriptor::quorum_for_high_value},
        {"recoveryRevocation", &DeploymentDescriptor::recovery_revocation},
        {"auditLogging", &DeploymentDescriptor::audit_logging},
        {"privateOrderflow", &DeploymentDescriptor::private_orderflow},
    };
    for (const Field& f : fields) {
        auto fit = doc.find(f.key);
        if (fit == doc.end() || !fit->is_boolean())
            findings.push_back({std::string("/") + f.key, "missing or not a boolean"});
        else
            d.*f.member = fit->get<bool>();
    }
    for (auto kit = doc.begin(); kit != doc.end(); ++kit) {
        bool known = kit.key() == "keyCustody";
        for (const Field& f : fields) known |= kit.key() == f.key;
        if (!known) findings.push_back({"/" + kit.key(), "unexpected property"});
    }
    if (!findings.empty()) throw SchemaViolation(std::move(findings));
    return d;
}

inline json to_json(const DeploymentDescriptor& d) {
    return json{{"keyCustody", std::string(custody_name(d.key_custody))},
                {"onChainPolicyModules", d.on_chain_policy_modules},
                {"functionAllowlist", d.function_allowlist},
                {"contractAllowlist", d.contract_allowlist},
                {"staticSpendLimits", d.static_spend_limits},
                {"offChainPolicyEngine", d.off_chain_policy_engine},
                {"mandatorySimulation", d.mandatory_simulation},
                {"dynamicRiskScoring", d.dynamic_risk_scoring},
                {"quorumForHighValue", d.quorum_for_high_value},
                {"recoveryRevocation", d.recovery_revocation},
                {"auditLogging", d.audit_logging},
                {"privateOrderflow", d.private_orderflow}};
}

enum class Level { L0, L1, L2, L3 };

inline std::string_view level_name(Level l) {
    switch (l) {
        case Level::L0: return "L0";
        case Level::L1: return "L1";
        case Level::L2: return "L2";
        default: return "L3";
    }
}

struct Criterion {
    const char* id;
    Level level;
    bool (*satisfied)(const DeploymentDescriptor&);
};

inline constexpr std::array<Criterion, 10> kLevelCriteria{{
    {"L1.function-allowlist", Level::L1,
     [](const DeploymentDescriptor& d) { return d.function_allowlist; }},
    {"L1.contract-allowlist", Level::L1,
     [](const DeploymentDescriptor& d) { return d.contract_allowlist; }},
    {"L1.static-spend-limits", Level::L1,
     [](const DeploymentDescriptor& d) { return d.static_spend_limits; }},
    {"L1.onchain-policy-modules", Level::L1,
     [](const DeploymentDescriptor& d) { return d.on_chain_policy_modules; }},
    {"L2.offchain-policy-engine", Level::L2,
     [](const DeploymentDescriptor& d) { return d.off_chain_policy_engine; }},
    {"L2.mandatory-simulation", Level::L2,
     [](const DeploymentDescriptor& d) { return d.mandatory_simulation; }},
    {"L2.dynamic-risk-scoring", Level::L2,
     [](const DeploymentDescriptor& d) { return d.dynamic_risk_scoring; }},
    {"L3.hardware-or-mpc-custody", Level::L3,
     [](const DeploymentDescriptor& d) {
         return d.key_custody == KeyCustody::Mpc || d.key_custody == KeyCustody::TeeHsm;
     }},
    {"L3.quorum-for-high-value", Level::L3,
     [](const DeploymentDescriptor& d) { return d.quorum_for_high_value; }},
    {"L3.recovery-revocation", Level::L3,
     [](const DeploymentDescriptor& d) { return d.recovery_revocation; }},
}};

struct ConformanceReport {
    Level level = Level::L0;
    std::vector<std::string> satisfied;
    std::vector<std::string> missing_for_next;
};

inline ConformanceReport classify(const DeploymentDescriptor& d) {
    ConformanceReport report;
    bool level_ok[4] = {true, true, true, true};
    for (const Criterion& c : kLevelCriteria) {
        if (c.satisfied(d))
            report.satisfied.push_back(c.id);
        else
            level_ok[static_cast<int>(c.level)] = false;
    }
    Level level = Level::L0;
    if (level_ok[1]) {
        level = Level::L1;
        if (level_ok[2]) {
            level = Level::L2;
            if (level_ok[3]) level = Level::L3;
        }
    }
    report.level = level;
    if (level != Level::L3) {
        Level next = static_cast<Level>(static_cast<int>(level) + 1);
        for (const Criterion& c : kLevelCriteria)
            if (c.level <= next && !c.satisfied(d)) report.missing_for_next.push_back(c.id);
    }
    return report;
}

inline json to_json(const ConformanceReport& r) {
    return json{{"level", std::string(level_name(r.level))},
                {"satisfied", r.satisfied},
                {"missingForNext", r.missing_for_next}};
}

// ------------------------------------------------------------- checklist

enum class ChecklistStatus { Pass, Fail, NotMachineCheckable };

struct ChecklistItem {
    std::string section;
    int index = 0;
    std::string text;
    ChecklistStatus status = ChecklistStatus::NotMachineCheckable;
};

struct ChecklistReport {
    std::vector<ChecklistItem> items;

    int failures() const {
        int n = 0;
        for (const auto& i : items)
            if (i.status == ChecklistStatus::Fail) ++n;
        return n;
    }
    int not_checkable() const {
        int n = 0;
        for (const auto& i : items)
            if (i.status == ChecklistStatus::NotMachineCheckable) ++n;
        return n;
    }
};

namespace detail {

using DescriptorPredicate = bool (*)(const DeploymentDescriptor&);

struct ChecklistEntry {
    const char* section;
    int index;
    const char* text;
    DescriptorPredicate check;  // null = not machine-checkable
};

// Fixed mapping table from checklist items onto descriptor fields. Only the
// Authorize pipeline stage, private-orderflow routing and the kill-switch
// item are decidable from a declared descriptor; the rest need live review.
inline constexpr ChecklistEntry kChecklist[] = {
    {"Observe", 1, "Is the agent using multiple independent RPC providers?", nullptr},
    {"Observe", 2, "Does the agent validate integrity and freshness of off-chain API data?", nullptr},
    {"Observe", 3, "Does the agent monitor anomalous on-chain events relevant to its positions?", nullptr},
    {"Observe", 4, "Is the agent robust to oracle manipulation and stale-price hazards?", nullptr},
    {"Observe", 5, "Does the agent subscribe to security alert feeds for depended-upon protocols?", nullptr},
    {"Reason", 1, "Is the agent hardened against instruction hijacking through retrieved content?", nullptr},
    {"Reason", 2, "Does the agent account for MEV and adversarial ordering incentives?", nullptr},
    {"Reason", 3, "Does the agent maintain an internal model of its permissions and limits?", nullptr},
    {"Reason", 4, "Are reasoning traces and tool calls logged for audit review?", nullptr},
    {"Reason", 5, "Does the agent consider gas, fees, and deadline risk in decision-making?", nullptr},
    {"Construct", 1, "Does the agent generate standardized intents rather than ad-hoc calldata?", nullptr},
    {"Construct", 2, "Does the agent simulate every value-bearing action on a forked state prior to signing?", nullptr},
    {"Construct", 3, "Does the agent generate a clear human-readable preview of effects?", nullptr},
    {"Construct", 4, "Does the agent highlight irreversible or high-risk operations?", nullptr},
    {"Construct", 5, "Does every constructed operation include a tight deadline and replay protections?", nullptr},
    {"Authorize", 1, "Does the system use smart accounts where suitable?",
     [](const DeploymentDescriptor& d) { return d.on_chain_policy_modules; }},
    {"Authorize", 2, "Are permissions constrained via on-chain modules (session keys, allowlists, limits)?",
     [](const DeploymentDescriptor& d) { return d.function_allowlist && d.contract_allowlist; }},
    {"Authorize", 3, "Is there an off-chain policy engine for higher-order rules?",
     [](const DeploymentDescriptor& d) { return d.off_chain_policy_engine; }},
    {"Authorize", 4, "Is each policy decision recorded as a verifiable record bound to the intent hash?",
     [](const DeploymentDescriptor& d) { return d.off_chain_policy_engine && d.audit_logging; }},
    {"Authorize", 5, "Is signing isolated in TEE/HSM or distributed via MPC?",
     [](const DeploymentDescriptor& d) {
         return d.key_custody == KeyCustody::Mpc || d.key_custody == KeyCustody::TeeHsm;
     }},
    {"Authorize", 6, "Are keys segmented by authority level and operational purpose?",
     [](const DeploymentDescriptor& d) { return d.key_custody != KeyCustody::RawLocal; }},
    {"Authorize", 7, "Is there a clear revocation process for agent keys and modules?",
     [](const DeploymentDescriptor& d) { return d.recovery_revocation; }},
    {"Authorize", 8, "Are high-value actions gated by multi-party approval or quorum?",
     [](const DeploymentDescriptor& d) { return d.quorum_for_high_value; }},
    {"Authorize", 9, "Are per-transaction and time-window spending limits enforced?",
     [](const DeploymentDescriptor& d) { return d.static_spend_limits; }},
    {"Authorize", 10, "Are policy changes protected via time-locks or staged rollout?",
     [](const DeploymentDescriptor& d) { return d.recovery_revocation; }},
    {"Execute", 1, "Are value-bearing transactions routed via private relays or private orderflow when appropriate?",
     [](const DeploymentDescriptor& d) { return d.private_orderflow; }},
    {"Execute", 2, "Are intent-based venues used when they reduce MEV risk?", nullptr},
    {"Execute", 3, "Does the system estimate fees robustly and adapt to congestion?", nullptr},
    {"Execute", 4, "Does it handle failed or stuck transactions safely?", nullptr},
    {"Execute", 5, "Is execution monitored in real time with alerting?", nullptr},
    {"VerifyRecover", 1, "Does the agent verify outcomes by reading state after execution?", nullptr},
    {"VerifyRecover", 2, "Does it parse events to confirm expected outcomes and detect anomalies?", nullptr},
    {"VerifyRecover", 3, "Does it recover from partial failures in multi-step workflows?", nullptr},
    {"VerifyRecover", 4, "Is there a kill switch that halts operations quickly and reliably?",
     [](const DeploymentDescriptor& d) { return d.recovery_revocation; }},
    {"VerifyRecover", 5, "Is there an incident response runbook with clear escalation steps?", nullptr},
    {"General", 1, "Is the architecture and trust model documented clearly for users and auditors?", nullptr},
    {"General", 2, "Has critical code been audited?", nullptr},
    {"General", 3, "Is there a responsible disclosure or bug bounty program?", nullptr},
    {"General", 4, "Are off-chain communications authenticated and encrypted?", nullptr},
    {"General", 5, "Are secrets stored in a secure vault and rotated under a defined process?", nullptr},
    {"General", 6, "Is the host environment hardened, monitored, and regularly patched?", nullptr},
    {"General", 7, "Is there a safe update process for agent logic and policy rules?", nullptr},
    {"General", 8, "Are benchmarks and safety evaluations reported in a reproducible manner?", nullptr},
    {"General", 9, "Is there a governance process for policy changes and emergency actions?", nullptr},
    {"General", 10, "Do users have clear risk disclosures and a dispute-resolution pathway?", nullptr},
};

}  // namespace detail

inline ChecklistReport audit_checklist(const DeploymentDescriptor& d) {
    ChecklistReport report;
    for (const auto& entry : detail::kChecklist) {
        ChecklistItem item;
        item.section = entry.section;
        item.index = entry.index;
        item.text = entry.text;
        if (entry.check)
            item.status = entry.check(d) ? ChecklistStatus::Pass : ChecklistStatus::Fail;
        else
            item.status = ChecklistStatus::NotMachineCheckable;
        report.items.push_back(std::move(item));
    }
    return report;
}

inline json to_json(const ChecklistReport& r) {
    json items = json::array();
    for (const auto& i : r.items) {
        const char* status = i.status == ChecklistStatus::Pass   ? "pass"
                             : i.status == ChecklistStatus::Fail ? "fail"
                                                                 : "not-machine-checkable";
        items.push_back(json{{"section", i.section},
                             {"index", i.index},
                             {"text", i.text},
                             {"status", status}});
    }
    return json{{"items", std::move(items)},
                {"failures", r.failures()},
                {"notMachineCheckable", r.not_checkable()}};
}

}  // namespace ig

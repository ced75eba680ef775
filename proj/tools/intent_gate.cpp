// intent-gate: command-line front end over the TIS/PDR control plane.
// Every time-dependent command takes --now; nothing reads the wall clock, so
// CI runs and golden files stay reproducible. stdout carries exactly one
// JSON document (canonical form) except `canonicalize` (raw bytes) and
// `simulate` (JSON lines); diagnostics go to stderr.

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ig/conformance.hpp"
#include "ig/intent.hpp"
#include "ig/legacy_intent.hpp"
#include "ig/pdr.hpp"
#include "ig/pipeline.hpp"
#include "ig/policy.hpp"
#include "ig/signer_gate.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kPolicyRejected = 3,
    kGateRefused = 4,
    kIoOrCrypto = 5,
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ig::Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ig::json parse_file(const std::string& path) {
    ig::json doc = ig::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ig::MalformedJson("not well-formed JSON: " + path);
    return doc;
}

ig::Intent load_intent(const std::string& path) {
    return ig::parse_intent_json(parse_file(path));
}

ig::PolicyDecisionRecord load_pdr(const std::string& path) {
    return ig::parse_pdr_json(parse_file(path));
}

ig::Keypair load_key(const std::string& path) {
    std::string text = read_file(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' '))
        text.pop_back();
    return ig::keygen_from_hex(text);
}

ig::TrustAnchors load_anchors(const std::string& path, const std::string& identity) {
    return ig::anchors_from_json(parse_file(path), identity);
}

void emit(const ig::json& doc) { std::cout << ig::canonicalize(doc) << "\n"; }

std::string default_home_path(const char* leaf) {
    const char* home = std::getenv("INTENT_GATE_HOME");
    if (!home || !*home) return {};
    return std::string(home) + "/" + leaf;
}

// Serializes concurrent gate invocations on one journal.
class FileLock {
public:
    explicit FileLock(const std::string& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0600);
        if (fd_ < 0) throw ig::Error("cannot open registry journal: " + path);
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw ig::Error("cannot lock registry journal: " + path);
        }
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

int cmd_validate(const std::string& file) {
    ig::json doc = parse_file(file);
    if (!doc.is_object()) throw ig::SchemaViolation("", "document must be a JSON object");
    bool tis = doc.contains("action");
    bool pdr = doc.contains("decision");
    if (tis == pdr) {
        std::cerr << "cannot tell TIS from PDR: document has "
                  << (tis ? "both `action` and `decision`" : "neither `action` nor `decision`")
                  << "\n";
        return kUsage;
    }
    auto findings = tis ? ig::check_intent_document(doc) : ig::check_pdr_document(doc);
    ig::json out{{"type", tis ? "TIS" : "PDR"}, {"valid", findings.empty()}};
    ig::json rows = ig::json::array();
    for (const auto& f : findings) rows.push_back(ig::json{{"path", f.path}, {"reason", f.reason}});
    out["findings"] = std::move(rows);
    emit(out);
    return findings.empty() ? kOk : kValidation;
}

int cmd_keygen(const std::string& seed_hex, const std::string& out_path) {
    ig::Keypair key = ig::keygen_from_hex(seed_hex);
    int fd = ::open(out_path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0600);
    if (fd < 0) throw ig::Error("cannot create key file: " + out_path);
    std::uint8_t secret[32];
    key.secret.to_bytes_be(secret);
    std::string line = ig::hex::encode0x(std::span<const std::uint8_t>(secret, 32)) + "\n";
    if (::write(fd, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
        ::close(fd);
        throw ig::Error("short write to key file: " + out_path);
    }
    ::close(fd);
    emit(ig::json{{"address", key.address.str()}, {"keyFile", out_path}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"intent-gate: TIS/PDR policy-gated execution toolkit"};
    app.require_subcommand(1);

    std::string file, tis_path, pdr_path, policy_path, ledger_path, key_path, anchors_path;
    std::string identity, audience, issuer_id, seed_hex, out_path, registry_path, audit_path;
    std::string descriptor_path, scenario_path;
    std::int64_t now = 0, ttl = 0;
    std::int64_t legacy_chain_id = 1;
    bool level_only = false;
    bool legacy = false;

    auto* validate = app.add_subcommand("validate", "validate a TIS or PDR document");
    validate->add_option("file", file, "document path")->required();

    auto* canonical = app.add_subcommand("canonicalize", "canonical bytes of a JSON document");
    canonical->add_option("file", file, "document path")->required();

    auto* hash = app.add_subcommand("hash", "keccak-256 of the canonicalized TIS");
    hash->add_option("file", file, "TIS path")->required();
    hash->add_flag("--legacy", legacy, "input uses the legacy inputs/outputs shape");
    hash->add_option("--chain-id", legacy_chain_id, "default chainId for legacy token entries");

    auto* keygen = app.add_subcommand("keygen", "deterministic keypair from a 32-byte seed");
    keygen->add_option("--seed", seed_hex, "32-byte seed as hex")->required();
    keygen->add_option("--out", out_path, "secret key output file (mode 0600)")->required();

    auto* preview = app.add_subcommand("preview", "human-readable description of a TIS");
    preview->add_option("file", file, "TIS path")->required();
    preview->add_flag("--legacy", legacy, "input uses the legacy inputs/outputs shape");
    preview->add_option("--chain-id", legacy_chain_id, "default chainId for legacy token entries");

    auto* policy = app.add_subcommand("policy", "policy engine");
    auto* policy_eval = policy->add_subcommand("eval", "evaluate a TIS against a policy");
    policy_eval->add_option("--tis", tis_path)->required();
    policy_eval->add_option("--policy", policy_path)->required();
    policy_eval->add_option("--ledger", ledger_path, "spend ledger JSONL");
    policy_eval->add_option("--now", now, "evaluation clock (unix seconds)")->required();

    auto* pdr = app.add_subcommand("pdr", "policy decision records");
    auto* pdr_issue = pdr->add_subcommand("issue", "evaluate and issue a signed PDR");
    pdr_issue->add_option("--tis", tis_path)->required();
    pdr_issue->add_option("--policy", policy_path)->required();
    pdr_issue->add_option("--key", key_path, "issuer secret key file")->required();
    pdr_issue->add_option("--audience", audience)->required();
    pdr_issue->add_option("--ttl", ttl, "validity in seconds")->required();
    pdr_issue->add_option("--now", now, "issuance clock (unix seconds)")->required();
    pdr_issue->add_option("--issuer", issuer_id, "issuer identifier (defaults to key address)");
    pdr_issue->add_option("--ledger", ledger_path, "spend ledger JSONL");

    auto* pdr_verify = pdr->add_subcommand("verify", "run the signer-gate checks, no state");
    pdr_verify->add_option("--tis", tis_path)->required();
    pdr_verify->add_option("--pdr", pdr_path)->required();
    pdr_verify->add_option("--anchors", anchors_path)->required();
    pdr_verify->add_option("--identity", identity, "this gate's audience string")->required();
    pdr_verify->add_option("--now", now)->required();

    auto* gate = app.add_subcommand("gate", "verify, consume replay state, emit envelope");
    gate->add_option("--tis", tis_path)->required();
    gate->add_option("--pdr", pdr_path)->required();
    gate->add_option("--anchors", anchors_path)->required();
    gate->add_option("--identity", identity)->required();
    gate->add_option("--now", now)->required();
    gate->add_option("--registry", registry_path, "registry journal (default $INTENT_GATE_HOME/registry.jsonl)");
    gate->add_option("--audit", audit_path, "audit log (default $INTENT_GATE_HOME/audit.jsonl)");

    auto* simulate = app.add_subcommand("simulate", "run a scenario file, print transcripts");
    simulate->add_option("file", scenario_path)->required();

    auto* audit = app.add_subcommand("audit", "classify a deployment descriptor");
    audit->add_option("--descriptor", descriptor_path)->required();
    audit->add_flag("--level-only", level_only, "print only the conformance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*validate) return cmd_validate(file);

        if (*canonical) {
            std::cout << ig::canonicalize(parse_file(file));
            return kOk;
        }

        if (*hash) {
            ig::Intent intent = legacy
                                    ? ig::normalize_legacy_intent(parse_file(file),
                                                                  ig::LegacyOptions{legacy_chain_id})
                                    : load_intent(file);
            emit(ig::json{{"tisHash", ig::intent_hash(intent).str()}});
            return kOk;
        }

        if (*keygen) return cmd_keygen(seed_hex, out_path);

        if (*preview) {
            ig::Intent intent = legacy
                                    ? ig::normalize_legacy_intent(parse_file(file),
                                                                  ig::LegacyOptions{legacy_chain_id})
                                    : load_intent(file);
            emit(ig::json{{"preview", ig::render_preview(intent)}});
            return kOk;
        }

        if (*policy_eval) {
            ig::Intent intent = load_intent(tis_path);
            ig::PolicySet rules = ig::load_policy_file(policy_path);
            ig::EvaluationContext ctx =
                ledger_path.empty() ? ig::EvaluationContext{} : ig::load_spend_ledger(ledger_path, now);
            ctx.clock = now;
            ig::Decision decision = ig::evaluate(intent, rules, ctx);
            emit(ig::to_json(decision));
            return decision.outcome == ig::Outcome::Approved ? kOk : kPolicyRejected;
        }

        if (*pdr_issue) {
            ig::Intent intent = load_intent(tis_path);
            ig::PolicySet rules = ig::load_policy_file(policy_path);
            ig::Keypair key = load_key(key_path);
            ig::EvaluationContext ctx =
                ledger_path.empty() ? ig::EvaluationContext{} : ig::load_spend_ledger(ledger_path, now);
            ctx.clock = now;
            ig::Decision decision = ig::evaluate(intent, rules, ctx);
            std::string id = issuer_id.empty() ? key.address.str() : issuer_id;
            ig::PolicyDecisionRecord record =
                ig::issue_pdr(intent, decision, key, id, audience, ttl, ctx);
            emit(ig::to_json(record));
            return decision.outcome == ig::Outcome::Approved ? kOk : kPolicyRejected;
        }

        if (*pdr_verify) {
            ig::Intent intent = load_intent(tis_path);
            ig::PolicyDecisionRecord record = load_pdr(pdr_path);
            ig::TrustAnchors anchors = load_anchors(anchors_path, identity);
            ig::VerificationReport report = ig::verify_pair(intent, record, anchors, now);
            emit(ig::to_json(report));
            return report.ok ? kOk : kGateRefused;
        }

        if (*gate) {
            ig::Intent intent = load_intent(tis_path);
            ig::PolicyDecisionRecord record = load_pdr(pdr_path);
            ig::TrustAnchors anchors = load_anchors(anchors_path, identity);
            if (registry_path.empty()) registry_path = default_home_path("registry.jsonl");
            if (registry_path.empty()) {
                std::cerr << "no --registry given and INTENT_GATE_HOME is unset\n";
                return kUsage;
            }
            if (audit_path.empty()) audit_path = default_home_path("audit.jsonl");
            FileLock lock(registry_path);
            ig::NonceRegistry registry;
            registry.open_journal(registry_path);
            ig::AuditLog audit_log(audit_path.empty() ? std::string("/dev/null") : audit_path);
            try {
                ig::ExecutionEnvelope env =
                    ig::gate(intent, record, anchors, registry, now, &audit_log);
                emit(ig::to_json(env));
                return kOk;
            } catch (const ig::GateRefused& e) {
                emit(ig::to_json(e.report));
                return kGateRefused;
            }
        }

        if (*simulate) {
            std::string dir = ".";
            if (auto slash = scenario_path.find_last_of('/'); slash != std::string::npos)
                dir = scenario_path.substr(0, slash);
            ig::ScenarioOutcome outcome = ig::run_scenario_document(parse_file(scenario_path), dir);
            for (const auto& t : outcome.transcripts) {
                ig::json doc = ig::to_json(t);
                for (const auto& event : doc["events"]) std::cout << ig::canonicalize(event) << "\n";
                std::cout << ig::canonicalize(doc["summary"]) << "\n";
            }
            std::cout << ig::canonicalize(ig::json{{"ledger", outcome.ledger_snapshot},
                                                   {"auditRecords", outcome.audit_records}})
                      << "\n";
            return kOk;
        }

        if (*audit) {
            ig::DeploymentDescriptor d = ig::descriptor_from_json(parse_file(descriptor_path));
            ig::ConformanceReport report = ig::classify(d);
            if (level_only) {
                emit(ig::json{{"level", std::string(ig::level_name(report.level))}});
            } else {
                emit(ig::json{{"conformance", ig::to_json(report)},
                              {"checklist", ig::to_json(ig::audit_checklist(d))}});
            }
            return kOk;
        }
    } catch (const ig::MalformedJson& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ig::SchemaViolation& e) {
        std::cerr << "error: schema violation: " << e.what() << "\n";
        return kValidation;
    } catch (const ig::UnsupportedLegacyShape& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ig::GateRefused& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGateRefused;
    } catch (const ig::PointerUnresolvable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGateRefused;
    } catch (const ig::ResultInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGateRefused;
    } catch (const ig::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoOrCrypto;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoOrCrypto;
    }
    return kUsage;
}

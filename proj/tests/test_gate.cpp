#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdio>
#include <latch>
#include <thread>

#include "ig/signer_gate.hpp"
#include "test_helpers.hpp"

using ig::json;

namespace {

igtest::IssuedPair swap_pair() {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::Intent intent = ig::parse_intent_json(cs["normalized"]);
    return igtest::make_issued_pair(intent);
}

ig::GateStep expect_failure(const ig::VerificationReport& report) {
    REQUIRE_FALSE(report.ok);
    auto failed = report.failed_step();
    REQUIRE(failed.has_value());
    // every step before the failure passed; the failing step is last
    CHECK(report.steps.back().step == *failed);
    for (std::size_t i = 0; i + 1 < report.steps.size(); ++i) CHECK(report.steps[i].pass);
    return *failed;
}

}  // namespace

TEST_CASE("a freshly issued pair passes all seven checks in order") {
    igtest::IssuedPair pair = swap_pair();
    ig::NonceRegistry registry;
    ig::VerificationReport report =
        ig::verify_pair(pair.intent, pair.pdr, pair.anchors, pair.clock, &registry);
    REQUIRE(report.ok);
    REQUIRE(report.steps.size() == 7);
    const ig::GateStep expected[] = {
        ig::GateStep::Signature,    ig::GateStep::IssuerTrust,     ig::GateStep::Audience,
        ig::GateStep::TimeValidity, ig::GateStep::HashBinding,     ig::GateStep::DecisionOutcome,
        ig::GateStep::Replay,
    };
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(report.steps[i].step == expected[i]);
        CHECK(report.steps[i].pass);
    }
}

TEST_CASE("each verification step fails exactly where intended") {
    igtest::IssuedPair pair = swap_pair();

    SECTION("flipped signature byte fails at Signature") {
        ig::PolicyDecisionRecord pdr = pair.pdr;
        std::string sig = pdr.signature.signature;
        sig[10] = sig[10] == 'a' ? 'b' : 'a';
        pdr.signature.signature = sig;
        CHECK(expect_failure(ig::verify_pair(pair.intent, pdr, pair.anchors, pair.clock)) ==
              ig::GateStep::Signature);
    }
    SECTION("non-ES256K alg fails at Signature") {
        ig::PolicyDecisionRecord pdr = pair.pdr;
        pdr.signature.alg = "ES256A";
        CHECK(expect_failure(ig::verify_pair(pair.intent, pdr, pair.anchors, pair.clock)) ==
              ig::GateStep::Signature);
    }
    SECTION("unknown issuer fails at IssuerTrust (signature still valid)") {
        ig::Intent intent = pair.intent;
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord rogue = ig::issue_pdr(
            intent, pair.pdr.decision, pair.issuer_key, "https://rogue.example",
            pair.pdr.audience, 3600, ctx);
        CHECK(expect_failure(ig::verify_pair(intent, rogue, pair.anchors, pair.clock)) ==
              ig::GateStep::IssuerTrust);
    }
    SECTION("anchored address mismatch fails at IssuerTrust") {
        ig::TrustAnchors anchors = pair.anchors;
        anchors.issuers["https://policy.test"] =
            *ig::SemanticAddress::parse("0x00000000000000000000000000000000000000dd");
        CHECK(expect_failure(ig::verify_pair(pair.intent, pair.pdr, anchors, pair.clock)) ==
              ig::GateStep::IssuerTrust);
    }
    SECTION("wrong audience fails at Audience") {
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord other = ig::issue_pdr(
            pair.intent, pair.pdr.decision, pair.issuer_key, "https://policy.test",
            "https://other-signer.test", 3600, ctx);
        CHECK(expect_failure(ig::verify_pair(pair.intent, other, pair.anchors, pair.clock)) ==
              ig::GateStep::Audience);
    }
    SECTION("clock at expiresAt fails at TimeValidity (expiry is exclusive)") {
        CHECK(expect_failure(ig::verify_pair(pair.intent, pair.pdr, pair.anchors,
                                             pair.pdr.expires_at)) == ig::GateStep::TimeValidity);
        // one second before expiry still passes the time check
        ig::VerificationReport report =
            ig::verify_pair(pair.intent, pair.pdr, pair.anchors, pair.pdr.expires_at - 1);
        CHECK(report.ok);
    }
    SECTION("issuedAt beyond forward skew fails at TimeValidity") {
        CHECK(expect_failure(ig::verify_pair(pair.intent, pair.pdr, pair.anchors,
                                             pair.pdr.issued_at - 31)) ==
              ig::GateStep::TimeValidity);
        CHECK(ig::verify_pair(pair.intent, pair.pdr, pair.anchors, pair.pdr.issued_at - 30).ok);
    }
    SECTION("a single changed amount digit fails at HashBinding") {
        ig::Intent tampered = pair.intent;
        std::get<ig::Swap>(tampered.action).amount_in =
            *ig::UintDecimal::from_string("5000000001");
        CHECK(expect_failure(ig::verify_pair(tampered, pair.pdr, pair.anchors, pair.clock)) ==
              ig::GateStep::HashBinding);
    }
    SECTION("REJECTED outcome fails at DecisionOutcome") {
        ig::Decision rejected;
        rejected.outcome = ig::Outcome::Rejected;
        rejected.policy_id = "test-policy-v1";
        rejected.reason = "PerTxCap: amount exceeds cap";
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord pdr = ig::issue_pdr(pair.intent, rejected, pair.issuer_key,
                                                     "https://policy.test",
                                                     "https://signer.test", 3600, ctx);
        CHECK(expect_failure(ig::verify_pair(pair.intent, pdr, pair.anchors, pair.clock)) ==
              ig::GateStep::DecisionOutcome);
    }
    SECTION("consumed pdrId fails at Replay") {
        ig::NonceRegistry registry;
        registry.consume(ig::replay_subject_key(pair.intent, pair.pdr),
                         pair.intent.constraints.nonce, pair.pdr.pdr_id, pair.clock);
        CHECK(expect_failure(ig::verify_pair(pair.intent, pair.pdr, pair.anchors, pair.clock,
                                             &registry)) == ig::GateStep::Replay);
    }
}

TEST_CASE("apply_modifications follows RFC 6901 semantics and re-validates") {
    igtest::IssuedPair pair = swap_pair();

    SECTION("REPLACE tightens the deadline") {
        ig::Intent out = ig::apply_modifications(
            pair.intent, {{"/constraints/deadline", ig::ModOp::Replace, json(1767229000)}});
        CHECK(out.constraints.deadline == 1767229000);
    }
    SECTION("REMOVE drops preferences and the result stays valid") {
        ig::Intent with_prefs = pair.intent;
        ig::Preferences p;
        p.privacy_mode = ig::PrivacyMode::Private;
        with_prefs.preferences = p;
        ig::Intent out =
            ig::apply_modifications(with_prefs, {{"/preferences", ig::ModOp::Remove, {}}});
        CHECK_FALSE(out.preferences.has_value());
        CHECK(ig::validate_intent(out).ok());
    }
    SECTION("ADD inserts an optional member") {
        ig::Intent out = ig::apply_modifications(
            pair.intent, {{"/action/slippageBps", ig::ModOp::Add, json(25)}});
        CHECK(std::get<ig::Swap>(out.action).slippage_bps == 25);
    }
    SECTION("modifications apply in array order") {
        ig::Intent out = ig::apply_modifications(
            pair.intent, {{"/constraints/deadline", ig::ModOp::Replace, json(1)},
                          {"/constraints/deadline", ig::ModOp::Replace, json(2)}});
        CHECK(out.constraints.deadline == 2);
    }
    SECTION("REPLACE of a missing member is PointerUnresolvable") {
        CHECK_THROWS_AS(ig::apply_modifications(
                            pair.intent, {{"/preferences/routing", ig::ModOp::Replace, json("MIN_GAS")}}),
                        ig::PointerUnresolvable);
    }
    SECTION("REMOVE of a missing member is PointerUnresolvable") {
        CHECK_THROWS_AS(
            ig::apply_modifications(pair.intent, {{"/action/recipient", ig::ModOp::Remove, {}}}),
            ig::PointerUnresolvable);
    }
    SECTION("schema-breaking modification is ResultInvalid") {
        CHECK_THROWS_AS(ig::apply_modifications(
                            pair.intent, {{"/action/type", ig::ModOp::Replace, json("TRANSFER")}}),
                        ig::ResultInvalid);
    }
    SECTION("touching the replay nonce is forbidden") {
        CHECK_THROWS_AS(ig::apply_modifications(
                            pair.intent, {{"/constraints/nonce", ig::ModOp::Add, json("1")}}),
                        ig::PointerUnresolvable);
    }
    SECTION("a non-empty modification list changes the hash") {
        ig::Intent out = ig::apply_modifications(
            pair.intent, {{"/constraints/deadline", ig::ModOp::Replace, json(1767229000)}});
        CHECK_FALSE(ig::intent_hash(out) == ig::intent_hash(pair.intent));
    }
}

TEST_CASE("gate computes componentwise-minimum effective limits") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));

    SECTION("intent without a gas bound takes the PDR bound ") {
        ig::Intent intent = ig::parse_intent_json(cs["normalized"]);
        igtest::IssuedPair pair = igtest::make_issued_pair(intent);
        ig::PolicyDecisionRecord pdr = pair.pdr;
        ig::Decision decision = pdr.decision;
        ig::BoundConstraints bc;
        bc.max_gas_price_wei = *ig::UintDecimal::from_string("60000000000");
        decision.bound_constraints = bc;
        ig::EvaluationContext ctx;
        ctx.clock = pdr.issued_at;
        pdr = ig::issue_pdr(intent, decision, pair.issuer_key, "https://policy.test",
                            "https://signer.test", 3600, ctx);
        ig::NonceRegistry registry;
        ig::ExecutionEnvelope env = ig::gate(intent, pdr, pair.anchors, registry, pair.clock);
        REQUIRE(env.effective_max_gas_price_wei.has_value());
        CHECK(env.effective_max_gas_price_wei->str() == "60000000000");
        CHECK(env.effective_deadline == intent.constraints.deadline);
        CHECK(env.original_tis_hash == pdr.tis_hash);
    }
    SECTION("intent bound below the PDR bound wins") {
        ig::Intent intent = ig::parse_intent_json(cs["normalized"]);
        intent.constraints.max_gas_price_wei = *ig::UintDecimal::from_string("50000000000");
        igtest::IssuedPair pair = igtest::make_issued_pair(intent);
        ig::Decision decision = pair.pdr.decision;
        ig::BoundConstraints bc;
        bc.max_gas_price_wei = *ig::UintDecimal::from_string("60000000000");
        decision.bound_constraints = bc;
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord pdr = ig::issue_pdr(intent, decision, pair.issuer_key,
                                                     "https://policy.test", "https://signer.test",
                                                     3600, ctx);
        ig::NonceRegistry registry;
        ig::ExecutionEnvelope env = ig::gate(intent, pdr, pair.anchors, registry, pair.clock);
        CHECK(env.effective_max_gas_price_wei->str() == "50000000000");
    }
    SECTION("value bounds take the componentwise minimum for delegations") {
        ig::Intent intent;
        intent.intent_id = "10000000-0000-4000-8000-00000000000d";
        ig::Delegate d;
        d.delegatee = *ig::SemanticAddress::parse("0x00000000000000000000000000000000000000aa");
        d.scope.max_value_wei = *ig::UintDecimal::from_string("900");
        intent.action = d;
        intent.constraints.deadline = 2000000000;
        igtest::IssuedPair pair = igtest::make_issued_pair(intent);
        ig::Decision decision = pair.pdr.decision;
        ig::BoundConstraints bc;
        bc.max_value_wei = *ig::UintDecimal::from_string("1000");
        decision.bound_constraints = bc;
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord pdr = ig::issue_pdr(intent, decision, pair.issuer_key,
                                                     "https://policy.test", "https://signer.test",
                                                     3600, ctx);
        ig::NonceRegistry registry;
        ig::ExecutionEnvelope env = ig::gate(intent, pdr, pair.anchors, registry, pair.clock);
        REQUIRE(env.effective_max_value_wei.has_value());
        CHECK(env.effective_max_value_wei->str() == "900");
    }
    SECTION("tight deadline caps the effective deadline") {
        ig::Intent intent = ig::parse_intent_json(cs["normalized"]);
        igtest::IssuedPair pair = igtest::make_issued_pair(intent);
        ig::Decision decision = pair.pdr.decision;
        ig::BoundConstraints bc;
        bc.tight_deadline = intent.constraints.deadline - 500;
        decision.bound_constraints = bc;
        ig::EvaluationContext ctx;
        ctx.clock = pair.pdr.issued_at;
        ig::PolicyDecisionRecord pdr = ig::issue_pdr(intent, decision, pair.issuer_key,
                                                     "https://policy.test", "https://signer.test",
                                                     3600, ctx);
        ig::NonceRegistry registry;
        ig::ExecutionEnvelope env = ig::gate(intent, pdr, pair.anchors, registry, pair.clock);
        CHECK(env.effective_deadline == intent.constraints.deadline - 500);
        CHECK(env.effective_deadline <= intent.constraints.deadline);
    }
}

TEST_CASE("replay protection: the same approval never executes twice") {
    igtest::IssuedPair pair = swap_pair();
    ig::NonceRegistry registry;
    ig::AuditLog audit;
    CHECK_NOTHROW(ig::gate(pair.intent, pair.pdr, pair.anchors, registry, pair.clock, &audit));
    CHECK_THROWS_AS(ig::gate(pair.intent, pair.pdr, pair.anchors, registry, pair.clock, &audit),
                    ig::GateRefused);
    CHECK(audit.size() == 2);
    CHECK(audit.records()[0]["outcome"] == "EXECUTED");
    CHECK(audit.records()[1]["outcome"] == "REFUSED");
    CHECK(audit.records()[1]["failedStep"] == "Replay");
}

TEST_CASE("consume semantics: fresh accepts, repeats refuse, no state change on refusal") {
    ig::NonceRegistry registry;
    auto nonce = ig::UintDecimal::from_string("7");
    CHECK(registry.consume("alice", *nonce, "10000000-0000-4000-8000-000000000001", 1));
    std::size_t size = registry.size();
    CHECK_FALSE(registry.consume("alice", *nonce, "10000000-0000-4000-8000-000000000002", 2));
    CHECK_FALSE(registry.consume("bob", std::nullopt, "10000000-0000-4000-8000-000000000001", 3));
    CHECK(registry.size() == size);
    CHECK(registry.consume("bob", *nonce, "10000000-0000-4000-8000-000000000003", 4));
    CHECK(registry.consume("alice", std::nullopt, "10000000-0000-4000-8000-000000000004", 5));
}

TEST_CASE("64-way concurrent consume of one (subject, nonce) admits exactly one") {
    for (int round = 0; round < 4; ++round) {
        ig::NonceRegistry registry;
        std::atomic<int> successes{0};
        std::latch go(1);
        std::vector<std::thread> threads;
        for (int i = 0; i < 64; ++i) {
            threads.emplace_back([&, i] {
                go.wait();
                auto nonce = ig::UintDecimal::from_string("42");
                std::string pdr_id = "10000000-0000-4000-8000-" + std::string(11, '0') +
                                     std::string(1, static_cast<char>('a' + i % 26));
                if (registry.consume("shared-subject", *nonce, pdr_id + std::to_string(i), round))
                    successes.fetch_add(1);
            });
        }
        go.count_down();
        for (auto& t : threads) t.join();
        CHECK(successes.load() == 1);
    }
}

TEST_CASE("journal replay preserves refusals across a restart") {
    std::string path = "/tmp/ig_test_registry_journal.jsonl";
    std::remove(path.c_str());
    igtest::IssuedPair pair = swap_pair();
    {
        ig::NonceRegistry registry;
        registry.open_journal(path);
        CHECK_NOTHROW(ig::gate(pair.intent, pair.pdr, pair.anchors, registry, pair.clock));
    }
    {
        ig::NonceRegistry restarted;
        restarted.open_journal(path);
        CHECK_THROWS_AS(ig::gate(pair.intent, pair.pdr, pair.anchors, restarted, pair.clock),
                        ig::GateRefused);
    }
    std::remove(path.c_str());
}

TEST_CASE("no consume on failed verification") {
    igtest::IssuedPair pair = swap_pair();
    ig::NonceRegistry registry;
    ig::Intent tampered = pair.intent;
    std::get<ig::Swap>(tampered.action).amount_in = *ig::UintDecimal::from_string("1");
    CHECK_THROWS_AS(ig::gate(tampered, pair.pdr, pair.anchors, registry, pair.clock),
                    ig::GateRefused);
    CHECK(registry.size() == 0);
    // the untampered pair still goes through afterwards
    CHECK_NOTHROW(ig::gate(pair.intent, pair.pdr, pair.anchors, registry, pair.clock));
}

TEST_CASE("gate applies PDR modifications before execution") {
    igtest::IssuedPair pair = swap_pair();
    ig::Decision decision = pair.pdr.decision;
    decision.modified_parameters = std::vector<ig::Modification>{
        {"/constraints/deadline", ig::ModOp::Replace, json(1767229900)}};
    ig::EvaluationContext ctx;
    ctx.clock = pair.pdr.issued_at;
    ig::PolicyDecisionRecord pdr =
        ig::issue_pdr(pair.intent, decision, pair.issuer_key, "https://policy.test",
                      "https://signer.test", 3600, ctx);
    ig::NonceRegistry registry;
    ig::ExecutionEnvelope env = ig::gate(pair.intent, pdr, pair.anchors, registry, pair.clock);
    CHECK(env.intent.constraints.deadline == 1767229900);
    CHECK(env.effective_deadline == 1767229900);
    CHECK(env.original_tis_hash == pdr.tis_hash);          // hash binds the original
    CHECK_FALSE(ig::intent_hash(env.intent) == pdr.tis_hash);  // result necessarily differs
}

TEST_CASE("audit totality: every gate call appends exactly one record") {
    igtest::IssuedPair pair = swap_pair();
    ig::NonceRegistry registry;
    ig::AuditLog audit;
    std::size_t calls = 0;

    auto gate_once = [&](const ig::Intent& intent, const ig::PolicyDecisionRecord& pdr,
                         std::int64_t clock) {
        ++calls;
        try {
            ig::gate(intent, pdr, pair.anchors, registry, clock, &audit);
        } catch (const ig::Error&) {
        }
        CHECK(audit.size() == calls);
    };

    gate_once(pair.intent, pair.pdr, pair.clock);                  // pass
    gate_once(pair.intent, pair.pdr, pair.clock);                  // replay refusal
    gate_once(pair.intent, pair.pdr, pair.pdr.expires_at + 100);   // time refusal
    ig::Intent tampered = pair.intent;
    std::get<ig::Swap>(tampered.action).amount_in = *ig::UintDecimal::from_string("2");
    gate_once(tampered, pair.pdr, pair.clock);                     // hash refusal
}

#include <catch2/catch_amalgamated.hpp>

#include "ig/pipeline.hpp"
#include "test_helpers.hpp"

using ig::json;

namespace {

const ig::TokenKey kUsdc{1, "0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48"};
const ig::TokenKey kWeth{1, "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2"};
const char* kSender = "0x000000000000000000000000000000000000a9e7";
const char* kPool = "0x0000000000000000000000000000000000900001";
const char* kService = "0x000000000000000000000000000000000000beef";

json load_scenario(const std::string& name) {
    return igtest::load_json(igtest::samples_path(name));
}

ig::SubscriptionSpec subscription_spec(int months) {
    ig::SubscriptionSpec spec;
    spec.policy = ig::load_policy_file(igtest::samples_path("subscription.policy.json"));
    spec.months = months;
    spec.issuer.id = "https://policy.local/billing";
    spec.issuer.key = ig::keygen_from_hex("0x" + std::string(64, '2'));
    spec.issuer.audience = "https://signer.local/subscriptions";
    spec.issuer.ttl_seconds = 600;
    spec.anchors.self_identity = spec.issuer.audience;
    spec.anchors.issuers.emplace(spec.issuer.id, spec.issuer.key.address);
    return spec;
}

}  // namespace

TEST_CASE("rebalancing-swap scenario runs the full pipeline to EXECUTED") {
    ig::ScenarioOutcome outcome =
        ig::run_scenario_document(load_scenario("rebalance_swap.scenario.json"), IG_SAMPLES_DIR);
    REQUIRE(outcome.transcripts.size() == 1);
    const ig::PipelineTranscript& t = outcome.transcripts[0];
    REQUIRE(t.executed);

    const ig::Stage expected[] = {ig::Stage::Observe,   ig::Stage::ConstructTis,
                                  ig::Stage::PolicyEval, ig::Stage::PdrIssued,
                                  ig::Stage::GateVerify, ig::Stage::Execute,
                                  ig::Stage::VerifyState};
    REQUIRE(t.events.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(t.events[i].stage == expected[i]);

    // the in-pipeline PDR equals the independently frozen golden
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    CHECK(t.events[3].detail.find(cs["pdr_id"].get<std::string>()) != std::string::npos);
    CHECK(t.events[3].detail.find("2026-01-01T01:10:00Z") != std::string::npos);
}

TEST_CASE("rebalancing-swap scenario moves the balances it promises") {
    json doc = load_scenario("rebalance_swap.scenario.json");
    ig::ScenarioSpec spec = ig::scenario_from_json(doc, IG_SAMPLES_DIR);
    ig::MockLedger ledger = ig::ledger_from_json(doc["ledger"]);
    ig::UintDecimal usdc_before = ledger.total_supply(kUsdc);
    ig::UintDecimal weth_before = ledger.total_supply(kWeth);
    ig::EvaluationContext ctx;
    ig::NonceRegistry registry;
    ig::PipelineTranscript t = ig::run_scenario(spec, ledger, ctx, registry);
    REQUIRE(t.executed);
    CHECK(ledger.balance_of(kSender, kUsdc).str() == "7000000000");   // 12000 - 5000 USDC
    CHECK(ledger.balance_of(kPool, kUsdc).str() == "5000000000");
    CHECK(ledger.balance_of(kSender, kWeth).str() == "1500000000000000000");  // min fill
    // conservation per token
    CHECK(ledger.total_supply(kUsdc) == usdc_before);
    CHECK(ledger.total_supply(kWeth) == weth_before);
    // spend accounting happened exactly once
    CHECK(ctx.spend_ledger.size() == 1);
    CHECK(ctx.spend_ledger[0].amount->str() == "5000000000");
}

TEST_CASE("tampered amount between issuance and gate refuses at GATE_VERIFY") {
    ig::ScenarioOutcome outcome =
        ig::run_scenario_document(load_scenario("tamper.scenario.json"), IG_SAMPLES_DIR);
    REQUIRE(outcome.transcripts.size() == 1);
    const ig::PipelineTranscript& t = outcome.transcripts[0];
    CHECK_FALSE(t.executed);
    REQUIRE(t.refused_at == ig::Stage::GateVerify);
    CHECK(t.events.back().detail.find("HashBinding") != std::string::npos);
    // no balances moved
    for (const auto& row : outcome.ledger_snapshot["balances"])
        CHECK((row["amount"] == "12000000000" || row["amount"] == "4000000000000000000"));
}

TEST_CASE("replaying the same PDR executes once and refuses once") {
    ig::ScenarioOutcome outcome =
        ig::run_scenario_document(load_scenario("replay.scenario.json"), IG_SAMPLES_DIR);
    REQUIRE(outcome.transcripts.size() == 2);
    CHECK(outcome.transcripts[0].executed);
    CHECK_FALSE(outcome.transcripts[1].executed);
    CHECK(outcome.transcripts[1].refused_at == ig::Stage::GateVerify);
    CHECK(outcome.transcripts[1].events.back().detail.find("Replay") != std::string::npos);
    CHECK(outcome.audit_records == 2);
}

TEST_CASE("subscription loop: three months pay exactly 30 USDC, injections refuse") {
    ig::SubscriptionSpec spec = subscription_spec(3);
    spec.inject_overcap_amount = *ig::UintDecimal::from_string("11000000");
    ig::MockLedger ledger;
    ledger.mint(spec.sender, kUsdc, *ig::UintDecimal::from_string("100000000"));
    ig::EvaluationContext ctx;
    ig::NonceRegistry registry;
    auto transcripts = ig::run_subscription_loop(spec, ledger, ctx, registry);

    REQUIRE(transcripts.size() == 5);
    for (int m = 0; m < 3; ++m) {
        CAPTURE(m);
        CHECK(transcripts[m].executed);
    }
    CHECK(ledger.balance_of(kService, kUsdc).str() == "30000000");
    CHECK(ledger.balance_of(spec.sender, kUsdc).str() == "70000000");

    const ig::PipelineTranscript& early = transcripts[3];
    CHECK_FALSE(early.executed);
    CHECK(early.refused_at == ig::Stage::PolicyEval);
    CHECK(early.events.back().detail.find("CadenceMin") != std::string::npos);

    const ig::PipelineTranscript& overcap = transcripts[4];
    CHECK_FALSE(overcap.executed);
    CHECK(overcap.refused_at == ig::Stage::PolicyEval);
    CHECK(overcap.events.back().detail.find("PerTxCap") != std::string::npos);

    // receipts agree with the number of executed transcripts; supply conserved
    std::size_t executed = 0;
    for (const auto& t : transcripts) executed += t.executed ? 1 : 0;
    CHECK(ledger.receipts().size() == executed);
    CHECK(ledger.total_supply(kUsdc).str() == "100000000");
}

TEST_CASE("an exact-cap payment is approved (inclusive bound end to end)") {
    ig::SubscriptionSpec spec = subscription_spec(1);
    spec.amount = *ig::UintDecimal::from_string("10000000");
    spec.inject_early_attempt = false;
    ig::MockLedger ledger;
    ledger.mint(spec.sender, kUsdc, *ig::UintDecimal::from_string("10000000"));
    ig::EvaluationContext ctx;
    ig::NonceRegistry registry;
    auto transcripts = ig::run_subscription_loop(spec, ledger, ctx, registry);
    REQUIRE(transcripts.size() == 1);
    CHECK(transcripts[0].executed);
    CHECK(ledger.balance_of(spec.sender, kUsdc).str() == "0");
}

TEST_CASE("transcripts and receipts agree, and reruns are byte-identical") {
    auto run = [] {
        return ig::run_scenario_document(load_scenario("rebalance_swap.scenario.json"),
                                         IG_SAMPLES_DIR);
    };
    ig::ScenarioOutcome a = run();
    ig::ScenarioOutcome b = run();
    REQUIRE(a.transcripts.size() == b.transcripts.size());
    for (std::size_t i = 0; i < a.transcripts.size(); ++i)
        CHECK(ig::canonicalize(ig::to_json(a.transcripts[i])) ==
              ig::canonicalize(ig::to_json(b.transcripts[i])));
    CHECK(ig::canonicalize(a.ledger_snapshot) == ig::canonicalize(b.ledger_snapshot));
}

TEST_CASE("execute_envelope enforces deadline and balance atomically") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::Intent intent = ig::parse_intent_json(cs["normalized"]);
    igtest::IssuedPair pair = igtest::make_issued_pair(intent);
    ig::NonceRegistry registry;
    ig::ExecutionEnvelope env = ig::gate(intent, pair.pdr, pair.anchors, registry, pair.clock);

    SECTION("deadline in the past") {
        ig::MockLedger ledger;
        ledger.advance_time(env.effective_deadline + 1);
        ledger.mint(kSender, kUsdc, *ig::UintDecimal::from_string("5000000000"));
        CHECK_THROWS_AS(ledger.execute_envelope(env, {kSender, std::string(kPool)}),
                        ig::DeadlineExceeded);
        CHECK(ledger.balance_of(kSender, kUsdc).str() == "5000000000");
        CHECK(ledger.receipts().empty());
    }
    SECTION("insufficient sender balance") {
        ig::MockLedger ledger;
        ledger.mint(kSender, kUsdc, *ig::UintDecimal::from_string("1"));
        ledger.mint(kPool, kWeth, *ig::UintDecimal::from_string("2000000000000000000"));
        CHECK_THROWS_AS(ledger.execute_envelope(env, {kSender, std::string(kPool)}),
                        ig::InsufficientBalance);
        CHECK(ledger.balance_of(kSender, kUsdc).str() == "1");
        CHECK(ledger.balance_of(kPool, kWeth).str() == "2000000000000000000");
    }
    SECTION("pool short of the output token") {
        ig::MockLedger ledger;
        ledger.mint(kSender, kUsdc, *ig::UintDecimal::from_string("5000000000"));
        ledger.mint(kPool, kWeth, *ig::UintDecimal::from_string("1"));
        CHECK_THROWS_AS(ledger.execute_envelope(env, {kSender, std::string(kPool)}),
                        ig::InsufficientBalance);
        CHECK(ledger.balance_of(kSender, kUsdc).str() == "5000000000");
    }
    SECTION("valid transfer moves exactly the amount") {
        ig::Intent transfer;
        transfer.intent_id = "10000000-0000-4000-8000-00000000000c";
        ig::Transfer tr;
        tr.token = ig::Token{1, *ig::SemanticAddress::parse(kUsdc.second)};
        tr.to = *ig::SemanticAddress::parse(kService);
        tr.amount = *ig::UintDecimal::from_string("123456");
        transfer.action = tr;
        transfer.constraints.deadline = 2000000000;
        igtest::IssuedPair tp = igtest::make_issued_pair(transfer);
        ig::NonceRegistry reg2;
        ig::ExecutionEnvelope env2 = ig::gate(transfer, tp.pdr, tp.anchors, reg2, tp.clock);
        ig::MockLedger ledger;
        ledger.mint(kSender, kUsdc, *ig::UintDecimal::from_string("200000"));
        ig::UintDecimal supply_before = ledger.total_supply(kUsdc);
        ledger.execute_envelope(env2, {kSender, std::nullopt});
        CHECK(ledger.balance_of(kSender, kUsdc).str() == "76544");
        CHECK(ledger.balance_of(kService, kUsdc).str() == "123456");
        CHECK(ledger.total_supply(kUsdc) == supply_before);
        CHECK(ledger.receipts().size() == 1);
    }
}

TEST_CASE("scenario config errors are reported as such") {
    json doc = load_scenario("rebalance_swap.scenario.json");
    SECTION("missing sender") {
        doc.erase("sender");
        CHECK_THROWS_AS(ig::run_scenario_document(doc, IG_SAMPLES_DIR), ig::ScenarioConfigError);
    }
    SECTION("issuer not anchored") {
        doc["anchors"] = json{{"issuers", json{{"someone-else",
                                                "0x00000000000000000000000000000000000000aa"}}},
                              {"identity", "https://signer.fireblocks.com"}};
        CHECK_THROWS_AS(ig::run_scenario_document(doc, IG_SAMPLES_DIR), ig::ScenarioConfigError);
    }
    SECTION("anchored address mismatch") {
        doc["anchors"] = json{{"issuers", json{{"https://policy.turnkey.com",
                                                "0x00000000000000000000000000000000000000aa"}}},
                              {"identity", "https://signer.fireblocks.com"}};
        CHECK_THROWS_AS(ig::run_scenario_document(doc, IG_SAMPLES_DIR), ig::ScenarioConfigError);
    }
    SECTION("empty clock") {
        doc["clock"] = json::array();
        CHECK_THROWS_AS(ig::run_scenario_document(doc, IG_SAMPLES_DIR), ig::ScenarioConfigError);
    }
    SECTION("swap without a pool refuses at EXECUTE") {
        doc.erase("pool");
        ig::ScenarioOutcome outcome = ig::run_scenario_document(doc, IG_SAMPLES_DIR);
        CHECK_FALSE(outcome.transcripts[0].executed);
        CHECK(outcome.transcripts[0].refused_at == ig::Stage::Execute);
    }
}

TEST_CASE("block time never regresses") {
    ig::MockLedger ledger;
    ledger.advance_time(100);
    CHECK_THROWS_AS(ledger.advance_time(99), ig::TimestampRegression);
    CHECK_NOTHROW(ledger.advance_time(100));
}

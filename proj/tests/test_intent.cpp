#include <catch2/catch_amalgamated.hpp>

#include "ig/intent.hpp"
#include "ig/legacy_intent.hpp"
#include "test_helpers.hpp"

using ig::json;

static const char* kMinimalTransfer = R"({
  "version": "1.0.0",
  "intentId": "00000000-0000-4000-8000-000000000000",
  "action": {
    "type": "TRANSFER",
    "token": {"chainId": 1, "address": "0x0000000000000000000000000000000000000000"},
    "to": "0x0000000000000000000000000000000000000000",
    "amount": "0"
  },
  "constraints": {"deadline": 0}
})";

TEST_CASE("minimal all-zero transfer parses") {
    ig::Intent intent = ig::parse_intent(kMinimalTransfer);
    const auto* t = std::get_if<ig::Transfer>(&intent.action);
    REQUIRE(t != nullptr);
    CHECK(t->amount.str() == "0");
    CHECK(intent.constraints.deadline == 0);
    CHECK(ig::validate_intent(intent).ok());
}

TEST_CASE("field order in the input is irrelevant") {
    igtest::Rng rng(99);
    ig::Intent reference = ig::parse_intent(kMinimalTransfer);
    for (int i = 0; i < 10; ++i) {
        std::string scrambled = igtest::scramble_json(json::parse(kMinimalTransfer), rng);
        CHECK(ig::parse_intent(scrambled) == reference);
    }
}

TEST_CASE("slippage above 10000 is a schema violation at its path") {
    json doc = json::parse(kMinimalTransfer);
    doc["action"] = json{{"type", "SWAP"},
                         {"tokenIn", doc["action"]["token"]},
                         {"tokenOut", doc["action"]["token"]},
                         {"amountIn", "1"},
                         {"minAmountOut", "1"},
                         {"slippageBps", 10001}};
    try {
        ig::parse_intent(doc.dump());
        FAIL("expected SchemaViolation");
    } catch (const ig::SchemaViolation& e) {
        CHECK(e.path() == "/action/slippageBps");
    }
}

TEST_CASE("malformed JSON is reported as such") {
    CHECK_THROWS_AS(ig::parse_intent(""), ig::MalformedJson);
    CHECK_THROWS_AS(ig::parse_intent("{"), ig::MalformedJson);
    CHECK_THROWS_AS(ig::parse_intent("[1,2"), ig::MalformedJson);
}

TEST_CASE("schema corpus: valid TIS documents parse, mutants fail at the mutated path") {
    json corpus = igtest::load_json(igtest::data_path("schema_corpus.json"));
    for (const auto& entry : corpus["tis"]["valid"]) {
        CAPTURE(entry["name"].get<std::string>());
        CHECK_NOTHROW(ig::parse_intent_json(entry["doc"]));
    }
    for (const auto& entry : corpus["tis"]["mutants"]) {
        CAPTURE(entry["name"].get<std::string>());
        try {
            ig::parse_intent_json(entry["doc"]);
            FAIL("mutant accepted: " + entry["name"].get<std::string>());
        } catch (const ig::SchemaViolation& e) {
            CHECK(e.path() == entry["path"].get<std::string>());
        }
    }
}

TEST_CASE("round trip: parse(serialize(intent)) is structurally equal") {
    igtest::Rng rng(1234);
    for (int i = 0; i < 200; ++i) {
        ig::Intent intent = igtest::rand_intent(rng);
        ig::Intent back = ig::parse_intent(ig::serialize_intent(intent));
        CHECK(back == intent);
    }
}

TEST_CASE("validate_intent surfaces findings on programmatically built values") {
    ig::Intent intent = ig::parse_intent(kMinimalTransfer);
    SECTION("well-formed value has zero findings") {
        CHECK(ig::validate_intent(intent).findings.empty());
    }
    SECTION("inverted block range is a finding at /constraints") {
        intent.constraints.valid_from_block = 10;
        intent.constraints.valid_until_block = 5;
        auto report = ig::validate_intent(intent);
        REQUIRE_FALSE(report.ok());
        CHECK(report.findings.front().path == "/constraints");
    }
    SECTION("leading-zero amount cites the UintDecimal rule") {
        std::get<ig::Transfer>(intent.action).amount = ig::UintDecimal::unchecked("007");
        auto report = ig::validate_intent(intent);
        REQUIRE_FALSE(report.ok());
        CHECK(report.findings.front().path == "/action/amount");
        CHECK(report.findings.front().reason.find("UintDecimal") != std::string::npos);
    }
}

TEST_CASE("unknown keys are hard errors anywhere in the document") {
    json doc = json::parse(kMinimalTransfer);
    doc["solverHint"] = "fast";
    try {
        ig::parse_intent_json(doc);
        FAIL("unknown key accepted");
    } catch (const ig::SchemaViolation& e) {
        CHECK(e.path() == "/solverHint");
    }
}

TEST_CASE("exclusivity accepts null and a well-formed address, nothing else") {
    json doc = json::parse(kMinimalTransfer);
    doc["constraints"]["exclusivity"] = nullptr;
    CHECK_NOTHROW(ig::parse_intent_json(doc));
    doc["constraints"]["exclusivity"] = "0x00000000000000000000000000000000000000ff";
    CHECK_NOTHROW(ig::parse_intent_json(doc));
    doc["constraints"]["exclusivity"] = "anyone";
    CHECK_THROWS_AS(ig::parse_intent_json(doc), ig::SchemaViolation);
}

// ------------------------------------------------------------------ legacy

TEST_CASE("legacy swap payload normalizes to the frozen golden") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::Intent intent = ig::normalize_legacy_intent(cs["legacy_raw"]);
    CHECK(ig::serialize_intent(intent) == cs["tis_canonical"].get<std::string>());
    const auto* s = std::get_if<ig::Swap>(&intent.action);
    REQUIRE(s != nullptr);
    CHECK(s->amount_in.str() == "5000000000");
    CHECK(s->min_amount_out.str() == "1500000000000000000");
    CHECK(intent.constraints.deadline == 1767230000);
    CHECK(ig::validate_intent(intent).ok());
}

TEST_CASE("legacy transfer with explicit recipient maps to Transfer") {
    json raw{{"intentId", "11111111-2222-4333-8444-555555555555"},
             {"action", "TRANSFER"},
             {"inputs", json::array({json{{"token", "0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48"},
                                          {"amount", "10000000"},
                                          {"constraint", "EXACT"}}})},
             {"recipient", "0x000000000000000000000000000000000000beef"},
             {"constraints", json{{"deadline", 1767230000}}}};
    ig::Intent intent = ig::normalize_legacy_intent(raw);
    const auto* t = std::get_if<ig::Transfer>(&intent.action);
    REQUIRE(t != nullptr);
    CHECK(t->to.str() == "0x000000000000000000000000000000000000beef");
    CHECK(t->amount.str() == "10000000");
    CHECK(t->token.chain_id == 1);  // config default
    CHECK(ig::validate_intent(intent).ok());
}

TEST_CASE("multi-step legacy shapes are reported, not translated") {
    json raw{{"intentId", "f47ac10b-58cc-4372-a567-0e02b2c3d479"},
             {"action", "ZAP_INTO_VAULT"},
             {"inputs", json::array({json{{"token", "0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48"},
                                          {"amount", "1000000000"},
                                          {"constraint", "EXACT"}}})},
             {"outputs", json::array()},
             {"constraints", json{{"deadline", 1767226000}, {"exclusivity", nullptr}}}};
    CHECK_THROWS_AS(ig::normalize_legacy_intent(raw), ig::UnsupportedLegacyShape);
}

TEST_CASE("legacy normalization honors the chainId override") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::Intent intent = ig::normalize_legacy_intent(cs["legacy_raw"], ig::LegacyOptions{137});
    CHECK(std::get<ig::Swap>(intent.action).token_in.chain_id == 137);
}

TEST_CASE("legacy normalization output always validates cleanly") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    CHECK(ig::validate_intent(ig::normalize_legacy_intent(cs["legacy_raw"])).ok());
}

// ----------------------------------------------------------------- preview

TEST_CASE("previews are deterministic and carry the load-bearing facts") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::Intent swap = ig::normalize_legacy_intent(cs["legacy_raw"]);
    std::string preview = ig::render_preview(swap);
    CHECK(preview.find("SWAP") != std::string::npos);
    CHECK(preview.find("5000000000") != std::string::npos);
    CHECK(preview.find("2026-01-01T01:13:20Z") != std::string::npos);

    ig::Intent zero = ig::parse_intent(kMinimalTransfer);
    std::string zero_preview = ig::render_preview(zero);
    CHECK(zero_preview.find("TRANSFER") != std::string::npos);
    CHECK(zero_preview.find("amount 0") != std::string::npos);
    CHECK(zero_preview.find("1970-01-01T00:00:00Z") != std::string::npos);
}

TEST_CASE("structurally equal intents render byte-identical previews") {
    igtest::Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        ig::Intent intent = igtest::rand_intent(rng);
        json doc = ig::to_json(intent);
        std::string expected = ig::render_preview(intent);
        for (int p = 0; p < 5; ++p) {
            ig::Intent reparsed = ig::parse_intent(igtest::scramble_json(doc, rng));
            CHECK(ig::render_preview(reparsed) == expected);
        }
    }
}

TEST_CASE("rejection completeness: single-field mutations fail at the mutated path") {
    // one mutator per schema rule family, applied to a rich valid document
    json corpus = igtest::load_json(igtest::data_path("schema_corpus.json"));
    json base = corpus["tis"]["valid"][1]["doc"];  // full swap
    struct Case {
        const char* name;
        std::function<void(json&)> mutate;
        const char* path;
    };
    std::vector<Case> cases = {
        {"pattern", [](json& d) { d["action"]["amountIn"] = "12x"; }, "/action/amountIn"},
        {"enum", [](json& d) { d["preferences"]["routing"] = "FASTEST"; }, "/preferences/routing"},
        {"range", [](json& d) { d["action"]["tokenIn"]["decimals"] = 300; },
         "/action/tokenIn/decimals"},
        {"required", [](json& d) { d["constraints"].erase("deadline"); }, "/constraints/deadline"},
        {"additionalProperties", [](json& d) { d["constraints"]["memo"] = 1; },
         "/constraints/memo"},
    };
    for (const auto& c : cases) {
        json doc = base;
        c.mutate(doc);
        CAPTURE(c.name);
        try {
            ig::parse_intent_json(doc);
            FAIL("mutation accepted");
        } catch (const ig::SchemaViolation& e) {
            CHECK(e.path() == c.path);
        }
    }
}

#include <catch2/catch_amalgamated.hpp>

#include "ig/pdr.hpp"
#include "test_helpers.hpp"

using ig::json;

TEST_CASE("golden rebalancing-swap PDR parses and reproduces its signing chain") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    ig::PolicyDecisionRecord pdr = ig::parse_pdr_json(cs["pdr"]);
    CHECK(pdr.issuer == "https://policy.turnkey.com");
    CHECK(pdr.audience == "https://signer.fireblocks.com");
    CHECK(pdr.expires_at == 1767229800);
    CHECK(pdr.decision.outcome == ig::Outcome::Approved);
    REQUIRE(pdr.decision.bound_constraints.has_value());
    CHECK(pdr.decision.bound_constraints->max_gas_price_wei->str() == "60000000000");
    CHECK(ig::pdr_signing_payload(pdr) == cs["signing_payload"].get<std::string>());
    CHECK(ig::pdr_signing_digest(pdr).str() == cs["signing_digest"].get<std::string>());
    CHECK(ig::serialize_pdr(pdr) == cs["pdr_canonical"].get<std::string>());
    CHECK(ig::verify_signature(ig::pdr_signing_digest(pdr), pdr.signature.signature,
                               pdr.signature.signer));
}

TEST_CASE("schema corpus: valid PDR documents parse, mutants fail at the mutated path") {
    json corpus = igtest::load_json(igtest::data_path("schema_corpus.json"));
    for (const auto& entry : corpus["pdr"]["valid"]) {
        CAPTURE(entry["name"].get<std::string>());
        CHECK_NOTHROW(ig::parse_pdr_json(entry["doc"]));
    }
    for (const auto& entry : corpus["pdr"]["mutants"]) {
        CAPTURE(entry["name"].get<std::string>());
        try {
            ig::parse_pdr_json(entry["doc"]);
            FAIL("mutant accepted: " + entry["name"].get<std::string>());
        } catch (const ig::SchemaViolation& e) {
            CHECK(e.path() == entry["path"].get<std::string>());
        }
    }
}

TEST_CASE("expiresAt at or before issuedAt is rejected for every generated pair") {
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    igtest::Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        std::int64_t issued = igtest::rand_int(rng, 0, 2000000000);
        std::int64_t delta = igtest::rand_int(rng, 0, 100000);
        json doc = cs["pdr"];
        doc["issuedAt"] = ig::format_rfc3339(issued);
        doc["expiresAt"] = ig::format_rfc3339(issued - delta);
        CHECK_THROWS_AS(ig::parse_pdr_json(doc), ig::SchemaViolation);
        doc["expiresAt"] = ig::format_rfc3339(issued + 1 + delta);
        auto findings = ig::check_pdr_document(doc);
        // only the signature may now disagree; temporal ordering itself is fine
        for (const auto& f : findings) CHECK(f.path != "/expiresAt");
    }
}

TEST_CASE("signing payload excludes exactly the signature member") {
    igtest::Rng rng(3);
    igtest::IssuedPair pair = igtest::make_issued_pair(igtest::rand_intent(rng));
    std::string payload = ig::pdr_signing_payload(pair.pdr);
    CHECK(payload.find("policyEngineSignature") == std::string::npos);

    // mutating the signature leaves the payload untouched
    ig::PolicyDecisionRecord altered = pair.pdr;
    altered.signature.signature = "0xdeadbeef";
    CHECK(ig::pdr_signing_payload(altered) == payload);

    // mutating any non-signature field changes it
    altered = pair.pdr;
    altered.audience += "-other";
    CHECK(ig::pdr_signing_payload(altered) != payload);
    altered = pair.pdr;
    altered.expires_at += 1;
    CHECK(ig::pdr_signing_payload(altered) != payload);
    altered = pair.pdr;
    altered.decision.policy_id += "x";
    CHECK(ig::pdr_signing_payload(altered) != payload);
}

TEST_CASE("PDR round-trips through canonical serialization") {
    igtest::Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        igtest::IssuedPair pair = igtest::make_issued_pair(igtest::rand_intent(rng));
        ig::PolicyDecisionRecord back = ig::parse_pdr(ig::serialize_pdr(pair.pdr));
        CHECK(back == pair.pdr);
    }
}

TEST_CASE("decoded JWT-style claims map into a valid PDR") {
    // fixed claims-mapping table: iss->issuer, sub->subject, aud->audience,
    // exp->expiresAt, intent_hash->tisHash, max_gas_fee->maxGasPriceWei
    json cs = igtest::load_json(igtest::data_path("rebalance_swap_golden.json"));
    json claims{{"iss", "https://policy.turnkey.com"},
                {"sub", "0x00000000000000000000000000000000000000aa"},
                {"aud", "https://signer.fireblocks.com"},
                {"exp", 1767229800},
                {"intent_hash", cs["tis_hash"]},
                {"decision", "APPROVE"},
                {"bound_constraints", json{{"max_gas_fee", "60000000000"}}}};

    auto import_claims = [](const json& c) {
        ig::PolicyDecisionRecord pdr;
        pdr.issuer = c.at("iss").get<std::string>();
        if (c.contains("sub")) pdr.subject = c["sub"].get<std::string>();
        pdr.audience = c.at("aud").get<std::string>();
        pdr.expires_at = c.at("exp").get<std::int64_t>();
        pdr.issued_at = c.contains("iat") ? c["iat"].get<std::int64_t>() : pdr.expires_at - 300;
        pdr.tis_hash = *ig::Digest32::parse(c.at("intent_hash").get<std::string>());
        pdr.decision.outcome = c.at("decision").get<std::string>() == "APPROVE"
                                   ? ig::Outcome::Approved
                                   : ig::Outcome::Rejected;
        pdr.decision.policy_id = "imported-claims";
        if (c.contains("bound_constraints")) {
            ig::BoundConstraints bc;
            if (c["bound_constraints"].contains("max_gas_fee"))
                bc.max_gas_price_wei =
                    ig::parse_uint_decimal(c["bound_constraints"]["max_gas_fee"].get<std::string>());
            pdr.decision.bound_constraints = bc;
        }
        pdr.pdr_id = ig::derive_pdr_id(pdr.tis_hash, pdr.issued_at,
                                       pdr.expires_at - pdr.issued_at, pdr.issuer, pdr.audience);
        return pdr;
    };

    ig::PolicyDecisionRecord pdr = import_claims(claims);
    auto key = ig::keygen_from_hex(cs["issuer"]["seed_hex"].get<std::string>());
    ig::sign_pdr(pdr, key);
    CHECK_NOTHROW(ig::parse_pdr(ig::serialize_pdr(pdr)));
    CHECK(ig::validate_pdr(pdr).ok());
    CHECK(pdr.subject == "0x00000000000000000000000000000000000000aa");
    CHECK(pdr.expires_at == 1767229800);
}

TEST_CASE("alg other than ES256K is tolerated by schema but pinned at issue") {
    igtest::Rng rng(21);
    igtest::IssuedPair pair = igtest::make_issued_pair(igtest::rand_intent(rng));
    CHECK(pair.pdr.signature.alg == "ES256K");
}

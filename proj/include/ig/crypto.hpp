#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ig/canonical.hpp"
#include "ig/errors.hpp"
#include "ig/hex.hpp"
#include "ig/keccak.hpp"
#include "ig/secp256k1.hpp"
#include "ig/sha256.hpp"

namespace ig {

struct Digest32 {
    std::array<std::uint8_t, 32> bytes{};

    std::string str() const { return hex::encode0x(bytes); }

    static std::optional<Digest32> parse(std::string_view text) {
        if (!hex::matches_0x_hex(text, 64)) return std::nullopt;
        auto raw = hex::decode(text);
        Digest32 d;
        std::copy(raw->begin(), raw->end(), d.bytes.begin());
        return d;
    }
    static bool is_digest_text(std::string_view text) {
        return hex::matches_0x_hex(text, 64);
    }

    bool operator==(const Digest32&) const = default;
};

inline Digest32 keccak_digest(std::string_view data) {
    return Digest32{keccak::hash256(data)};
}

/// keccak-256 over the canonical serialization of a JSON value.
inline Digest32 hash_canonical(const json& value) {
    return keccak_digest(canonicalize(value));
}

struct SemanticAddress {
    std::string text;  // canonical: 0x + 40 lowercase hex

    static std::optional<SemanticAddress> parse(std::string_view input) {
        if (!hex::matches_0x_hex(input, 40)) return std::nullopt;
        std::string lower(input);
        for (char& c : lower)
            if (c >= 'A' && c <= 'F') c += 'a' - 'A';
        return SemanticAddress{std::move(lower)};
    }
    static bool is_address_text(std::string_view input) {
        return hex::matches_0x_hex(input, 40);
    }

    const std::string& str() const { return text; }
    auto operator<=>(const SemanticAddress&) const = default;
};

inline SemanticAddress address_from_pubkey(const secp::AffinePoint& pub) {
    std::uint8_t raw[64];
    pub.x.to_bytes_be(raw);
    pub.y.to_bytes_be(raw + 32);
    auto h = keccak::hash256(std::span<const std::uint8_t>(raw, 64));
    return SemanticAddress{hex::encode0x(std::span<const std::uint8_t>(h.data() + 12, 20))};
}

struct Keypair {
    secp::U256 secret;
    secp::AffinePoint public_key;
    SemanticAddress address;
};

/// Deterministic keypair: secret = seed reduced mod the group order.
inline Keypair keygen(std::span<const std::uint8_t> seed) {
    if (seed.size() != 32) throw InvalidSeed("seed must be exactly 32 bytes");
    secp::U256 secret = secp::detail::sc_from_bytes(seed.data());
    if (secret.is_zero()) throw InvalidSeed("seed reduces to zero mod the curve order");
    Keypair kp;
    kp.secret = secret;
    kp.public_key = secp::scalar_mul(secret, secp::generator());
    kp.address = address_from_pubkey(kp.public_key);
    return kp;
}

inline Keypair keygen_from_hex(std::string_view seed_hex) {
    auto raw = hex::decode(seed_hex);
    if (!raw || raw->size() != 32) throw InvalidSeed("seed must be 32 bytes of hex");
    return keygen(*raw);
}

struct SignatureBytes {
    secp::U256 r, s;
    int recovery_id = 0;

    /// 0x + r (64) + s (64) + v (2) hex chars.
    std::string str() const {
        std::uint8_t raw[65];
        r.to_bytes_be(raw);
        s.to_bytes_be(raw + 32);
        raw[64] = static_cast<std::uint8_t>(recovery_id);
        return hex::encode0x(std::span<const std::uint8_t>(raw, 65));
    }

    static SignatureBytes parse(std::string_view text) {
        if (!hex::matches_0x_hex(text, 130))
            throw MalformedSignature("signature must be 0x + 130 hex chars (r||s||v)");
        auto raw = hex::decode(text);
        SignatureBytes sig;
        sig.r = secp::U256::from_bytes_be(raw->data());
        sig.s = secp::U256::from_bytes_be(raw->data() + 32);
        sig.recovery_id = (*raw)[64];
        if (!secp::sig_component_valid(sig.r) || !secp::sig_component_valid(sig.s))
            throw MalformedSignature("r or s out of range");
        if (secp::half_order() < sig.s)
            throw MalformedSignature("s is not low-s normalized");
        if (sig.recovery_id != 0 && sig.recovery_id != 1)
            throw MalformedSignature("recovery id must be 0 or 1");
        return sig;
    }
};

namespace detail {

/// RFC 6979 HMAC-SHA256 nonce stream for (secret, digest).
class Rfc6979 {
public:
    Rfc6979(const secp::U256& secret, const std::uint8_t digest[32]) {
        std::uint8_t x[32], h[32];
        secret.to_bytes_be(x);
        secp::detail::sc_from_bytes(digest).to_bytes_be(h);  // bits2octets
        std::fill(v_.begin(), v_.end(), 0x01);
        std::fill(k_.begin(), k_.end(), 0x00);
        std::uint8_t buf[97];
        auto seed = [&](std::uint8_t tag) {
            std::copy(v_.begin(), v_.end(), buf);
            buf[32] = tag;
            std::copy(x, x + 32, buf + 33);
            std::copy(h, h + 32, buf + 65);
            k_ = sha256::hmac(k_, std::span<const std::uint8_t>(buf, 97));
            v_ = sha256::hmac(k_, v_);
        };
        seed(0x00);
        seed(0x01);
    }

    secp::U256 next() {
        while (true) {
            v_ = sha256::hmac(k_, v_);
            secp::U256 k = secp::U256::from_bytes_be(v_.data());
            if (!k.is_zero() && k < secp::N) return k;
            std::uint8_t buf[33];
            std::copy(v_.begin(), v_.end(), buf);
            buf[32] = 0x00;
            k_ = sha256::hmac(k_, std::span<const std::uint8_t>(buf, 33));
            v_ = sha256::hmac(k_, v_);
        }
    }

private:
    std::array<std::uint8_t, 32> k_, v_;
};

}  // namespace detail

/// Deterministic (RFC 6979) low-s ECDSA over a 32-byte digest.
inline SignatureBytes sign_digest(const Keypair& key, const Digest32& digest) {
    detail::Rfc6979 nonce(key.secret, digest.bytes.data());
    while (true) {
        auto sig = secp::sign_with_nonce(key.secret, nonce.next(), digest.bytes.data());
        if (sig && sig->recovery_id < 2)
            return SignatureBytes{sig->r, sig->s, sig->recovery_id};
    }
}

inline std::optional<SemanticAddress> recover_address(const Digest32& digest,
                                                      const SignatureBytes& sig) {
    auto pub = secp::recover(digest.bytes.data(), secp::EcdsaSig{sig.r, sig.s, sig.recovery_id});
    if (!pub) return std::nullopt;
    return address_from_pubkey(*pub);
}

/// True iff the recovered signer equals `expected`. Throws MalformedSignature
/// for structurally invalid signatures (distinct from a clean false).
inline bool verify_signature(const Digest32& digest, std::string_view signature_text,
                             const SemanticAddress& expected) {
    SignatureBytes sig = SignatureBytes::parse(signature_text);
    auto addr = recover_address(digest, sig);
    return addr && *addr == expected;
}

}  // namespace ig

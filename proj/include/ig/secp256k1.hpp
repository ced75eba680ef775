#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>

namespace ig::secp {

// secp256k1 (SEC2): y^2 = x^3 + 7 over F_p,
//   p = 2^256 - 2^32 - 977
//   n = group order

struct U256 {
    std::array<std::uint64_t, 4> w{};  // little-endian limbs

    static U256 from_bytes_be(const std::uint8_t b[32]) {
        U256 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 8; ++j)
                r.w[3 - i] = r.w[3 - i] << 8 | b[8 * i + j];
        return r;
    }
    void to_bytes_be(std::uint8_t b[32]) const {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 8; ++j)
                b[8 * i + j] = static_cast<std::uint8_t>(w[3 - i] >> (56 - 8 * j));
    }
    bool is_zero() const { return (w[0] | w[1] | w[2] | w[3]) == 0; }
    bool bit(int i) const { return (w[i / 64] >> (i % 64)) & 1; }
    bool is_odd() const { return w[0] & 1; }

    friend bool operator==(const U256& a, const U256& b) { return a.w == b.w; }
    friend bool operator<(const U256& a, const U256& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
        }
        return false;
    }
};

inline constexpr U256 P{{0xFFFFFFFEFFFFFC2FULL, 0xFFFFFFFFFFFFFFFFULL,
                         0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL}};
inline constexpr U256 N{{0xBFD25E8CD0364141ULL, 0xBAAEDCE6AF48A03BULL,
                         0xFFFFFFFFFFFFFFFEULL, 0xFFFFFFFFFFFFFFFFULL}};
inline constexpr U256 GX{{0x59F2815B16F81798ULL, 0x029BFCDB2DCE28D9ULL,
                          0x55A06295CE870B07ULL, 0x79BE667EF9DCBBACULL}};
inline constexpr U256 GY{{0x9C47D08FFB10D4B8ULL, 0xFD17B448A6855419ULL,
                          0x5DA4FBFC0E1108A8ULL, 0x483ADA7726A3C465ULL}};

namespace detail {

using u128 = unsigned __int128;

// returns carry
inline std::uint64_t add_raw(U256& r, const U256& a, const U256& b) {
    u128 c = 0;
    for (int i = 0; i < 4; ++i) {
        c += static_cast<u128>(a.w[i]) + b.w[i];
        r.w[i] = static_cast<std::uint64_t>(c);
        c >>= 64;
    }
    return static_cast<std::uint64_t>(c);
}

// returns borrow
inline std::uint64_t sub_raw(U256& r, const U256& a, const U256& b) {
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 d = static_cast<u128>(a.w[i]) - b.w[i] - static_cast<std::uint64_t>(borrow);
        r.w[i] = static_cast<std::uint64_t>(d);
        borrow = (d >> 64) ? 1 : 0;
    }
    return static_cast<std::uint64_t>(borrow);
}

inline void mul_raw(std::uint64_t out[8], const U256& a, const U256& b) {
    std::memset(out, 0, 8 * sizeof(std::uint64_t));
    for (int i = 0; i < 4; ++i) {
        std::uint64_t carry = 0;
        for (int j = 0; j < 4; ++j) {
            u128 cur = static_cast<u128>(a.w[i]) * b.w[j] + out[i + j] + carry;
            out[i + j] = static_cast<std::uint64_t>(cur);
            carry = static_cast<std::uint64_t>(cur >> 64);
        }
        out[i + 4] = carry;
    }
}

// ----- field arithmetic mod P (2^256 ≡ 2^32 + 977) -----

inline constexpr std::uint64_t P_FOLD = 0x1000003D1ULL;  // 2^32 + 977

inline void fe_normalize(U256& a) {
    if (!(a < P)) {
        U256 t;
        sub_raw(t, a, P);
        a = t;
    }
}

inline U256 fe_add(const U256& a, const U256& b) {
    U256 r;
    std::uint64_t carry = add_raw(r, a, b);
    if (carry) {
        // wrapped past 2^256: add the fold constant
        u128 c = static_cast<u128>(P_FOLD);
        for (int i = 0; i < 4 && c; ++i) {
            c += r.w[i];
            r.w[i] = static_cast<std::uint64_t>(c);
            c >>= 64;
        }
    }
    fe_normalize(r);
    return r;
}

inline U256 fe_sub(const U256& a, const U256& b) {
    U256 r;
    if (sub_raw(r, a, b)) {
        U256 t;
        add_raw(t, r, P);
        r = t;
    }
    return r;
}

inline U256 fe_reduce_wide(const std::uint64_t t[8]) {
    // first fold: low + high * (2^32 + 977)
    std::uint64_t fold[5] = {};
    {
        std::uint64_t carry = 0;
        for (int i = 0; i < 4; ++i) {
            u128 cur = static_cast<u128>(t[4 + i]) * P_FOLD + t[i] + carry;
            fold[i] = static_cast<std::uint64_t>(cur);
            carry = static_cast<std::uint64_t>(cur >> 64);
        }
        fold[4] = carry;
    }
    // second fold: the (< 2^34) overflow limb
    U256 r{{fold[0], fold[1], fold[2], fold[3]}};
    u128 c = static_cast<u128>(fold[4]) * P_FOLD;
    for (int i = 0; i < 4 && c; ++i) {
        c += r.w[i];
        r.w[i] = static_cast<std::uint64_t>(c);
        c >>= 64;
    }
    if (c) {  // carried past 2^256 once more; one final fold suffices
        u128 cc = static_cast<u128>(P_FOLD);
        for (int i = 0; i < 4 && cc; ++i) {
            cc += r.w[i];
            r.w[i] = static_cast<std::uint64_t>(cc);
            cc >>= 64;
        }
    }
    fe_normalize(r);
    return r;
}

inline U256 fe_mul(const U256& a, const U256& b) {
    std::uint64_t t[8];
    mul_raw(t, a, b);
    return fe_reduce_wide(t);
}

inline U256 fe_sqr(const U256& a) { return fe_mul(a, a); }

inline U256 fe_pow(const U256& base, const U256& exp) {
    U256 result{{1, 0, 0, 0}};
    U256 acc = base;
    for (int i = 0; i < 256; ++i) {
        if (exp.bit(i)) result = fe_mul(result, acc);
        acc = fe_sqr(acc);
    }
    return result;
}

inline U256 fe_inv(const U256& a) {
    U256 e = P;
    U256 two{{2, 0, 0, 0}};
    sub_raw(e, P, two);
    return fe_pow(a, e);  // a^(p-2)
}

inline std::optional<U256> fe_sqrt(const U256& a) {
    // p ≡ 3 (mod 4): candidate = a^((p+1)/4)
    U256 e = P;
    U256 one{{1, 0, 0, 0}};
    add_raw(e, P, one);  // even, no carry past 2^256 since p < 2^256 - 1
    // divide by 4
    for (int s = 0; s < 2; ++s) {
        for (int i = 0; i < 3; ++i) e.w[i] = (e.w[i] >> 1) | (e.w[i + 1] << 63);
        e.w[3] >>= 1;
    }
    U256 r = fe_pow(a, e);
    if (!(fe_sqr(r) == a)) return std::nullopt;
    return r;
}

// ----- scalar arithmetic mod N (generic, no sparse structure) -----

inline U256 sc_add(const U256& a, const U256& b) {
    U256 r;
    std::uint64_t carry = add_raw(r, a, b);
    if (carry || !(r < N)) {
        U256 t;
        sub_raw(t, r, N);
        r = t;
    }
    return r;
}

inline U256 sc_mul(const U256& a, const U256& b) {
    // double-and-add; scalar throughput is irrelevant here
    U256 r{};
    for (int i = 255; i >= 0; --i) {
        r = sc_add(r, r);
        if (b.bit(i)) r = sc_add(r, a);
    }
    return r;
}

inline U256 sc_pow(const U256& base, const U256& exp) {
    U256 result{{1, 0, 0, 0}};
    U256 acc = base;
    for (int i = 0; i < 256; ++i) {
        if (exp.bit(i)) result = sc_mul(result, acc);
        acc = sc_mul(acc, acc);
    }
    return result;
}

inline U256 sc_inv(const U256& a) {
    U256 e, two{{2, 0, 0, 0}};
    sub_raw(e, N, two);
    return sc_pow(a, e);
}

inline U256 sc_neg(const U256& a) {
    if (a.is_zero()) return a;
    U256 r;
    sub_raw(r, N, a);
    return r;
}

/// Reduces a 256-bit big-endian value mod N (single conditional subtract is
/// enough: the value is < 2^256 < 2N).
inline U256 sc_from_bytes(const std::uint8_t b[32]) {
    U256 r = U256::from_bytes_be(b);
    if (!(r < N)) {
        U256 t;
        sub_raw(t, r, N);
        r = t;
    }
    return r;
}

// ----- point arithmetic (Jacobian coordinates, a = 0) -----

struct Jacobian {
    U256 x, y, z;
    bool infinity = true;
};

inline Jacobian jc_double(const Jacobian& p) {
    if (p.infinity || p.y.is_zero()) return Jacobian{};
    U256 a = fe_sqr(p.x);
    U256 b = fe_sqr(p.y);
    U256 c = fe_sqr(b);
    U256 t = fe_sqr(fe_add(p.x, b));
    U256 d = fe_sub(fe_sub(t, a), c);
    d = fe_add(d, d);
    U256 e = fe_add(fe_add(a, a), a);
    U256 f = fe_sqr(e);
    Jacobian r;
    r.infinity = false;
    r.x = fe_sub(f, fe_add(d, d));
    U256 c8 = fe_add(c, c);
    c8 = fe_add(c8, c8);
    c8 = fe_add(c8, c8);
    r.y = fe_sub(fe_mul(e, fe_sub(d, r.x)), c8);
    U256 yz = fe_mul(p.y, p.z);
    r.z = fe_add(yz, yz);
    return r;
}

inline Jacobian jc_add(const Jacobian& p, const Jacobian& q) {
    if (p.infinity) return q;
    if (q.infinity) return p;
    U256 z1z1 = fe_sqr(p.z);
    U256 z2z2 = fe_sqr(q.z);
    U256 u1 = fe_mul(p.x, z2z2);
    U256 u2 = fe_mul(q.x, z1z1);
    U256 s1 = fe_mul(p.y, fe_mul(q.z, z2z2));
    U256 s2 = fe_mul(q.y, fe_mul(p.z, z1z1));
    U256 h = fe_sub(u2, u1);
    U256 rr = fe_sub(s2, s1);
    if (h.is_zero()) {
        if (rr.is_zero()) return jc_double(p);
        return Jacobian{};
    }
    U256 h2 = fe_sqr(h);
    U256 h3 = fe_mul(h2, h);
    U256 u1h2 = fe_mul(u1, h2);
    Jacobian r;
    r.infinity = false;
    r.x = fe_sub(fe_sub(fe_sqr(rr), h3), fe_add(u1h2, u1h2));
    r.y = fe_sub(fe_mul(rr, fe_sub(u1h2, r.x)), fe_mul(s1, h3));
    r.z = fe_mul(fe_mul(p.z, q.z), h);
    return r;
}

}  // namespace detail

struct AffinePoint {
    U256 x, y;
    bool infinity = true;
};

inline AffinePoint to_affine(const detail::Jacobian& p) {
    if (p.infinity) return AffinePoint{};
    U256 zinv = detail::fe_inv(p.z);
    U256 zinv2 = detail::fe_sqr(zinv);
    AffinePoint r;
    r.infinity = false;
    r.x = detail::fe_mul(p.x, zinv2);
    r.y = detail::fe_mul(p.y, detail::fe_mul(zinv2, zinv));
    return r;
}

inline detail::Jacobian to_jacobian(const AffinePoint& p) {
    if (p.infinity) return detail::Jacobian{};
    return detail::Jacobian{p.x, p.y, U256{{1, 0, 0, 0}}, false};
}

inline AffinePoint generator() { return AffinePoint{GX, GY, false}; }

inline AffinePoint scalar_mul(const U256& k, const AffinePoint& p) {
    detail::Jacobian acc;
    detail::Jacobian base = to_jacobian(p);
    for (int i = 255; i >= 0; --i) {
        acc = detail::jc_double(acc);
        if (k.bit(i)) acc = detail::jc_add(acc, base);
    }
    return to_affine(acc);
}

inline AffinePoint point_add(const AffinePoint& a, const AffinePoint& b) {
    return to_affine(detail::jc_add(to_jacobian(a), to_jacobian(b)));
}

inline bool on_curve(const AffinePoint& p) {
    if (p.infinity) return false;
    U256 seven{{7, 0, 0, 0}};
    U256 rhs = detail::fe_add(detail::fe_mul(detail::fe_sqr(p.x), p.x), seven);
    return detail::fe_sqr(p.y) == rhs;
}

struct EcdsaSig {
    U256 r, s;
    int recovery_id = 0;  // parity of R.y after low-s normalization
};

inline bool sig_component_valid(const U256& v) { return !v.is_zero() && v < N; }

inline U256 half_order() {
    U256 h = N;
    for (int i = 0; i < 3; ++i) h.w[i] = (h.w[i] >> 1) | (h.w[i + 1] << 63);
    h.w[3] >>= 1;
    return h;
}

/// ECDSA over a 32-byte digest with caller-supplied nonce k. Applies low-s
/// normalization and flips the recovery bit accordingly.
inline std::optional<EcdsaSig> sign_with_nonce(const U256& secret, const U256& k,
                                               const std::uint8_t digest[32]) {
    using namespace detail;
    if (k.is_zero() || !(k < N)) return std::nullopt;
    AffinePoint rp = scalar_mul(k, generator());
    if (rp.infinity) return std::nullopt;
    U256 r = rp.x;
    bool overflow = !(r < N);
    if (overflow) {
        U256 t;
        sub_raw(t, r, N);
        r = t;
    }
    if (r.is_zero()) return std::nullopt;
    U256 z = sc_from_bytes(digest);
    U256 s = sc_mul(sc_inv(k), sc_add(z, sc_mul(r, secret)));
    if (s.is_zero()) return std::nullopt;
    EcdsaSig sig;
    sig.r = r;
    sig.s = s;
    sig.recovery_id = (rp.y.is_odd() ? 1 : 0) | (overflow ? 2 : 0);
    if (half_order() < s) {
        sig.s = sc_neg(s);
        sig.recovery_id ^= 1;
    }
    return sig;
}

/// Recovers the public key from (digest, r, s, recovery_id 0|1).
inline std::optional<AffinePoint> recover(const std::uint8_t digest[32], const EcdsaSig& sig) {
    using namespace detail;
    if (!sig_component_valid(sig.r) || !sig_component_valid(sig.s)) return std::nullopt;
    if (sig.recovery_id != 0 && sig.recovery_id != 1) return std::nullopt;
    U256 x = sig.r;  // recovery ids 2/3 (r + n overflow) are not produced here
    if (!(x < P)) return std::nullopt;
    U256 seven{{7, 0, 0, 0}};
    auto y = fe_sqrt(fe_add(fe_mul(fe_sqr(x), x), seven));
    if (!y) return std::nullopt;
    U256 yy = *y;
    if (yy.is_odd() != (sig.recovery_id == 1)) yy = fe_sub(U256{}, yy);  // 0 - y ≡ p - y
    AffinePoint rpoint{x, yy, false};
    U256 z = sc_from_bytes(digest);
    U256 rinv = sc_inv(sig.r);
    AffinePoint sr = scalar_mul(sig.s, rpoint);
    AffinePoint zg = scalar_mul(sc_neg(z), generator());
    AffinePoint q = point_add(sr, zg);
    if (q.infinity) return std::nullopt;
    q = scalar_mul(rinv, q);
    if (q.infinity || !on_curve(q)) return std::nullopt;
    return q;
}

}  // namespace ig::secp

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace ig::keccak {

namespace detail {

inline std::uint64_t rotl(std::uint64_t x, unsigned n) {
    return (x << n) | (x >> (64 - n));
}

constexpr std::uint64_t round_constants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808AULL,
    0x8000000080008000ULL, 0x000000000000808BULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008AULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000AULL,
    0x000000008000808BULL, 0x800000000000008BULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800AULL, 0x800000008000000AULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr unsigned rho_offsets[25] = {
    0,  1,  62, 28, 27,
    36, 44, 6,  55, 20,
    3,  10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2,  61, 56, 14,
};

// lane index (x, y) -> x + 5*y
inline void f1600(std::uint64_t a[25]) {
    for (int round = 0; round < 24; ++round) {
        std::uint64_t c[5], d[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x)
            d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
        for (int i = 0; i < 25; ++i) a[i] ^= d[i % 5];

        std::uint64_t b[25];
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], rho_offsets[x + 5 * y]);

        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x)
                a[x + 5 * y] = b[x + 5 * y] ^ (~b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);

        a[0] ^= round_constants[round];
    }
}

}  // namespace detail

/// keccak-256 with the legacy 0x01 domain padding (the Ethereum variant, not
/// NIST SHA3).
inline std::array<std::uint8_t, 32> hash256(std::span<const std::uint8_t> data) {
    constexpr std::size_t rate = 136;
    std::uint64_t state[25] = {};
    std::uint8_t block[rate];

    std::size_t off = 0;
    auto absorb = [&](const std::uint8_t* chunk) {
        for (std::size_t i = 0; i < rate / 8; ++i) {
            std::uint64_t lane;
            std::memcpy(&lane, chunk + 8 * i, 8);  // little-endian hosts only
            state[i] ^= lane;
        }
        detail::f1600(state);
    };
    while (data.size() - off >= rate) {
        absorb(data.data() + off);
        off += rate;
    }
    std::size_t tail = data.size() - off;
    std::memset(block, 0, rate);
    if (tail > 0) std::memcpy(block, data.data() + off, tail);
    block[tail] ^= 0x01;
    block[rate - 1] ^= 0x80;
    absorb(block);

    std::array<std::uint8_t, 32> out;
    std::memcpy(out.data(), state, 32);
    return out;
}

inline std::array<std::uint8_t, 32> hash256(std::string_view text) {
    return hash256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace ig::keccak

#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "otoc/rng.hpp"

namespace otoc {

// Single-site Pauli symbols. The (x,z) bit encoding is X=(1,0), Z=(0,1), Y=(1,1).
enum class PauliSym : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(PauliSym s) { return "IXYZ"[static_cast<int>(s)]; }

// n-site Pauli string, bit-packed two bits per site (n <= 64), with a sign.
struct PauliString {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    int n = 0;
    int sign = +1;

    static PauliString identity(int n) { return PauliString{0, 0, n, +1}; }

    static PauliString single(int n, int site, PauliSym s) {
        PauliString p{0, 0, n, +1};
        p.set(site, s);
        return p;
    }

    PauliSym get(int site) const {
        int xb = static_cast<int>((x >> site) & 1u);
        int zb = static_cast<int>((z >> site) & 1u);
        if (xb && zb) return PauliSym::Y;
        if (xb) return PauliSym::X;
        if (zb) return PauliSym::Z;
        return PauliSym::I;
    }

    void set(int site, PauliSym s) {
        std::uint64_t m = 1ull << site;
        x &= ~m;
        z &= ~m;
        if (s == PauliSym::X || s == PauliSym::Y) x |= m;
        if (s == PauliSym::Z || s == PauliSym::Y) z |= m;
    }

    int weight() const { return std::popcount(x | z); }

    bool commutes_with(const PauliString& o) const {
        int par = std::popcount(x & o.z) ^ std::popcount(z & o.x);
        return (par & 1) == 0;
    }

    bool same_symbols(const PauliString& o) const { return x == o.x && z == o.z; }

    std::string str() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(n) + 1);
        if (sign < 0) s.push_back('-');
        for (int i = 0; i < n; ++i) s.push_back(pauli_char(get(i)));
        return s;
    }
};

// Key for hashing Pauli strings by symbols only.
struct PauliKey {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    bool operator==(const PauliKey&) const = default;
};

struct PauliKeyHash {
    std::size_t operator()(const PauliKey& k) const {
        return static_cast<std::size_t>(hash_mix(k.x, k.z));
    }
};

// Sign of Q P Q for single-site symbols: +1 if they commute, -1 otherwise.
inline int conj_sign(PauliSym p, PauliSym q) {
    if (p == PauliSym::I || q == PauliSym::I || p == q) return +1;
    return -1;
}

// Symbol product ignoring phase (F2 x F2 addition).
inline PauliSym sym_product(PauliSym a, PauliSym b) {
    auto bits = [](PauliSym s) -> std::pair<int, int> {
        switch (s) {
            case PauliSym::I: return {0, 0};
            case PauliSym::X: return {1, 0};
            case PauliSym::Y: return {1, 1};
            case PauliSym::Z: return {0, 1};
        }
        return {0, 0};
    };
    auto [ax, az] = bits(a);
    auto [bx, bz] = bits(b);
    int cx = ax ^ bx, cz = az ^ bz;
    if (cx && cz) return PauliSym::Y;
    if (cx) return PauliSym::X;
    if (cz) return PauliSym::Z;
    return PauliSym::I;
}

}  // namespace otoc

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace otoc {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Streams are addressed by (key, counter); derived streams never collide for
// distinct counters, so per-gate and per-sample randomness is reproducible
// regardless of iteration order or which gates consume it.
class Philox {
public:
    using result_type = std::uint64_t;

    Philox() = default;
    explicit Philox(std::uint64_t key, std::uint64_t ctr_hi = 0, std::uint64_t ctr_lo = 0)
        : key_lo_(static_cast<std::uint32_t>(key)),
          key_hi_(static_cast<std::uint32_t>(key >> 32)) {
        ctr_[0] = static_cast<std::uint32_t>(ctr_lo);
        ctr_[1] = static_cast<std::uint32_t>(ctr_lo >> 32);
        ctr_[2] = static_cast<std::uint32_t>(ctr_hi);
        ctr_[3] = static_cast<std::uint32_t>(ctr_hi >> 32);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() {
        if (have_ == 0) {
            block();
            have_ = 2;
        }
        --have_;
        std::uint64_t v = (static_cast<std::uint64_t>(out_[2 * have_ + 1]) << 32) | out_[2 * have_];
        return v;
    }

    double uniform() {  // in [0,1)
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void block() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key_lo_, k1 = key_hi_;
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kM0, c0, hi0, lo0);
            mulhilo(kM1, c2, hi1, lo1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += kW0; k1 += kW1;
        }
        out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
        if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
    }

    std::uint32_t key_lo_ = 0, key_hi_ = 0;
    std::uint32_t ctr_[4] = {0, 0, 0, 0};
    std::uint32_t out_[4] = {0, 0, 0, 0};
    int have_ = 0;
};

// SplitMix64 step, used to combine stream labels into Philox keys/counters.
inline std::uint64_t hash_mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    return hash_mix(hash_mix(a) ^ (b + 0x9E3779B97F4A7C15ull));
}

// Stream for gate (cycle, site) of an instance, or any (a, b)-labeled draw.
inline Philox substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Philox(seed, hash_mix(a), hash_mix(a, b));
}

inline double gaussian(Philox& rng) {
    // Box-Muller; one value per call keeps streams simple to reason about.
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace otoc

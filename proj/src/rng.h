#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace apiary {

// Randomness source for session ids, multipart boundaries and probe tokens.
// Production instances draw from the OS entropy pool; a seeded instance
// (test mode, --seed) is a deterministic PRNG so replays produce identical
// logs run after run.
class Rng {
public:
    Rng();                            // OS-entropy seeded, non-deterministic
    explicit Rng(std::uint64_t seed); // deterministic test mode

    bool seeded() const { return seeded_; }

    // switch an existing instance to deterministic mode
    void reseed(std::uint64_t seed);

    std::uint64_t next_u64();
    // n in [lo, hi] inclusive
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

    // 128-bit random value as 32 lowercase hex chars
    std::string session_id();
    // lowercase alphanumeric token
    std::string token(std::size_t len);

private:
    std::mutex mu_;
    std::mt19937_64 eng_;
    bool seeded_;
};

}  // namespace apiary

#include "rng.h"

namespace apiary {

Rng::Rng() : seeded_(false) {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    eng_.seed(seq);
}

Rng::Rng(std::uint64_t seed) : eng_(seed), seeded_(true) {}

void Rng::reseed(std::uint64_t seed) {
    std::lock_guard<std::mutex> lock(mu_);
    eng_.seed(seed);
    seeded_ = true;
}

std::uint64_t Rng::next_u64() {
    std::lock_guard<std::mutex> lock(mu_);
    return eng_();
}

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
    std::lock_guard<std::mutex> lock(mu_);
    std::uniform_int_distribution<std::uint64_t> dist(lo, hi);
    return dist(eng_);
}

std::string Rng::session_id() {
    static const char* hex = "0123456789abcdef";
    std::uint64_t a = next_u64();
    std::uint64_t b = next_u64();
    std::string out;
    out.reserve(32);
    for (int i = 60; i >= 0; i -= 4) out.push_back(hex[(a >> i) & 0xf]);
    for (int i = 60; i >= 0; i -= 4) out.push_back(hex[(b >> i) & 0xf]);
    return out;
}

std::string Rng::token(std::size_t len) {
    static const char* alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(alnum[uniform(0, 35)]);
    return out;
}

}  // namespace apiary

#include "pathomics/rng.hpp"

#include <cmath>

namespace pathomics {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

}  // namespace

SplitRng SplitRng::derive(std::string_view label) const {
    return SplitRng(mix(state_, fnv1a(label)));
}

SplitRng SplitRng::derive(std::uint64_t index) const {
    return SplitRng(mix(state_, index + 1));
}

std::uint64_t SplitRng::next_u64() { return splitmix64(state_); }

std::uint64_t SplitRng::uniform_index(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; desk-scale n keeps the bias
    // far below anything observable, but do the rejection anyway.
    if (n == 0) return 0;
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

double SplitRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SplitRng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace pathomics

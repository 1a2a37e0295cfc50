#pragma once

#include <cstdint>
#include <string_view>

namespace pathomics {

// Counter-based splittable generator (splitmix64 core). Every stochastic
// consumer gets its own derived stream, so runs are bit-reproducible and
// adding a consumer never shifts the draws of another.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}

    // Child stream keyed by a label; independent of draws on the parent.
    SplitRng derive(std::string_view label) const;
    SplitRng derive(std::uint64_t index) const;
    SplitRng derive(std::string_view label, std::uint64_t index) const {
        return derive(label).derive(index);
    }

    std::uint64_t next_u64();
    // [0, n)
    std::uint64_t uniform_index(std::uint64_t n);
    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    // standard normal, Box-Muller (one draw per call, no cached spare)
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

    // Fisher-Yates over [0, n), returned as an index permutation.
    template <typename Vec>
    void shuffle(Vec& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(v[i], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

}  // namespace pathomics

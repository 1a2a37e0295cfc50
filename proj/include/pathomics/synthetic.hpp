#pragma once

#include <array>
#include <cstdint>

#include "pathomics/cohort.hpp"

namespace pathomics {

// Synthetic cohort with controllable genotype-phenotype coupling. Both
// modalities are noisy linear images of one patient latent vector whose first
// component drives the discrete event-time distribution, so higher coupling
// means more survival signal in the features.
struct SynthConfig {
    std::size_t n_patients = 200;
    std::size_t k_min = 12;  // patches per slide, inclusive range
    std::size_t k_max = 24;
    std::size_t n_groups = 8;
    std::vector<std::size_t> group_dims;  // sized n_groups; defaults filled when empty
    double coupling = 0.9;                // rho in [0,1]
    double noise_scale = 1.0;
    double censoring_rate = 0.2;
    std::array<double, 4> base_hazards = {0.25, 0.35, 0.45, 0.55};
    double risk_slope = 2.0;  // beta > 0
    std::uint64_t seed = 7;
    std::size_t latent_dim = 8;

    void validate() const;  // throws std::invalid_argument on a bad knob
};

// Default functional-group names; the eighth is "other" because only seven
// named categories exist.
std::vector<std::string> default_group_names(std::size_t n);
std::vector<std::size_t> default_group_dims(std::size_t n);

Cohort generate_synthetic_cohort(const SynthConfig& cfg);

}  // namespace pathomics

#pragma once

#include <array>
#include <span>

#include "pathomics/layers.hpp"

namespace pathomics {

// Mean over patients and dimensions of the squared embedding difference.
// Zero exactly when the paired batches coincide.
Var fusion_loss(Graph& g, Var image_batch, Var genomics_batch);

// Ablation variant: mean over patients of (1 - cosine similarity), in [0, 2].
// Throws on a zero-norm embedding.
Var cosine_fusion_loss(Graph& g, Var image_batch, Var genomics_batch);

// Number of discrete survival bins. Fixed by the quartile discretization.
inline constexpr std::size_t kSurvivalBins = 4;
// Hazards are clamped into [kHazardFloor, 1 - kHazardFloor] before any log.
inline constexpr double kHazardFloor = 1e-7;

// Final FC layer producing one logit per survival bin.
struct RiskHead {
    Dense fc;

    void init(std::size_t in_dim, SplitRng rng);
    // fused {1, in_dim} -> logits {1, kSurvivalBins}
    Var logits(Graph& g, Var fused);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

// Graph-side hazard/survival curves for one patient. survival[r] is
// S(r) = prod_{u<=r} (1 - hazard_u); the implicit S(-1) is 1.
struct HazardCurves {
    Var hazards;                             // {kSurvivalBins}, clamped into (0,1)
    std::array<Var, kSurvivalBins> survival; // S(0)..S(3), each {1}
    Var risk;                                // -(S(0)+...+S(3)), {1}
};

HazardCurves hazard_curves(Graph& g, Var logits);

// Value-level profile, read off the graph.
struct HazardProfile {
    std::array<double, kSurvivalBins> hazards;
    std::array<double, kSurvivalBins + 1> survival;  // S(-1)=1 first
    double risk;
};

HazardProfile profile_of(Graph& g, const HazardCurves& curves);

// Appendix-style censored log-likelihood for one patient:
//   censored = 1 (lived past the bin):   -log S(Y)
//   censored = 0 (event in bin Y):       -log S(Y-1) - log hazard_Y
// Y must be a valid bin; S(-1)=1 makes Y=0 well defined.
Var survival_nll(const HazardCurves& curves, int bin, int censored);

// Mean of survival_nll over a nonempty batch.
Var batch_survival_loss(std::span<const HazardCurves> curves, std::span<const int> bins,
                        std::span<const int> censored);

}  // namespace pathomics

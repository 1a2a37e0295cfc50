#pragma once

#include <cstddef>
#include <vector>

#include "pathomics/layers.hpp"

namespace pathomics {

// Balanced random split of patch indices 0..patch_count-1 into n_groups
// disjoint nonempty sets; sizes differ by at most one. Deterministic per rng.
std::vector<std::vector<std::size_t>> partition_patches(std::size_t patch_count,
                                                        std::size_t n_groups, SplitRng& rng);

// Two dense layers d_g -> 256 -> 256 with SeLU after each and alpha dropout
// between them. Every genomics group owns its own instance since d_g varies.
struct SnnGroupEmbedder {
    Dense fc1;
    Dense fc2;

    void init(std::size_t in_dim, std::size_t embed_dim, SplitRng rng);
    // x {1, d_g} -> {1, embed_dim}; dropout only fires when training is on
    Var apply(Graph& g, Var x, bool training, double dropout_rate, SplitRng* dropout_rng);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

// Gated attention pooling over a patch group followed by the 1024 -> 256
// projection. One parameter set shared across all groups.
struct ImageGroupEmbedder {
    GatedAttention abr;
    Dense projection;

    void init(std::size_t patch_dim, std::size_t abr_hidden, std::size_t embed_dim, SplitRng rng);
    // group {k_n, patch_dim} -> pooled {1, patch_dim}
    Var pool_group(Graph& g, Var group);
    // group {k_n, patch_dim} -> {1, embed_dim}
    Var embed_group(Graph& g, Var group);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

}  // namespace pathomics

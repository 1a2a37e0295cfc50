#pragma once

#include "pathomics/layers.hpp"

namespace pathomics {

// A = softmax(Q K^T / sqrt(d_k)) row-wise; returns A V.
Var self_attention(Graph& g, Var q, Var k, Var v);

// Pre-norm transformer block: H + MSA(LN(H)), then + FF(LN(.)) with a
// dim -> ff_hidden -> dim ReLU feed-forward. No positional encoding; group
// order carries no meaning, so the block stays permutation-equivariant.
struct TransformerLayer {
    std::size_t heads = 4;
    LayerNorm ln1, ln2;
    Dense wq, wk, wv, wo;
    Dense ff1, ff2;

    void init(std::size_t dim, std::size_t heads_, std::size_t ff_hidden, SplitRng rng);
    // multi-head self-attention on an already-normalized input {N, dim}
    Var msa(Graph& g, Var h);
    Var apply(Graph& g, Var h);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

// One modality stream: two transformer layers followed by gated attention
// pooling of the N group embeddings into a single patient embedding.
struct ModalityStream {
    TransformerLayer layer1, layer2;
    GatedAttention pool;

    void init(std::size_t dim, std::size_t heads, std::size_t ff_hidden, std::size_t pool_hidden,
              SplitRng rng);
    // groups {N, dim} -> {1, dim}
    Var encode(Graph& g, Var groups);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

}  // namespace pathomics

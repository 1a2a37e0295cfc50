#pragma once

#include <string>
#include <vector>

#include "pathomics/gradcheck.hpp"
#include "pathomics/graph.hpp"
#include "pathomics/ops.hpp"
#include "pathomics/rng.hpp"

namespace pathomics {

// Fully connected layer, y = x W + b. Weights use uniform(+-1/sqrt(fan_in)).
struct Dense {
    Tensor W;  // {in, out}
    Tensor b;  // {out}

    void init(std::size_t in, std::size_t out, SplitRng rng);
    Var apply(Graph& g, Var x);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

struct LayerNorm {
    Tensor gamma;
    Tensor beta;

    void init(std::size_t dim);
    Var apply(Graph& g, Var x);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

// Gated attention scoring over the rows of a set: each row r gets weight
// softmax_r( w . (tanh(r V1) * sigm(r V2)) ). Used both for patch-group
// refining and for the patient-level global pooling.
struct GatedAttention {
    Tensor V1;  // {in, hidden}
    Tensor V2;  // {in, hidden}
    Tensor w;   // {hidden, 1}

    void init(std::size_t in, std::size_t hidden, SplitRng rng);
    // {k, in} -> {k} probability simplex over rows
    Var weights(Graph& g, Var rows);
    // {k, in} -> {1, in} convex combination of rows
    Var pool(Graph& g, Var rows);
    void collect(const std::string& prefix, std::vector<NamedParam>& out);
};

}  // namespace pathomics

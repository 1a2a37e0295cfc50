#include "pathomics/layers.hpp"

#include <cmath>

namespace pathomics {

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, SplitRng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

void Dense::init(std::size_t in, std::size_t out, SplitRng rng) {
    SplitRng wr = rng.derive("W");
    SplitRng br = rng.derive("b");
    W = uniform_init({in, out}, in, wr);
    b = uniform_init({out}, in, br);
}

Var Dense::apply(Graph& g, Var x) {
    return add_rowvec(matmul(x, g.param(W)), g.param(b));
}

void Dense::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".W", &W});
    out.push_back({prefix + ".b", &b});
}

void LayerNorm::init(std::size_t dim) {
    gamma = Tensor::ones({dim});
    beta = Tensor::zeros({dim});
}

Var LayerNorm::apply(Graph& g, Var x) {
    return layer_norm_rows(x, g.param(gamma), g.param(beta));
}

void LayerNorm::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".gamma", &gamma});
    out.push_back({prefix + ".beta", &beta});
}

void GatedAttention::init(std::size_t in, std::size_t hidden, SplitRng rng) {
    SplitRng r1 = rng.derive("V1");
    SplitRng r2 = rng.derive("V2");
    SplitRng rw = rng.derive("w");
    V1 = uniform_init({in, hidden}, in, r1);
    V2 = uniform_init({in, hidden}, in, r2);
    w = uniform_init({hidden, 1}, hidden, rw);
}

Var GatedAttention::weights(Graph& g, Var rows) {
    Var gate = mul(tanh(matmul(rows, g.param(V1))), sigmoid(matmul(rows, g.param(V2))));
    Var scores = matmul(gate, g.param(w));  // {k, 1}
    std::size_t k = g.value(scores).rows();
    return softmax(reshape(scores, {k}), 0);
}

Var GatedAttention::pool(Graph& g, Var rows) {
    Var a = weights(g, rows);
    std::size_t k = g.value(a).shape[0];
    return matmul(reshape(a, {1, k}), rows);
}

void GatedAttention::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".V1", &V1});
    out.push_back({prefix + ".V2", &V2});
    out.push_back({prefix + ".w", &w});
}

}  // namespace pathomics

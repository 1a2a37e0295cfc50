#include "pathomics/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathomics {

Var self_attention(Graph& g, Var q, Var k, Var v) {
    const Tensor& qv = g.value(q);
    const Tensor& kv = g.value(k);
    const Tensor& vv = g.value(v);
    if (qv.rank() != 2 || kv.rank() != 2 || vv.rank() != 2 || qv.cols() != kv.cols() ||
        kv.rows() != vv.rows()) {
        throw std::invalid_argument("self_attention: incompatible shapes " + shape_str(qv.shape) +
                                    ", " + shape_str(kv.shape) + ", " + shape_str(vv.shape));
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(qv.cols()));
    Var logits = affine(matmul(q, transpose(k)), scale, 0.0);
    Var attn = softmax(logits, 1);
    return matmul(attn, v);
}

void TransformerLayer::init(std::size_t dim, std::size_t heads_, std::size_t ff_hidden,
                            SplitRng rng) {
    if (heads_ == 0 || dim % heads_ != 0) {
        throw std::invalid_argument("transformer: head count " + std::to_string(heads_) +
                                    " must divide model dim " + std::to_string(dim));
    }
    heads = heads_;
    ln1.init(dim);
    ln2.init(dim);
    wq.init(dim, dim, rng.derive("wq"));
    wk.init(dim, dim, rng.derive("wk"));
    wv.init(dim, dim, rng.derive("wv"));
    wo.init(dim, dim, rng.derive("wo"));
    ff1.init(dim, ff_hidden, rng.derive("ff1"));
    ff2.init(ff_hidden, dim, rng.derive("ff2"));
}

Var TransformerLayer::msa(Graph& g, Var h) {
    std::size_t dim = g.value(h).cols();
    if (dim % heads != 0) {
        throw std::invalid_argument("msa: head count " + std::to_string(heads) +
                                    " must divide model dim " + std::to_string(dim));
    }
    std::size_t head_dim = dim / heads;
    Var q = wq.apply(g, h);
    Var k = wk.apply(g, h);
    Var v = wv.apply(g, h);
    std::vector<Var> outputs;
    outputs.reserve(heads);
    for (std::size_t i = 0; i < heads; ++i) {
        Var qi = slice(q, 1, i * head_dim, head_dim);
        Var ki = slice(k, 1, i * head_dim, head_dim);
        Var vi = slice(v, 1, i * head_dim, head_dim);
        outputs.push_back(self_attention(g, qi, ki, vi));
    }
    return wo.apply(g, concat(outputs, 1));
}

Var TransformerLayer::apply(Graph& g, Var h) {
    Var x = add(h, msa(g, ln1.apply(g, h)));
    Var ff = ff2.apply(g, relu(ff1.apply(g, ln2.apply(g, x))));
    return add(x, ff);
}

void TransformerLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    ln1.collect(prefix + ".ln1", out);
    ln2.collect(prefix + ".ln2", out);
    wq.collect(prefix + ".wq", out);
    wk.collect(prefix + ".wk", out);
    wv.collect(prefix + ".wv", out);
    wo.collect(prefix + ".wo", out);
    ff1.collect(prefix + ".ff1", out);
    ff2.collect(prefix + ".ff2", out);
}

void ModalityStream::init(std::size_t dim, std::size_t heads, std::size_t ff_hidden,
                          std::size_t pool_hidden, SplitRng rng) {
    layer1.init(dim, heads, ff_hidden, rng.derive("layer1"));
    layer2.init(dim, heads, ff_hidden, rng.derive("layer2"));
    pool.init(dim, pool_hidden, rng.derive("pool"));
}

Var ModalityStream::encode(Graph& g, Var groups) {
    Var h = layer2.apply(g, layer1.apply(g, groups));
    return pool.pool(g, h);
}

void ModalityStream::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    layer1.collect(prefix + ".layer1", out);
    layer2.collect(prefix + ".layer2", out);
    pool.collect(prefix + ".pool", out);
}

}  // namespace pathomics

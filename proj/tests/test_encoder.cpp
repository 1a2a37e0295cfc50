#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pathomics/adam.hpp"
#include "pathomics/encoder.hpp"

using namespace pathomics;

namespace {

Tensor permute_rows(const Tensor& m, const std::vector<std::size_t>& perm) {
    Tensor out = Tensor::zeros(m.shape);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(perm[i], j);
    return out;
}

}  // namespace

TEST_CASE("self attention: single row, zero logits, formula oracle") {
    SplitRng rng(61);
    {
        Graph g;
        Tensor q = oracles::random_tensor({1, 4}, rng);
        Tensor v = oracles::random_tensor({1, 4}, rng);
        const Tensor& out = g.value(self_attention(g, g.leaf(q), g.leaf(q), g.leaf(v)));
        CHECK(max_abs_diff(out, v) < 1e-15);  // A = [[1]]
    }
    {
        // Q orthogonal to every key row: uniform attention, column means of V
        Graph g;
        Tensor q = Tensor::zeros({2, 3});
        Tensor k = oracles::random_tensor({4, 3}, rng);
        Tensor v = oracles::random_tensor({4, 5}, rng);
        const Tensor& out = g.value(self_attention(g, g.leaf(q), g.leaf(k), g.leaf(v)));
        for (std::size_t j = 0; j < 5; ++j) {
            double mean = 0.0;
            for (std::size_t r = 0; r < 4; ++r) mean += v.at(r, j);
            mean /= 4.0;
            CHECK(out.at(0, j) == doctest::Approx(mean).epsilon(1e-12));
            CHECK(out.at(1, j) == doctest::Approx(mean).epsilon(1e-12));
        }
    }
    for (int it = 0; it < 120; ++it) {
        Graph g;
        Tensor q = oracles::random_tensor({3, 4}, rng);
        Tensor k = oracles::random_tensor({3, 4}, rng);
        Tensor v = oracles::random_tensor({3, 4}, rng);
        const Tensor& out = g.value(self_attention(g, g.leaf(q), g.leaf(k), g.leaf(v)));
        Tensor expect = oracles::self_attention_direct(q, k, v);
        CHECK(max_abs_diff(out, expect) < 1e-12);
    }
}

TEST_CASE("msa with one head and identity projections reduces to self attention") {
    SplitRng rng(67);
    std::size_t dim = 8;
    TransformerLayer layer;
    layer.init(dim, 1, 16, rng.derive("layer"));
    layer.wq.W = Tensor::zeros({dim, dim});
    layer.wk.W = Tensor::zeros({dim, dim});
    layer.wv.W = Tensor::zeros({dim, dim});
    layer.wo.W = Tensor::zeros({dim, dim});
    for (std::size_t j = 0; j < dim; ++j) {
        layer.wq.W.at(j, j) = 1.0;
        layer.wk.W.at(j, j) = 1.0;
        layer.wv.W.at(j, j) = 1.0;
        layer.wo.W.at(j, j) = 1.0;
    }
    layer.wq.b = Tensor::zeros({dim});
    layer.wk.b = Tensor::zeros({dim});
    layer.wv.b = Tensor::zeros({dim});
    layer.wo.b = Tensor::zeros({dim});

    Tensor h = oracles::random_tensor({5, dim}, rng);
    Graph g;
    const Tensor& got = g.value(layer.msa(g, g.leaf(h)));
    Tensor expect = oracles::self_attention_direct(h, h, h);
    CHECK(max_abs_diff(got, expect) < 1e-12);
}

TEST_CASE("msa equivariance and slice-and-concat oracle with four heads") {
    SplitRng rng(71);
    std::size_t dim = 16, heads = 4, head_dim = dim / heads;
    TransformerLayer layer;
    layer.init(dim, heads, 32, rng.derive("layer"));

    for (int it = 0; it < 30; ++it) {
        Tensor h = oracles::random_tensor({6, dim}, rng);

        Graph g;
        const Tensor& got = g.value(layer.msa(g, g.leaf(h)));

        // independent slice-and-concat evaluation
        auto project = [&](const Dense& d) {
            Tensor p = oracles::matmul_direct(h, d.W);
            for (std::size_t i = 0; i < p.rows(); ++i)
                for (std::size_t j = 0; j < p.cols(); ++j) p.at(i, j) += d.b.data[j];
            return p;
        };
        Tensor q = project(layer.wq), k = project(layer.wk), v = project(layer.wv);
        Tensor heads_out = Tensor::zeros({6, dim});
        for (std::size_t hd = 0; hd < heads; ++hd) {
            Tensor qs = Tensor::zeros({6, head_dim});
            Tensor ks = Tensor::zeros({6, head_dim});
            Tensor vs = Tensor::zeros({6, head_dim});
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < head_dim; ++j) {
                    qs.at(i, j) = q.at(i, hd * head_dim + j);
                    ks.at(i, j) = k.at(i, hd * head_dim + j);
                    vs.at(i, j) = v.at(i, hd * head_dim + j);
                }
            Tensor sa = oracles::self_attention_direct(qs, ks, vs);
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < head_dim; ++j)
                    heads_out.at(i, hd * head_dim + j) = sa.at(i, j);
        }
        Tensor expect = oracles::matmul_direct(heads_out, layer.wo.W);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < dim; ++j) expect.at(i, j) += layer.wo.b.data[j];
        CHECK(max_abs_diff(got, expect) < 1e-11);

        // permutation equivariance
        std::vector<std::size_t> perm = {3, 1, 5, 0, 4, 2};
        Graph g2;
        const Tensor& permuted = g2.value(layer.msa(g2, g2.leaf(permute_rows(h, perm))));
        Tensor expect_perm = permute_rows(got, perm);
        CHECK(max_abs_diff(permuted, expect_perm) < 1e-11);
    }
}

TEST_CASE("msa rejects head counts that do not divide the model dim") {
    SplitRng rng(73);
    TransformerLayer layer;
    CHECK_THROWS_AS(layer.init(16, 3, 32, rng), std::invalid_argument);
}

TEST_CASE("encode_patient: single group, permutation invariance, composed oracle") {
    SplitRng rng(79);
    std::size_t dim = 16;
    ModalityStream stream;
    stream.init(dim, 4, 32, 8, rng.derive("stream"));

    {
        // N=1: pooling weight is 1, output equals the transformed single row
        Tensor h = oracles::random_tensor({1, dim}, rng);
        Graph g;
        Var groups = g.leaf(h);
        Var transformed = stream.layer2.apply(g, stream.layer1.apply(g, groups));
        const Tensor& enc = g.value(stream.encode(g, g.leaf(h)));
        CHECK(max_abs_diff(enc, g.value(transformed)) < 1e-14);
    }

    for (int it = 0; it < 25; ++it) {
        Tensor h = oracles::random_tensor({8, dim}, rng);
        Graph g;
        const Tensor& enc = g.value(stream.encode(g, g.leaf(h)));

        std::vector<std::size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
        Graph g2;
        const Tensor& enc_perm = g2.value(stream.encode(g2, g2.leaf(permute_rows(h, perm))));
        CHECK(max_abs_diff(enc, enc_perm) < 1e-10);

        // composed route: layer1 then layer2 then gated pooling, all on-graph
        Graph g3;
        Var rows = g3.leaf(h);
        Var staged = stream.layer2.apply(g3, stream.layer1.apply(g3, rows));
        const Tensor& pooled = g3.value(stream.pool.pool(g3, staged));
        CHECK(max_abs_diff(enc, pooled) < 1e-13);
    }
}

TEST_CASE("modality streams keep disjoint parameters under optimization") {
    SplitRng rng(83);
    std::size_t dim = 8;
    ModalityStream image, genomics;
    image.init(dim, 2, 16, 4, rng.derive("img"));
    genomics.init(dim, 2, 16, 4, rng.derive("gen"));

    std::vector<NamedParam> gen_params;
    genomics.collect("gen", gen_params);
    std::vector<Tensor> before;
    for (const NamedParam& p : gen_params) before.push_back(*p.tensor);

    // Train only the image stream for a few steps.
    Tensor h = oracles::random_tensor({4, dim}, rng);
    std::vector<NamedParam> img_params;
    image.collect("img", img_params);
    std::vector<Tensor*> ptrs;
    for (NamedParam& p : img_params) ptrs.push_back(p.tensor);
    AdamState st;
    st.lr = 1e-2;
    for (int step = 0; step < 3; ++step) {
        Graph g;
        Var loss = mean_all(square(image.encode(g, g.leaf(h))));
        g.backward(loss);
        std::vector<Tensor> grads;
        std::vector<const Tensor*> gp;
        for (const NamedParam& p : img_params) grads.push_back(g.grad_for(*p.tensor));
        for (const Tensor& t : grads) gp.push_back(&t);
        adam_step(ptrs, gp, st);
    }
    for (std::size_t i = 0; i < gen_params.size(); ++i) {
        CHECK(max_abs_diff(*gen_params[i].tensor, before[i]) == 0.0);
    }
}

TEST_CASE("full encoder passes the finite-difference audit") {
    SplitRng rng(89);
    std::size_t dim = 16;
    ModalityStream stream;
    stream.init(dim, 4, 32, 8, rng.derive("stream"));
    Tensor h = oracles::random_tensor({5, dim}, rng);

    auto build = [&](Graph& g) { return mean_all(square(stream.encode(g, g.leaf(h)))); };
    std::vector<NamedParam> params;
    stream.collect("stream", params);
    GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.samples_per_tensor = 20;
    opt.sample_seed = 11;
    CHECK(grad_check(build, params, opt).max_rel_error < 1e-4);
}

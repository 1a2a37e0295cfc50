#include <doctest.h>

#include <cmath>
#include <cstring>
#include <memory>

#include "oracles.hpp"
#include "pathomics/adam.hpp"
#include "pathomics/gradcheck.hpp"
#include "pathomics/ops.hpp"

using namespace pathomics;

TEST_CASE("tensor shape and data length stay consistent") {
    CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({0}, {}), std::invalid_argument);
    Tensor t = Tensor::matrix(2, 2, {1, 2, 3, 4});
    CHECK(t.at(1, 0) == 3.0);
}

TEST_CASE("matmul matches hand arithmetic and identity") {
    Graph g;
    Var a = g.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}));
    Var b = g.leaf(Tensor::matrix(2, 1, {0, 1}));
    Var c = matmul(a, b);
    CHECK(g.value(c).data == std::vector<double>{2, 4});

    Var eye = g.leaf(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    SplitRng rng(11);
    Tensor x = oracles::random_tensor({2, 5}, rng);
    Var xv = g.leaf(x);
    CHECK(max_abs_diff(g.value(matmul(eye, xv)), x) == 0.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
    Graph g;
    Var a = g.leaf(Tensor::zeros({2, 3}));
    Var b = g.leaf(Tensor::zeros({2, 3}));
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2x3]"), std::invalid_argument);
}

TEST_CASE("matmul gradient of sum(A*B) matches central differences") {
    SplitRng rng(5);
    Tensor a = oracles::random_tensor({3, 4}, rng);
    Tensor b = oracles::random_tensor({4, 2}, rng);
    auto build = [&](Graph& g) { return sum_all(matmul(g.param(a), g.param(b))); };
    NamedParam params[] = {{"a", &a}, {"b", &b}};
    GradCheckResult res = grad_check(build, params, {});
    CHECK(res.max_rel_error < 1e-5);
}

TEST_CASE("softmax: symmetry, shift invariance, direct oracle") {
    Graph g;
    Var s = softmax(g.leaf(Tensor::vector({0, 0})), 0);
    CHECK(g.value(s).data[0] == doctest::Approx(0.5).epsilon(1e-14));

    SplitRng rng(3);
    for (int it = 0; it < 50; ++it) {
        double x = rng.uniform(-30, 30);
        Var same = softmax(g.leaf(Tensor::vector({x, x, x})), 0);
        for (double v : g.value(same).data) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-13));

        std::vector<double> vals = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        Var base = softmax(g.leaf(Tensor::vector(vals)), 0);
        double shift = rng.uniform(-40, 40);
        std::vector<double> shifted = vals;
        for (double& v : shifted) v += shift;
        Var moved = softmax(g.leaf(Tensor::vector(shifted)), 0);
        CHECK(max_abs_diff(g.value(base), g.value(moved)) < 1e-12);

        std::vector<double> expect = oracles::softmax_direct(vals);
        double sum = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            CHECK(g.value(base).data[i] == doctest::Approx(expect[i]).epsilon(1e-12));
            CHECK(g.value(base).data[i] >= 0.0);
            sum += g.value(base).data[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    Var fixed = softmax(g.leaf(Tensor::vector({1, 2, 3})), 0);
    std::vector<double> expect = oracles::softmax_direct({1, 2, 3});
    CHECK(max_abs_diff(g.value(fixed), Tensor::vector(expect)) < 1e-14);
}

TEST_CASE("softmax handles both matrix axes") {
    Graph g;
    Var m = g.leaf(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    const Tensor& rows = g.value(softmax(m, 1));
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = rows.at(i, 0) + rows.at(i, 1) + rows.at(i, 2);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    const Tensor& cols = g.value(softmax(m, 0));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(cols.at(0, j) + cols.at(1, j) - 1.0) <= 1e-12);
    }
}

TEST_CASE("selu hits the canonical constants") {
    Graph g;
    CHECK(g.value(selu(g.leaf(Tensor::scalar(0)))).data[0] == 0.0);
    CHECK(g.value(selu(g.leaf(Tensor::scalar(1)))).data[0] ==
          doctest::Approx(1.0507009873554805).epsilon(1e-15));
    // analytic limit of lambda*alpha*(e^x - 1) as x -> -inf
    double deep = g.value(selu(g.leaf(Tensor::scalar(-60)))).data[0];
    CHECK(deep == doctest::Approx(-1.7580993408473766).epsilon(1e-12));
    CHECK(kSeluSaturation == doctest::Approx(-1.7580993408473766).epsilon(1e-15));
}

TEST_CASE("elementwise op values") {
    Graph g;
    CHECK(g.value(sigmoid(g.leaf(Tensor::scalar(0)))).data[0] == 0.5);
    CHECK(g.value(tanh(g.leaf(Tensor::scalar(0)))).data[0] == 0.0);
    CHECK(g.value(mean_all(g.leaf(Tensor::vector({1, 2, 3})))).data[0] == 2.0);
    CHECK_THROWS_AS(log(g.leaf(Tensor::vector({1.0, 0.0}))), std::domain_error);
    CHECK_THROWS_AS(log(g.leaf(Tensor::vector({-2.0}))), std::domain_error);
}

TEST_CASE("every operator passes a finite-difference audit on random tensors") {
    SplitRng rng(17);
    auto away_from_kinks = [&](std::vector<std::size_t> shape) {
        Tensor t = oracles::random_tensor(shape, rng);
        for (double& v : t.data) {
            if (std::abs(v) < 0.05) v = v < 0 ? v - 0.1 : v + 0.1;
        }
        return t;
    };

    Tensor x = away_from_kinks({3, 4});
    Tensor y = away_from_kinks({3, 4});
    Tensor v = away_from_kinks({4});

    struct Case {
        const char* name;
        std::function<Var(Graph&)> build;
    };
    std::vector<Case> cases;
    cases.push_back({"selu", [&](Graph& g) { return mean_all(selu(g.param(x))); }});
    cases.push_back({"tanh", [&](Graph& g) { return mean_all(tanh(g.param(x))); }});
    cases.push_back({"sigmoid", [&](Graph& g) { return mean_all(sigmoid(g.param(x))); }});
    cases.push_back({"relu", [&](Graph& g) { return mean_all(relu(g.param(x))); }});
    cases.push_back({"square", [&](Graph& g) { return mean_all(square(g.param(x))); }});
    cases.push_back({"log", [&](Graph& g) { return mean_all(log(square(g.param(x)))); }});
    cases.push_back({"sqrt", [&](Graph& g) { return mean_all(sqrt(square(g.param(x)))); }});
    cases.push_back({"add", [&](Graph& g) { return mean_all(add(g.param(x), g.param(y))); }});
    cases.push_back({"sub", [&](Graph& g) { return mean_all(sub(g.param(x), g.param(y))); }});
    cases.push_back({"mul", [&](Graph& g) { return mean_all(mul(g.param(x), g.param(y))); }});
    cases.push_back({"div", [&](Graph& g) {
        return mean_all(div(g.param(x), affine(square(g.param(y)), 1.0, 0.5)));
    }});
    cases.push_back({"add_rowvec",
                     [&](Graph& g) { return mean_all(add_rowvec(g.param(x), g.param(v))); }});
    cases.push_back({"affine", [&](Graph& g) { return mean_all(affine(g.param(x), -2.5, 1.0)); }});
    cases.push_back({"softmax_rows", [&](Graph& g) {
        return mean_all(square(softmax(g.param(x), 1)));
    }});
    cases.push_back({"softmax_cols", [&](Graph& g) {
        return mean_all(square(softmax(g.param(x), 0)));
    }});
    cases.push_back({"transpose", [&](Graph& g) {
        return mean_all(square(transpose(g.param(x))));
    }});
    cases.push_back({"matmul", [&](Graph& g) {
        return mean_all(square(matmul(g.param(x), transpose(g.param(y)))));
    }});
    cases.push_back({"concat_slice", [&](Graph& g) {
        Var joined = concat({g.param(x), g.param(y)}, 1);
        return mean_all(square(slice(joined, 1, 2, 4)));
    }});
    cases.push_back({"gather_rows", [&](Graph& g) {
        return mean_all(square(gather_rows(g.param(x), {2, 0, 2})));
    }});
    cases.push_back({"reshape", [&](Graph& g) {
        return mean_all(square(reshape(g.param(x), {4, 3})));
    }});
    cases.push_back({"mean", [&](Graph& g) { return mean_all(square(g.param(x))); }});
    cases.push_back({"sum", [&](Graph& g) { return sum_all(square(g.param(x))); }});
    cases.push_back({"clamp", [&](Graph& g) {
        return mean_all(clamp(g.param(x), -0.8, 0.8));
    }});
    cases.push_back({"layer_norm", [&](Graph& g) {
        return mean_all(square(layer_norm_rows(g.param(x), g.param(v), g.param(v))));
    }});

    for (const Case& c : cases) {
        NamedParam params[] = {{"x", &x}, {"y", &y}, {"v", &v}};
        GradCheckResult res = grad_check(c.build, params, {});
        INFO(c.name);
        CHECK(res.max_rel_error < 1e-5);
    }
}

TEST_CASE("backward visits each node once; repeating it doubles every gradient") {
    SplitRng rng(23);
    Tensor xt = oracles::random_tensor({4}, rng);
    Graph g;
    Var x = g.param(xt);
    Var shared = square(x);
    Var loss = sum_all(add(shared, mul(shared, x)));  // diamond fan-out
    g.backward(loss);
    CHECK(g.backward_visits() == g.node_count());

    Tensor once = g.grad(x);
    g.backward(loss);
    Tensor twice = g.grad(x);
    for (std::size_t i = 0; i < once.data.size(); ++i) {
        CHECK(twice.data[i] == 2.0 * once.data[i]);
    }
    g.zero_grad();
    g.backward(loss);
    CHECK(max_abs_diff(g.grad(x), once) == 0.0);
}

TEST_CASE("alpha dropout: identities, parameter error, moment preservation") {
    SplitRng rng(31);
    Graph g;
    Tensor xt = oracles::random_tensor({50}, rng);
    Var x = g.leaf(xt);
    SplitRng drop = rng.derive("drop");

    CHECK(max_abs_diff(g.value(alpha_dropout(x, 0.0, true, drop)), xt) == 0.0);
    CHECK(max_abs_diff(g.value(alpha_dropout(x, 0.3, false, drop)), xt) == 0.0);
    CHECK_THROWS_AS(alpha_dropout(x, 1.0, true, drop), std::invalid_argument);
    CHECK_THROWS_AS(alpha_dropout(x, -0.1, true, drop), std::invalid_argument);

    // Monte Carlo moment check on 1e5 unit-Gaussian draws.
    Tensor big = oracles::random_tensor({100000}, rng);
    Var bigv = g.leaf(big);
    const Tensor& out = g.value(alpha_dropout(bigv, 0.25, true, drop));
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= static_cast<double>(out.data.size());
    double var = 0.0;
    for (double v : out.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.data.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("alpha dropout gradient flows only through kept entries") {
    SplitRng rng(37);
    Tensor xt = oracles::random_tensor({40}, rng);
    SplitRng drop_master(99);
    auto build = [&](Graph& g) {
        SplitRng drop = drop_master;  // same stream every call keeps it deterministic
        return mean_all(square(alpha_dropout(g.param(xt), 0.4, true, drop)));
    };
    NamedParam p{"x", &xt};
    CHECK(grad_check(build, std::span<const NamedParam>(&p, 1), {}).max_rel_error < 1e-5);
}

TEST_CASE("adam: zero-grad fixpoint, signed first step, scalar oracle, reproducibility") {
    Tensor p = Tensor::vector({1.0, -2.0, 3.0});
    Tensor zero = Tensor::zeros({3});
    AdamState st;
    st.lr = 0.1;
    Tensor* params[] = {&p};
    const Tensor* grads[] = {&zero};
    adam_step(params, grads, st);
    CHECK(p.data == std::vector<double>{1.0, -2.0, 3.0});
    CHECK(st.t == 1);

    Tensor q = Tensor::vector({0.5, -0.25});
    Tensor gq = Tensor::vector({0.8, -1.3});
    AdamState st2;
    st2.lr = 0.1;
    Tensor* params2[] = {&q};
    const Tensor* grads2[] = {&gq};
    adam_step(params2, grads2, st2);
    // bias-corrected first step moves by ~ -lr * sign(grad)
    CHECK(q.data[0] == doctest::Approx(0.5 - 0.1).epsilon(1e-6));
    CHECK(q.data[1] == doctest::Approx(-0.25 + 0.1).epsilon(1e-6));

    // two steps with constant gradients against an independent scalar oracle
    Tensor r = Tensor::vector({1.5});
    Tensor gr = Tensor::vector({0.7});
    AdamState st3;
    st3.lr = 0.05;
    Tensor* params3[] = {&r};
    const Tensor* grads3[] = {&gr};
    oracles::ScalarAdam oracle;
    double expect = 1.5;
    for (int i = 0; i < 2; ++i) {
        adam_step(params3, grads3, st3);
        expect = oracle.step(expect, 0.7, 0.05, st3.beta1, st3.beta2, st3.eps);
    }
    CHECK(std::abs(r.data[0] - expect) < 1e-12);

    // bit-reproducible on identical inputs
    Tensor a1 = Tensor::vector({0.3, 0.9});
    Tensor a2 = a1;
    Tensor ga = Tensor::vector({-0.4, 0.2});
    AdamState s1, s2;
    Tensor* pa1[] = {&a1};
    Tensor* pa2[] = {&a2};
    const Tensor* pga[] = {&ga};
    for (int i = 0; i < 5; ++i) {
        adam_step(pa1, pga, s1);
        adam_step(pa2, pga, s2);
    }
    CHECK(std::memcmp(a1.data.data(), a2.data.data(), 2 * sizeof(double)) == 0);

    Tensor bad = Tensor::vector({1.0});
    Tensor gbad = Tensor::zeros({2});
    AdamState sbad;
    Tensor* pb[] = {&bad};
    const Tensor* gb[] = {&gbad};
    CHECK_THROWS_AS(adam_step(pb, gb, sbad), std::invalid_argument);
}

TEST_CASE("grad_check: exact quadratic, corrupted backward, nondeterminism") {
    SplitRng rng(41);
    Tensor x = oracles::random_tensor({6}, rng);
    auto quad = [&](Graph& g) { return sum_all(square(g.param(x))); };
    NamedParam p{"x", &x};
    CHECK(grad_check(quad, std::span<const NamedParam>(&p, 1), {}).max_rel_error < 1e-7);

    // a deliberately wrong backward rule must trip the checker
    auto corrupted = [&](Graph& g) {
        Var xv = g.param(x);
        const Tensor& val = g.value(xv);
        Tensor out = val;
        for (double& v : out.data) v *= 2.0;
        std::size_t xid = xv.id;
        std::size_t self = g.node_count();
        Var bad = g.make_node("bad_scale", std::move(out), {xid}, [self, xid](Graph& gg) {
            const Tensor& adj = gg.adjoint_of(self);
            Tensor dx = adj;
            for (double& v : dx.data) v *= 3.0;  // truth is 2.0
            gg.add_adjoint(xid, dx);
        });
        return sum_all(bad);
    };
    CHECK(grad_check(corrupted, std::span<const NamedParam>(&p, 1), {}).max_rel_error > 1e-2);

    auto nondet = [&, n = std::make_shared<int>(0)](Graph& g) {
        *n += 1;
        return sum_all(affine(g.param(x), 1.0, static_cast<double>(*n)));
    };
    CHECK_THROWS_WITH_AS(grad_check(nondet, std::span<const NamedParam>(&p, 1), {}),
                         doctest::Contains("deterministic"), std::runtime_error);
}

TEST_CASE("forward pass rejects non-finite results") {
    Graph g;
    Var big = g.leaf(Tensor::scalar(1e308));
    CHECK_THROWS_WITH_AS(square(big), doctest::Contains("non-finite"), std::runtime_error);
}

#include "pathomics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace pathomics {

namespace {

double forward_value(const std::function<Var(Graph&)>& build_loss) {
    Graph g;
    Var loss = build_loss(g);
    const Tensor& v = g.value(loss);
    if (v.data.size() != 1) {
        throw std::invalid_argument("grad_check: loss must be scalar, got " + shape_str(v.shape));
    }
    return v.data[0];
}

}  // namespace

GradCheckResult grad_check(const std::function<Var(Graph&)>& build_loss,
                           std::span<const NamedParam> params, const GradCheckOptions& options) {
    double l0 = forward_value(build_loss);
    double l1 = forward_value(build_loss);
    if (std::memcmp(&l0, &l1, sizeof(double)) != 0) {
        throw std::runtime_error("grad_check: loss is not deterministic (two forward passes "
                                 "differ); disable dropout and fix rng streams");
    }

    Graph g;
    Var loss = build_loss(g);
    g.backward(loss);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (const NamedParam& p : params) analytic.push_back(g.grad_for(*p.tensor));

    GradCheckResult result;
    SplitRng sampler(options.sample_seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& t = *params[pi].tensor;
        std::vector<std::size_t> indices;
        if (options.samples_per_tensor == 0 || options.samples_per_tensor >= t.data.size()) {
            indices.resize(t.data.size());
            for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        } else {
            SplitRng local = sampler.derive(params[pi].name).derive(pi);
            for (std::size_t s = 0; s < options.samples_per_tensor; ++s) {
                indices.push_back(static_cast<std::size_t>(local.uniform_index(t.data.size())));
            }
        }
        for (std::size_t idx : indices) {
            double saved = t.data[idx];
            t.data[idx] = saved + options.eps;
            double lp = forward_value(build_loss);
            t.data[idx] = saved - options.eps;
            double lm = forward_value(build_loss);
            t.data[idx] = saved;
            double numeric = (lp - lm) / (2.0 * options.eps);
            double a = analytic[pi].data[idx];
            double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = params[pi].name;
                result.worst_index = idx;
            }
        }
    }
    return result;
}

}  // namespace pathomics

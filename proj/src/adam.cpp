#include "pathomics/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathomics {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    }
    if (state.m.empty()) {
        state.m.reserve(params.size());
        state.v.reserve(params.size());
        for (const Tensor* p : params) {
            state.m.push_back(Tensor::zeros(p->shape));
            state.v.push_back(Tensor::zeros(p->shape));
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state built for " +
                                    std::to_string(state.m.size()) + " params, got " +
                                    std::to_string(params.size()));
    }
    state.t += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        require_same_shape(p, g, "adam_step");
        require_same_shape(p, state.m[i], "adam_step");
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            double gk = g.data[k];
            double m = state.beta1 * state.m[i].data[k] + (1.0 - state.beta1) * gk;
            double v = state.beta2 * state.v[i].data[k] + (1.0 - state.beta2) * gk * gk;
            state.m[i].data[k] = m;
            state.v[i].data[k] = v;
            double mhat = m / bc1;
            double vhat = v / bc2;
            p.data[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace pathomics

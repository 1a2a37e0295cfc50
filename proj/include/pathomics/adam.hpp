#pragma once

#include <span>
#include <vector>

#include "pathomics/tensor.hpp"

namespace pathomics {

// State for one fixed parameter list. Moments are sized lazily on the first
// step; t advances by exactly 1 per step call.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

// Standard bias-corrected Adam update, in place. The params/grads lists must
// line up with each other and, after the first call, with the state.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state);

}  // namespace pathomics

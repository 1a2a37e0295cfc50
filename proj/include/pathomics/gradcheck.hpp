#pragma once

#include <functional>
#include <span>
#include <string>

#include "pathomics/graph.hpp"
#include "pathomics/rng.hpp"

namespace pathomics {

struct NamedParam {
    std::string name;
    Tensor* tensor;
};

struct GradCheckOptions {
    double eps = 1e-6;
    // 0 checks every entry; otherwise a seeded random subset per tensor.
    std::size_t samples_per_tensor = 0;
    std::uint64_t sample_seed = 0;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
};

// Central-difference check of the analytic gradients produced by build_loss.
// build_loss must construct a scalar loss on the given graph, binding each
// checked tensor via Graph::param, and must be deterministic (dropout off);
// two forward passes are compared bit-for-bit and a mismatch throws.
//
// Error metric per entry: |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const std::function<Var(Graph&)>& build_loss,
                           std::span<const NamedParam> params,
                           const GradCheckOptions& options = {});

}  // namespace pathomics

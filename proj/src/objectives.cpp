#include "pathomics/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathomics {

Var fusion_loss(Graph& g, Var image_batch, Var genomics_batch) {
    const Tensor& iv = g.value(image_batch);
    const Tensor& gv = g.value(genomics_batch);
    require_same_shape(iv, gv, "fusion_loss");
    return mean_all(square(sub(image_batch, genomics_batch)));
}

Var cosine_fusion_loss(Graph& g, Var image_batch, Var genomics_batch) {
    const Tensor& iv = g.value(image_batch);
    const Tensor& gv = g.value(genomics_batch);
    require_same_shape(iv, gv, "cosine_fusion_loss");
    if (iv.rank() != 2) throw std::invalid_argument("cosine_fusion_loss: rank-2 batch required");
    std::size_t rows = iv.rows();
    for (std::size_t i = 0; i < rows; ++i) {
        double ni = 0.0, ng = 0.0;
        for (std::size_t j = 0; j < iv.cols(); ++j) {
            ni += iv.at(i, j) * iv.at(i, j);
            ng += gv.at(i, j) * gv.at(i, j);
        }
        if (ni == 0.0 || ng == 0.0) {
            throw std::domain_error("cosine_fusion_loss: degenerate zero-norm embedding at row " +
                                    std::to_string(i));
        }
    }
    std::vector<Var> terms;
    terms.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        Var a = slice(image_batch, 0, i, 1);
        Var b = slice(genomics_batch, 0, i, 1);
        Var dot = reshape(matmul(a, transpose(b)), {1});
        Var norm_a = sqrt(sum_all(square(a)));
        Var norm_b = sqrt(sum_all(square(b)));
        Var cosine = div(dot, mul(norm_a, norm_b));
        terms.push_back(affine(cosine, -1.0, 1.0));
    }
    return mean_all(concat(terms, 0));
}

void RiskHead::init(std::size_t in_dim, SplitRng rng) { fc.init(in_dim, kSurvivalBins, rng); }

Var RiskHead::logits(Graph& g, Var fused) { return fc.apply(g, fused); }

void RiskHead::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    fc.collect(prefix, out);
}

HazardCurves hazard_curves(Graph& g, Var logits) {
    const Tensor& lv = g.value(logits);
    if (lv.data.size() != kSurvivalBins) {
        throw std::invalid_argument("hazard_curves: expected " + std::to_string(kSurvivalBins) +
                                    " logits, got " + shape_str(lv.shape));
    }
    HazardCurves curves;
    curves.hazards =
        clamp(sigmoid(reshape(logits, {kSurvivalBins})), kHazardFloor, 1.0 - kHazardFloor);
    Var keep = affine(curves.hazards, -1.0, 1.0);  // 1 - hazard per bin
    Var running = slice(keep, 0, 0, 1);
    curves.survival[0] = running;
    for (std::size_t r = 1; r < kSurvivalBins; ++r) {
        running = mul(running, slice(keep, 0, r, 1));
        curves.survival[r] = running;
    }
    Var total = curves.survival[0];
    for (std::size_t r = 1; r < kSurvivalBins; ++r) total = add(total, curves.survival[r]);
    curves.risk = neg(total);
    return curves;
}

HazardProfile profile_of(Graph& g, const HazardCurves& curves) {
    HazardProfile p;
    const Tensor& h = g.value(curves.hazards);
    for (std::size_t r = 0; r < kSurvivalBins; ++r) p.hazards[r] = h.data[r];
    p.survival[0] = 1.0;
    for (std::size_t r = 0; r < kSurvivalBins; ++r) {
        p.survival[r + 1] = g.value(curves.survival[r]).data[0];
    }
    p.risk = g.value(curves.risk).data[0];
    return p;
}

Var survival_nll(const HazardCurves& curves, int bin, int censored) {
    if (bin < 0 || bin >= static_cast<int>(kSurvivalBins)) {
        throw std::invalid_argument("survival_nll: bin " + std::to_string(bin) +
                                    " outside 0.." + std::to_string(kSurvivalBins - 1));
    }
    if (censored != 0 && censored != 1) {
        throw std::invalid_argument("survival_nll: censor flag must be 0 or 1");
    }
    std::size_t y = static_cast<std::size_t>(bin);
    if (censored == 1) {
        return neg(log(curves.survival[y]));
    }
    Var event_term = neg(log(slice(curves.hazards, 0, y, 1)));
    if (y == 0) return event_term;  // S(-1) = 1 contributes nothing
    return add(neg(log(curves.survival[y - 1])), event_term);
}

Var batch_survival_loss(std::span<const HazardCurves> curves, std::span<const int> bins,
                        std::span<const int> censored) {
    if (curves.empty()) throw std::invalid_argument("batch_survival_loss: empty batch");
    if (curves.size() != bins.size() || curves.size() != censored.size()) {
        throw std::invalid_argument("batch_survival_loss: length mismatch");
    }
    std::vector<Var> terms;
    terms.reserve(curves.size());
    for (std::size_t i = 0; i < curves.size(); ++i) {
        terms.push_back(survival_nll(curves[i], bins[i], censored[i]));
    }
    return mean_all(concat(terms, 0));
}

}  // namespace pathomics

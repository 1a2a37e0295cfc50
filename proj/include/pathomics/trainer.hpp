#pragma once

#include <span>

#include "pathomics/adam.hpp"
#include "pathomics/checkpoint.hpp"
#include "pathomics/config.hpp"

namespace pathomics {

struct PretrainResult {
    std::vector<double> epoch_losses;  // mean fusion loss per epoch
};

// Trains both modality streams on the given ids with the configured fusion
// loss. Throws if any training id appears in the forbidden (test) list.
PretrainResult pretrain_fold(PathOmicsModel& model, const Cohort& cohort,
                             std::span<const std::string> ids,
                             std::span<const std::string> forbidden, const RunConfig& cfg,
                             SplitRng rng);

struct FinetuneResult {
    std::vector<double> epoch_losses;
    std::vector<double> epoch_val_cindex;
    std::size_t best_epoch = 0;
    double best_val_cindex = 0.0;
    BinEdges edges{};  // fit on the finetune subset only
};

// Discrete-time survival finetuning in the configured modality mode; tracks
// validation C-index per epoch and leaves the model at the best epoch.
FinetuneResult finetune_fold(PathOmicsModel& model, const Cohort& cohort, const FoldPlan& fold,
                             std::span<const std::string> forbidden, const RunConfig& cfg,
                             Modality mode, SplitRng rng);

// Deterministic (dropout off) risk scores; the patch partition stream derives
// from each patient id so results do not depend on evaluation order.
std::vector<double> compute_risks(PathOmicsModel& model, const Cohort& cohort,
                                  std::span<const std::string> ids, Modality mode,
                                  SplitRng eval_rng);

double evaluate_cindex(PathOmicsModel& model, const Cohort& cohort,
                       std::span<const std::string> ids, Modality mode, SplitRng eval_rng);

// Mean fusion loss over ids without touching parameters (dropout off).
double fusion_loss_value(PathOmicsModel& model, const Cohort& cohort,
                         std::span<const std::string> ids, FusionKind kind, SplitRng eval_rng);

// Patient embeddings for retrieval-style diagnostics, one row per id.
Tensor embeddings_matrix(PathOmicsModel& model, const Cohort& cohort,
                         std::span<const std::string> ids, Modality mode, SplitRng eval_rng);

}  // namespace pathomics

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathomics/cohort.hpp"

namespace pathomics {

enum class Scheme { internal, external };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct FoldPlan {
    std::vector<std::string> pretrain;
    std::vector<std::string> finetune;
    std::vector<std::string> validation;
};

struct SplitPlan {
    Scheme scheme = Scheme::internal;
    std::vector<std::string> test;
    std::vector<FoldPlan> folds;

    // Throws when a training-role id also appears in the test subset.
    void check_roles() const;
};

// internal: 80/20 train/test, four folds over the train set; each fold trains
// (pretrain + finetune) on the other three and validates on itself.
// external: the cohort splits 50/50 into a pretrain cohort (five folds, each
// training on the other four) and a finetune cohort split 60/20/20 into
// finetune/validation/test shared across folds.
//
// Reshuffles until every fold and finetune subset holds at least one
// uncensored patient and every validation subset has a comparable pair;
// throws a degenerate-cohort error when that cannot be met.
SplitPlan make_splits(const Cohort& cohort, Scheme scheme, std::uint64_t seed);

// Shrinks every fold's finetune subset to round(fraction * n) ids, keeping at
// least one uncensored patient (bounded resampling, then forced inclusion).
// Validation and test subsets are untouched.
SplitPlan subsample_finetune(const SplitPlan& plan, const Cohort& cohort, double fraction,
                             std::uint64_t seed);

}  // namespace pathomics

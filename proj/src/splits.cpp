#include "pathomics/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pathomics/rng.hpp"

namespace pathomics {

namespace {

constexpr int kMaxShuffles = 200;

std::vector<std::string> ids_of(const Cohort& cohort) {
    std::vector<std::string> ids;
    ids.reserve(cohort.patients.size());
    for (const PatientRecord& p : cohort.patients) ids.push_back(p.id);
    return ids;
}

bool has_uncensored(const Cohort& cohort, const std::vector<std::string>& ids) {
    for (const std::string& id : ids) {
        if (cohort.patient(id).survival.event == 1) return true;
    }
    return false;
}

bool validation_usable(const Cohort& cohort, const std::vector<std::string>& ids) {
    return has_comparable_pair(cohort.survival_of(ids));
}

// Balanced contiguous chunks of a shuffled id list.
std::vector<std::vector<std::string>> chunk(const std::vector<std::string>& ids,
                                            std::size_t n_chunks) {
    std::vector<std::vector<std::string>> chunks(n_chunks);
    std::size_t base = ids.size() / n_chunks;
    std::size_t extra = ids.size() % n_chunks;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        std::size_t len = base + (c < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) chunks[c].push_back(ids[pos++]);
    }
    return chunks;
}

std::vector<std::string> concat_except(const std::vector<std::vector<std::string>>& chunks,
                                       std::size_t skip) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        if (c == skip) continue;
        out.insert(out.end(), chunks[c].begin(), chunks[c].end());
    }
    return out;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::internal ? "internal" : "external"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "internal") return Scheme::internal;
    if (s == "external") return Scheme::external;
    throw std::invalid_argument("unknown scheme '" + s + "' (internal|external)");
}

void SplitPlan::check_roles() const {
    std::set<std::string> test_ids(test.begin(), test.end());
    for (const FoldPlan& f : folds) {
        for (const auto* role : {&f.pretrain, &f.finetune, &f.validation}) {
            for (const std::string& id : *role) {
                if (test_ids.count(id)) {
                    throw std::runtime_error("split plan: test patient '" + id +
                                             "' leaked into a training role");
                }
            }
        }
    }
}

SplitPlan make_splits(const Cohort& cohort, Scheme scheme, std::uint64_t seed) {
    std::vector<std::string> all = ids_of(cohort);
    if (all.size() < 10) {
        throw std::runtime_error("make_splits: degenerate cohort, need >= 10 patients, have " +
                                 std::to_string(all.size()));
    }
    SplitRng rng = SplitRng(seed).derive("splits");

    for (int attempt = 0; attempt < kMaxShuffles; ++attempt) {
        std::vector<std::string> ids = all;
        rng.derive("attempt", static_cast<std::uint64_t>(attempt)).shuffle(ids);

        SplitPlan plan;
        plan.scheme = scheme;
        bool ok = true;

        if (scheme == Scheme::internal) {
            std::size_t n_test =
                static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(ids.size())));
            n_test = std::min(std::max<std::size_t>(n_test, 1), ids.size() - 4);
            plan.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
            std::vector<std::string> train(ids.begin() + static_cast<std::ptrdiff_t>(n_test),
                                           ids.end());
            auto fold_chunks = chunk(train, 4);
            for (std::size_t f = 0; f < 4; ++f) {
                FoldPlan fold;
                fold.validation = fold_chunks[f];
                fold.pretrain = concat_except(fold_chunks, f);
                fold.finetune = fold.pretrain;
                ok = ok && has_uncensored(cohort, fold.finetune) &&
                     has_uncensored(cohort, fold_chunks[f]) &&
                     validation_usable(cohort, fold.validation);
                plan.folds.push_back(std::move(fold));
            }
        } else {
            std::size_t half = ids.size() / 2;
            std::vector<std::string> pre(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));
            std::vector<std::string> fin(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end());

            std::size_t n_fin =
                static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(fin.size())));
            std::size_t n_val =
                static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(fin.size())));
            n_fin = std::max<std::size_t>(n_fin, 1);
            n_val = std::max<std::size_t>(n_val, 1);
            if (n_fin + n_val >= fin.size()) {
                throw std::runtime_error("make_splits: degenerate cohort, finetune cohort too "
                                         "small for a 60/20/20 split");
            }
            std::vector<std::string> fin_train(fin.begin(),
                                               fin.begin() + static_cast<std::ptrdiff_t>(n_fin));
            std::vector<std::string> fin_val(
                fin.begin() + static_cast<std::ptrdiff_t>(n_fin),
                fin.begin() + static_cast<std::ptrdiff_t>(n_fin + n_val));
            plan.test.assign(fin.begin() + static_cast<std::ptrdiff_t>(n_fin + n_val), fin.end());

            auto fold_chunks = chunk(pre, 5);
            for (std::size_t f = 0; f < 5; ++f) {
                FoldPlan fold;
                fold.pretrain = concat_except(fold_chunks, f);
                fold.finetune = fin_train;
                fold.validation = fin_val;
                ok = ok && has_uncensored(cohort, fold_chunks[f]);
                plan.folds.push_back(std::move(fold));
            }
            ok = ok && has_uncensored(cohort, fin_train) && validation_usable(cohort, fin_val);
        }

        if (ok) {
            plan.check_roles();
            return plan;
        }
    }
    throw std::runtime_error("make_splits: degenerate cohort, could not satisfy the uncensored "
                             "constraint after " + std::to_string(kMaxShuffles) + " shuffles");
}

SplitPlan subsample_finetune(const SplitPlan& plan, const Cohort& cohort, double fraction,
                             std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("subsample_finetune: fraction " + std::to_string(fraction) +
                                    " outside (0,1]");
    }
    if (fraction == 1.0) return plan;

    SplitPlan out = plan;
    SplitRng rng = SplitRng(seed).derive("subsample");
    for (std::size_t f = 0; f < out.folds.size(); ++f) {
        const std::vector<std::string>& full = plan.folds[f].finetune;
        std::size_t target =
            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(full.size())));
        if (target == 0) {
            throw std::runtime_error("subsample_finetune: fraction " + std::to_string(fraction) +
                                     " leaves no finetune patient");
        }
        std::vector<std::string> uncensored;
        for (const std::string& id : full) {
            if (cohort.patient(id).survival.event == 1) uncensored.push_back(id);
        }
        if (uncensored.empty()) {
            throw std::runtime_error("subsample_finetune: no uncensored patient available in "
                                     "fold " + std::to_string(f));
        }

        SplitRng frng = rng.derive(f);
        std::vector<std::string> subset;
        bool ok = false;
        for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
            subset = full;
            frng.shuffle(subset);
            subset.resize(target);
            ok = has_uncensored(cohort, subset);
        }
        if (!ok) {
            // Force one uncensored patient in, replacing the subset's head.
            subset[0] = uncensored[static_cast<std::size_t>(
                frng.uniform_index(uncensored.size()))];
        }
        out.folds[f].finetune = std::move(subset);
    }
    out.check_roles();
    return out;
}

}  // namespace pathomics

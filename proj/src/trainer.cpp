#include "pathomics/trainer.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace pathomics {

namespace {

void guard_roles(std::span<const std::string> train_ids, std::span<const std::string> forbidden,
                 const char* stage) {
    std::set<std::string> test_ids(forbidden.begin(), forbidden.end());
    for (const std::string& id : train_ids) {
        if (test_ids.count(id)) {
            throw std::runtime_error(std::string(stage) + ": patient '" + id +
                                     "' is in the test subset; refusing to train on it");
        }
    }
}

struct Optimizer {
    std::vector<NamedParam> params;
    std::vector<Tensor*> ptrs;
    AdamState state;

    Optimizer(PathOmicsModel& model, ParamSet set, double lr) : params(model.named_params(set)) {
        state.lr = lr;
        ptrs.reserve(params.size());
        for (NamedParam& p : params) ptrs.push_back(p.tensor);
    }

    void step(Graph& g) {
        std::vector<Tensor> grads;
        grads.reserve(params.size());
        std::vector<const Tensor*> grad_ptrs;
        grad_ptrs.reserve(params.size());
        for (const NamedParam& p : params) grads.push_back(g.grad_for(*p.tensor));
        for (const Tensor& t : grads) grad_ptrs.push_back(&t);
        adam_step(ptrs, grad_ptrs, state);
    }
};

ParamSet finetune_set(Modality mode) {
    switch (mode) {
        case Modality::multimodal: return ParamSet::finetune_multimodal;
        case Modality::image: return ParamSet::finetune_image;
        case Modality::genomics: return ParamSet::finetune_genomics;
    }
    return ParamSet::finetune_multimodal;
}

}  // namespace

PretrainResult pretrain_fold(PathOmicsModel& model, const Cohort& cohort,
                             std::span<const std::string> ids,
                             std::span<const std::string> forbidden, const RunConfig& cfg,
                             SplitRng rng) {
    guard_roles(ids, forbidden, "pretrain");
    if (ids.empty()) throw std::invalid_argument("pretrain: empty training set");

    Optimizer opt(model, ParamSet::pretrain, cfg.pretrain_lr);
    PretrainResult result;
    std::vector<std::string> order(ids.begin(), ids.end());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.derive("order", epoch).shuffle(order);
        double loss_sum = 0.0;
        std::size_t step = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size, ++step) {
            std::size_t end = std::min(pos + cfg.batch_size, order.size());
            Graph g;
            SplitRng drop = rng.derive("dropout", epoch).derive(step);
            SplitRng part = rng.derive("partition", epoch).derive(step);
            ForwardOptions fwd{true, model.cfg.dropout, &drop, &part};
            std::vector<Var> imgs, gens;
            for (std::size_t i = pos; i < end; ++i) {
                const PatientRecord& p = cohort.patient(order[i]);
                imgs.push_back(model.embed_image(g, p.patches, fwd));
                gens.push_back(model.embed_genomics(g, p.genomics, fwd));
            }
            Var img_batch = imgs.size() == 1 ? imgs[0] : concat(imgs, 0);
            Var gen_batch = gens.size() == 1 ? gens[0] : concat(gens, 0);
            Var loss = cfg.fusion == FusionKind::mse
                           ? fusion_loss(g, img_batch, gen_batch)
                           : cosine_fusion_loss(g, img_batch, gen_batch);
            g.backward(loss);
            opt.step(g);
            loss_sum += g.value(loss).data[0] * static_cast<double>(end - pos);
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

FinetuneResult finetune_fold(PathOmicsModel& model, const Cohort& cohort, const FoldPlan& fold,
                             std::span<const std::string> forbidden, const RunConfig& cfg,
                             Modality mode, SplitRng rng) {
    guard_roles(fold.finetune, forbidden, "finetune");
    if (fold.finetune.empty()) throw std::invalid_argument("finetune: empty training set");

    std::vector<SurvivalRecord> train_records = cohort.survival_of(fold.finetune);
    FinetuneResult result;
    result.edges = fit_bin_edges(train_records);
    std::vector<int> bins, censored;
    for (const SurvivalRecord& r : train_records) {
        bins.push_back(assign_bin(r.os_months, result.edges));
        censored.push_back(1 - r.event);
    }

    Optimizer opt(model, finetune_set(mode), cfg.finetune_lr);
    std::vector<SurvivalRecord> val_records = cohort.survival_of(fold.validation);

    std::vector<std::size_t> order(fold.finetune.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<Tensor> best_values;
    result.best_val_cindex = -1.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.derive("order", epoch).shuffle(order);
        double loss_sum = 0.0;
        std::size_t step = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size, ++step) {
            std::size_t end = std::min(pos + cfg.batch_size, order.size());
            Graph g;
            SplitRng drop = rng.derive("dropout", epoch).derive(step);
            SplitRng part = rng.derive("partition", epoch).derive(step);
            ForwardOptions fwd{true, model.cfg.dropout, &drop, &part};
            std::vector<HazardCurves> curves;
            std::vector<int> chunk_bins, chunk_cens;
            for (std::size_t i = pos; i < end; ++i) {
                std::size_t idx = order[i];
                const PatientRecord& p = cohort.patient(fold.finetune[idx]);
                curves.push_back(hazard_curves(g, model.patient_logits(g, p, mode, fwd)));
                chunk_bins.push_back(bins[idx]);
                chunk_cens.push_back(censored[idx]);
            }
            Var loss = batch_survival_loss(curves, chunk_bins, chunk_cens);
            g.backward(loss);
            opt.step(g);
            loss_sum += g.value(loss).data[0] * static_cast<double>(end - pos);
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(order.size()));

        double val = c_index(
            compute_risks(model, cohort, fold.validation, mode, rng.derive("eval")), val_records);
        result.epoch_val_cindex.push_back(val);
        if (val > result.best_val_cindex) {
            result.best_val_cindex = val;
            result.best_epoch = epoch;
            best_values.clear();
            for (const NamedParam& p : opt.params) best_values.push_back(*p.tensor);
        }
    }

    for (std::size_t i = 0; i < opt.params.size(); ++i) *opt.params[i].tensor = best_values[i];
    return result;
}

std::vector<double> compute_risks(PathOmicsModel& model, const Cohort& cohort,
                                  std::span<const std::string> ids, Modality mode,
                                  SplitRng eval_rng) {
    std::vector<double> risks;
    risks.reserve(ids.size());
    for (const std::string& id : ids) {
        Graph g;
        SplitRng part = eval_rng.derive(id);
        ForwardOptions fwd{false, 0.0, nullptr, &part};
        HazardCurves curves =
            hazard_curves(g, model.patient_logits(g, cohort.patient(id), mode, fwd));
        risks.push_back(g.value(curves.risk).data[0]);
    }
    return risks;
}

double evaluate_cindex(PathOmicsModel& model, const Cohort& cohort,
                       std::span<const std::string> ids, Modality mode, SplitRng eval_rng) {
    return c_index(compute_risks(model, cohort, ids, mode, eval_rng), cohort.survival_of(ids));
}

double fusion_loss_value(PathOmicsModel& model, const Cohort& cohort,
                         std::span<const std::string> ids, FusionKind kind, SplitRng eval_rng) {
    if (ids.empty()) throw std::invalid_argument("fusion_loss_value: empty id list");
    double sum = 0.0;
    for (const std::string& id : ids) {
        Graph g;
        SplitRng part = eval_rng.derive(id);
        ForwardOptions fwd{false, 0.0, nullptr, &part};
        const PatientRecord& p = cohort.patient(id);
        Var img = model.embed_image(g, p.patches, fwd);
        Var gen = model.embed_genomics(g, p.genomics, fwd);
        Var loss = kind == FusionKind::mse ? fusion_loss(g, img, gen)
                                           : cosine_fusion_loss(g, img, gen);
        sum += g.value(loss).data[0];
    }
    return sum / static_cast<double>(ids.size());
}

Tensor embeddings_matrix(PathOmicsModel& model, const Cohort& cohort,
                         std::span<const std::string> ids, Modality mode, SplitRng eval_rng) {
    if (mode == Modality::multimodal) {
        throw std::invalid_argument("embeddings_matrix: pick one modality stream");
    }
    Tensor out = Tensor::zeros({ids.size(), model.cfg.embed_dim});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Graph g;
        SplitRng part = eval_rng.derive(ids[i]);
        ForwardOptions fwd{false, 0.0, nullptr, &part};
        const PatientRecord& p = cohort.patient(ids[i]);
        Var emb = mode == Modality::image ? model.embed_image(g, p.patches, fwd)
                                          : model.embed_genomics(g, p.genomics, fwd);
        const Tensor& v = g.value(emb);
        for (std::size_t j = 0; j < model.cfg.embed_dim; ++j) out.at(i, j) = v.data[j];
    }
    return out;
}

}  // namespace pathomics

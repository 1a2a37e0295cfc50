#include "pathomics/config.hpp"

#include <stdexcept>

namespace pathomics {

using nlohmann::json;

std::string to_string(FusionKind k) { return k == FusionKind::mse ? "mse" : "cosine"; }

FusionKind fusion_from_string(const std::string& s) {
    if (s == "mse") return FusionKind::mse;
    if (s == "cosine") return FusionKind::cosine;
    throw std::invalid_argument("unknown fusion loss '" + s + "' (mse|cosine)");
}

json synth_config_to_json(const SynthConfig& cfg) {
    return json{{"n_patients", cfg.n_patients},
                {"k_min", cfg.k_min},
                {"k_max", cfg.k_max},
                {"n_groups", cfg.n_groups},
                {"group_dims", cfg.group_dims},
                {"coupling", cfg.coupling},
                {"noise_scale", cfg.noise_scale},
                {"censoring_rate", cfg.censoring_rate},
                {"base_hazards", cfg.base_hazards},
                {"risk_slope", cfg.risk_slope},
                {"seed", cfg.seed},
                {"latent_dim", cfg.latent_dim}};
}

SynthConfig synth_config_from_json(const json& j) {
    SynthConfig cfg;
    cfg.n_patients = j.value("n_patients", cfg.n_patients);
    cfg.k_min = j.value("k_min", cfg.k_min);
    cfg.k_max = j.value("k_max", cfg.k_max);
    cfg.n_groups = j.value("n_groups", cfg.n_groups);
    cfg.group_dims = j.value("group_dims", cfg.group_dims);
    cfg.coupling = j.value("coupling", cfg.coupling);
    cfg.noise_scale = j.value("noise_scale", cfg.noise_scale);
    cfg.censoring_rate = j.value("censoring_rate", cfg.censoring_rate);
    if (j.contains("base_hazards")) {
        auto h = j.at("base_hazards").get<std::vector<double>>();
        if (h.size() != cfg.base_hazards.size()) {
            throw std::invalid_argument("synth config: base_hazards needs " +
                                        std::to_string(cfg.base_hazards.size()) + " values");
        }
        std::copy(h.begin(), h.end(), cfg.base_hazards.begin());
    }
    cfg.risk_slope = j.value("risk_slope", cfg.risk_slope);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
    return cfg;
}

json model_config_to_json(const ModelConfig& cfg) {
    return json{{"n_groups", cfg.n_groups},      {"genomics_dims", cfg.genomics_dims},
                {"embed_dim", cfg.embed_dim},    {"abr_hidden", cfg.abr_hidden},
                {"heads", cfg.heads},            {"ff_hidden", cfg.ff_hidden},
                {"pool_hidden", cfg.pool_hidden}, {"dropout", cfg.dropout}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.n_groups = j.value("n_groups", cfg.n_groups);
    cfg.genomics_dims = j.value("genomics_dims", cfg.genomics_dims);
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.abr_hidden = j.value("abr_hidden", cfg.abr_hidden);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.ff_hidden = j.value("ff_hidden", cfg.ff_hidden);
    cfg.pool_hidden = j.value("pool_hidden", cfg.pool_hidden);
    cfg.dropout = j.value("dropout", cfg.dropout);
    return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
    json j{{"seed", cfg.seed},
           {"epochs", cfg.epochs},
           {"batch_size", cfg.batch_size},
           {"pretrain_lr", cfg.pretrain_lr},
           {"finetune_lr", cfg.finetune_lr},
           {"modality", to_string(cfg.modality)},
           {"fraction", cfg.finetune_fraction},
           {"loss", to_string(cfg.fusion)},
           {"pretrain", cfg.pretraining_enabled},
           {"scheme", to_string(cfg.scheme)},
           {"repeats", cfg.repeats},
           {"fold", cfg.fold},
           {"ablate_fractions", cfg.ablate_fractions},
           {"gradcheck_samples", cfg.gradcheck_samples},
           {"model", model_config_to_json(cfg.model)},
           {"synth", synth_config_to_json(cfg.synth)}};
    if (cfg.data) {
        j["data"] = json{{"manifest", cfg.data->manifest.string()},
                         {"features", cfg.data->features.string()},
                         {"genomics", cfg.data->genomics.string()},
                         {"groups", cfg.data->groups.string()}};
    } else {
        j["data"] = nullptr;
    }
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.pretrain_lr = j.value("pretrain_lr", cfg.pretrain_lr);
    cfg.finetune_lr = j.value("finetune_lr", cfg.finetune_lr);
    if (j.contains("modality")) cfg.modality = modality_from_string(j.at("modality"));
    cfg.finetune_fraction = j.value("fraction", cfg.finetune_fraction);
    if (j.contains("loss")) cfg.fusion = fusion_from_string(j.at("loss"));
    cfg.pretraining_enabled = j.value("pretrain", cfg.pretraining_enabled);
    if (j.contains("scheme")) cfg.scheme = scheme_from_string(j.at("scheme"));
    cfg.repeats = j.value("repeats", cfg.repeats);
    cfg.fold = j.value("fold", cfg.fold);
    cfg.ablate_fractions = j.value("ablate_fractions", cfg.ablate_fractions);
    cfg.gradcheck_samples = j.value("gradcheck_samples", cfg.gradcheck_samples);
    if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"));
    if (j.contains("synth")) cfg.synth = synth_config_from_json(j.at("synth"));
    if (j.contains("data") && !j.at("data").is_null()) {
        const json& d = j.at("data");
        cfg.data = DataPaths{d.at("manifest").get<std::string>(),
                             d.at("features").get<std::string>(),
                             d.at("genomics").get<std::string>(),
                             d.at("groups").get<std::string>()};
    }
    if (cfg.batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
    if (cfg.epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
    if (cfg.repeats == 0) throw std::invalid_argument("config: repeats must be >= 1");
    if (!(cfg.finetune_fraction > 0.0 && cfg.finetune_fraction <= 1.0)) {
        throw std::invalid_argument("config: fraction outside (0,1]");
    }
    return cfg;
}

Cohort cohort_from_config(const RunConfig& cfg) {
    if (cfg.data) {
        return load_cohort(cfg.data->manifest, cfg.data->features, cfg.data->genomics,
                           cfg.data->groups);
    }
    return generate_synthetic_cohort(cfg.synth);
}

ModelConfig resolve_model_config(const RunConfig& cfg, const Cohort& cohort) {
    ModelConfig m = cfg.model;
    m.n_groups = cohort.groups.size();
    m.genomics_dims.clear();
    for (const GroupSpec& g : cohort.groups) m.genomics_dims.push_back(g.dim);
    return m;
}

}  // namespace pathomics

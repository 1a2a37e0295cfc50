#pragma once

#include <optional>

#include <json.hpp>

#include "pathomics/model.hpp"
#include "pathomics/splits.hpp"
#include "pathomics/synthetic.hpp"

namespace pathomics {

enum class FusionKind { mse, cosine };

std::string to_string(FusionKind k);
FusionKind fusion_from_string(const std::string& s);

struct DataPaths {
    std::filesystem::path manifest;
    std::filesystem::path features;
    std::filesystem::path genomics;
    std::filesystem::path groups;
};

struct RunConfig {
    std::uint64_t seed = 7;
    std::size_t epochs = 25;
    std::size_t batch_size = 1;
    double pretrain_lr = 1e-4;
    double finetune_lr = 5e-5;
    Modality modality = Modality::multimodal;
    bool modality_set = false;  // true when given explicitly on the command line
    double finetune_fraction = 1.0;
    FusionKind fusion = FusionKind::mse;
    bool pretraining_enabled = true;
    Scheme scheme = Scheme::internal;
    std::size_t repeats = 3;
    std::size_t fold = 0;
    std::vector<double> ablate_fractions = {1.0, 0.5, 0.25};
    std::size_t gradcheck_samples = 6;
    bool gradcheck_force_dropout = false;
    ModelConfig model;
    std::optional<DataPaths> data;  // absent: generate the synthetic cohort
    SynthConfig synth;
};

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

// Loads the cohort named by the config (files or synthetic).
Cohort cohort_from_config(const RunConfig& cfg);
// Fills n_groups/genomics_dims from the cohort's group table.
ModelConfig resolve_model_config(const RunConfig& cfg, const Cohort& cohort);

}  // namespace pathomics

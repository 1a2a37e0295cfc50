#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathomics/cohort.hpp"
#include "pathomics/embedders.hpp"
#include "pathomics/encoder.hpp"
#include "pathomics/objectives.hpp"

namespace pathomics {

enum class Modality { multimodal, image, genomics };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct ModelConfig {
    std::size_t n_groups = 8;
    std::vector<std::size_t> genomics_dims;  // one entry per group
    std::size_t embed_dim = 256;
    std::size_t abr_hidden = 128;
    std::size_t heads = 4;
    std::size_t ff_hidden = 512;
    std::size_t pool_hidden = 128;
    double dropout = 0.25;
};

// Which parameters a training stage updates.
enum class ParamSet {
    all,
    pretrain,            // both modality paths, no risk heads
    finetune_multimodal, // both paths + multimodal head
    finetune_image,      // image path + image head
    finetune_genomics,   // genomics path + genomics head
};

struct ForwardOptions {
    bool training = false;
    double dropout_rate = 0.0;
    SplitRng* dropout_rng = nullptr;
    // Required for any image forward; drives the random patch partition.
    SplitRng* partition_rng = nullptr;
};

// The full two-stream model. All three risk heads exist from construction so
// checkpoints always carry a complete named tensor set.
struct PathOmicsModel {
    ModelConfig cfg;
    std::vector<SnnGroupEmbedder> genomics_embedders;
    ImageGroupEmbedder image_embedder;
    ModalityStream image_stream;
    ModalityStream genomics_stream;
    RiskHead head_multimodal;
    RiskHead head_image;
    RiskHead head_genomics;

    static PathOmicsModel init(const ModelConfig& cfg, SplitRng rng);

    std::vector<NamedParam> named_params(ParamSet set = ParamSet::all);

    // {1, embed_dim} patient embedding per modality
    Var embed_image(Graph& g, const Tensor& patches, const ForwardOptions& opt);
    Var embed_genomics(Graph& g, const std::vector<Tensor>& genomics, const ForwardOptions& opt);

    // Risk-head logits {1, kSurvivalBins} for the requested modality mode.
    Var patient_logits(Graph& g, const PatientRecord& record, Modality mode,
                       const ForwardOptions& opt);
};

}  // namespace pathomics

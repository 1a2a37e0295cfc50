#include "pathomics/model.hpp"

#include <stdexcept>

namespace pathomics {

std::string to_string(Modality m) {
    switch (m) {
        case Modality::multimodal: return "multimodal";
        case Modality::image: return "image";
        case Modality::genomics: return "genomics";
    }
    return "multimodal";
}

Modality modality_from_string(const std::string& s) {
    if (s == "multimodal") return Modality::multimodal;
    if (s == "image") return Modality::image;
    if (s == "genomics") return Modality::genomics;
    throw std::invalid_argument("unknown modality '" + s + "' (multimodal|image|genomics)");
}

PathOmicsModel PathOmicsModel::init(const ModelConfig& cfg, SplitRng rng) {
    if (cfg.genomics_dims.size() != cfg.n_groups) {
        throw std::invalid_argument("model config: " + std::to_string(cfg.genomics_dims.size()) +
                                    " genomics dims for " + std::to_string(cfg.n_groups) +
                                    " groups");
    }
    if (cfg.heads == 0 || cfg.embed_dim % cfg.heads != 0) {
        throw std::invalid_argument("model config: head count " + std::to_string(cfg.heads) +
                                    " must divide embed dim " + std::to_string(cfg.embed_dim));
    }
    PathOmicsModel m;
    m.cfg = cfg;
    m.genomics_embedders.resize(cfg.n_groups);
    for (std::size_t n = 0; n < cfg.n_groups; ++n) {
        m.genomics_embedders[n].init(cfg.genomics_dims[n], cfg.embed_dim,
                                     rng.derive("genomics_embedder", n));
    }
    m.image_embedder.init(kPatchDim, cfg.abr_hidden, cfg.embed_dim, rng.derive("image_embedder"));
    m.image_stream.init(cfg.embed_dim, cfg.heads, cfg.ff_hidden, cfg.pool_hidden,
                        rng.derive("image_stream"));
    m.genomics_stream.init(cfg.embed_dim, cfg.heads, cfg.ff_hidden, cfg.pool_hidden,
                           rng.derive("genomics_stream"));
    m.head_multimodal.init(2 * cfg.embed_dim, rng.derive("head_multimodal"));
    m.head_image.init(cfg.embed_dim, rng.derive("head_image"));
    m.head_genomics.init(cfg.embed_dim, rng.derive("head_genomics"));
    return m;
}

std::vector<NamedParam> PathOmicsModel::named_params(ParamSet set) {
    std::vector<NamedParam> out;
    bool image_path = set != ParamSet::finetune_genomics;
    bool genomics_path = set != ParamSet::finetune_image;
    if (genomics_path) {
        for (std::size_t n = 0; n < genomics_embedders.size(); ++n) {
            genomics_embedders[n].collect("genomics.group" + std::to_string(n), out);
        }
    }
    if (image_path) image_embedder.collect("image", out);
    if (image_path) image_stream.collect("image_stream", out);
    if (genomics_path) genomics_stream.collect("genomics_stream", out);
    if (set == ParamSet::all || set == ParamSet::finetune_multimodal) {
        head_multimodal.collect("head.multimodal", out);
    }
    if (set == ParamSet::all || set == ParamSet::finetune_image) {
        head_image.collect("head.image", out);
    }
    if (set == ParamSet::all || set == ParamSet::finetune_genomics) {
        head_genomics.collect("head.genomics", out);
    }
    return out;
}

Var PathOmicsModel::embed_image(Graph& g, const Tensor& patches, const ForwardOptions& opt) {
    if (patches.rank() != 2 || patches.cols() != kPatchDim) {
        throw std::invalid_argument("embed_image: patches must be {K," +
                                    std::to_string(kPatchDim) + "}, got " +
                                    shape_str(patches.shape));
    }
    if (opt.partition_rng == nullptr) {
        throw std::invalid_argument("embed_image: a partition rng stream is required");
    }
    auto groups = partition_patches(patches.rows(), cfg.n_groups, *opt.partition_rng);
    Var all = g.leaf(patches);
    std::vector<Var> embedded;
    embedded.reserve(groups.size());
    for (const auto& idx : groups) {
        embedded.push_back(image_embedder.embed_group(g, gather_rows(all, idx)));
    }
    return image_stream.encode(g, concat(embedded, 0));
}

Var PathOmicsModel::embed_genomics(Graph& g, const std::vector<Tensor>& genomics,
                                   const ForwardOptions& opt) {
    if (genomics.size() != cfg.n_groups) {
        throw std::invalid_argument("embed_genomics: " + std::to_string(genomics.size()) +
                                    " group vectors for " + std::to_string(cfg.n_groups) +
                                    " groups");
    }
    std::vector<Var> embedded;
    embedded.reserve(genomics.size());
    for (std::size_t n = 0; n < genomics.size(); ++n) {
        if (genomics[n].data.size() != cfg.genomics_dims[n]) {
            throw std::invalid_argument("embed_genomics: group " + std::to_string(n) + " has " +
                                        std::to_string(genomics[n].data.size()) +
                                        " values, spec says " +
                                        std::to_string(cfg.genomics_dims[n]));
        }
        Var raw = reshape(g.leaf(genomics[n]), {1, cfg.genomics_dims[n]});
        embedded.push_back(genomics_embedders[n].apply(g, raw, opt.training, opt.dropout_rate,
                                                       opt.dropout_rng));
    }
    return genomics_stream.encode(g, concat(embedded, 0));
}

Var PathOmicsModel::patient_logits(Graph& g, const PatientRecord& record, Modality mode,
                                   const ForwardOptions& opt) {
    switch (mode) {
        case Modality::multimodal: {
            Var img = embed_image(g, record.patches, opt);
            Var gen = embed_genomics(g, record.genomics, opt);
            return head_multimodal.logits(g, concat({img, gen}, 1));
        }
        case Modality::image:
            return head_image.logits(g, embed_image(g, record.patches, opt));
        case Modality::genomics:
            return head_genomics.logits(g, embed_genomics(g, record.genomics, opt));
    }
    throw std::logic_error("patient_logits: bad modality");
}

}  // namespace pathomics

#include "pathomics/embedders.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace pathomics {

std::vector<std::vector<std::size_t>> partition_patches(std::size_t patch_count,
                                                        std::size_t n_groups, SplitRng& rng) {
    if (n_groups == 0) throw std::invalid_argument("partition_patches: zero groups");
    if (patch_count < n_groups) {
        throw std::invalid_argument("partition_patches: " + std::to_string(patch_count) +
                                    " patches cannot fill " + std::to_string(n_groups) +
                                    " groups");
    }
    std::vector<std::size_t> order(patch_count);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    // Round-robin deal keeps sizes within one of each other.
    std::vector<std::vector<std::size_t>> groups(n_groups);
    for (std::size_t i = 0; i < order.size(); ++i) groups[i % n_groups].push_back(order[i]);
    return groups;
}

void SnnGroupEmbedder::init(std::size_t in_dim, std::size_t embed_dim, SplitRng rng) {
    fc1.init(in_dim, embed_dim, rng.derive("fc1"));
    fc2.init(embed_dim, embed_dim, rng.derive("fc2"));
}

Var SnnGroupEmbedder::apply(Graph& g, Var x, bool training, double dropout_rate,
                            SplitRng* dropout_rng) {
    Var h = selu(fc1.apply(g, x));
    if (training && dropout_rate > 0.0) {
        if (dropout_rng == nullptr) {
            throw std::invalid_argument("snn embedder: training pass needs a dropout stream");
        }
        h = alpha_dropout(h, dropout_rate, true, *dropout_rng);
    }
    return selu(fc2.apply(g, h));
}

void SnnGroupEmbedder::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    fc1.collect(prefix + ".fc1", out);
    fc2.collect(prefix + ".fc2", out);
}

void ImageGroupEmbedder::init(std::size_t patch_dim, std::size_t abr_hidden,
                              std::size_t embed_dim, SplitRng rng) {
    abr.init(patch_dim, abr_hidden, rng.derive("abr"));
    projection.init(patch_dim, embed_dim, rng.derive("projection"));
}

Var ImageGroupEmbedder::pool_group(Graph& g, Var group) { return abr.pool(g, group); }

Var ImageGroupEmbedder::embed_group(Graph& g, Var group) {
    return projection.apply(g, pool_group(g, group));
}

void ImageGroupEmbedder::collect(const std::string& prefix, std::vector<NamedParam>& out) {
    abr.collect(prefix + ".abr", out);
    projection.collect(prefix + ".projection", out);
}

}  // namespace pathomics

#include "pathomics/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "pathomics/rng.hpp"

namespace pathomics {

namespace {

// Months grid for the four discrete bins; events land near the midpoints.
constexpr double kBinWidthMonths = 12.0;
constexpr double kJitterMonths = 4.8;
constexpr double kMinOsMonths = 0.25;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor gaussian_matrix(std::size_t rows, std::size_t cols, double scale, SplitRng rng) {
    Tensor t = Tensor::zeros({rows, cols});
    for (double& v : t.data) v = scale * rng.normal();
    return t;
}

std::vector<double> matvec(const Tensor& a, const std::vector<double>& x) {
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a.at(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_patients == 0) throw std::invalid_argument("synth config: n_patients must be >= 1");
    if (n_groups == 0) throw std::invalid_argument("synth config: n_groups must be >= 1");
    if (k_min < n_groups || k_max < k_min) {
        throw std::invalid_argument("synth config: need n_groups <= k_min <= k_max, got " +
                                    std::to_string(n_groups) + ", " + std::to_string(k_min) +
                                    ", " + std::to_string(k_max));
    }
    if (!group_dims.empty() && group_dims.size() != n_groups) {
        throw std::invalid_argument("synth config: group_dims size must equal n_groups");
    }
    for (std::size_t d : group_dims) {
        if (d == 0) throw std::invalid_argument("synth config: group dims must be >= 1");
    }
    if (coupling < 0.0 || coupling > 1.0) {
        throw std::invalid_argument("synth config: coupling outside [0,1]");
    }
    if (censoring_rate < 0.0 || censoring_rate >= 1.0) {
        throw std::invalid_argument("synth config: censoring rate outside [0,1)");
    }
    for (double h : base_hazards) {
        if (h <= 0.0 || h >= 1.0) {
            throw std::invalid_argument("synth config: base hazards must lie in (0,1)");
        }
    }
    if (risk_slope <= 0.0) throw std::invalid_argument("synth config: risk slope must be > 0");
    if (noise_scale < 0.0) throw std::invalid_argument("synth config: noise scale must be >= 0");
    if (latent_dim == 0) throw std::invalid_argument("synth config: latent dim must be >= 1");
}

std::vector<std::string> default_group_names(std::size_t n) {
    static const std::vector<std::string> base = {
        "transcription_factors",    "tumor_suppression",        "cytokines_growth_factors",
        "cell_differentiation_markers", "homeodomain_proteins", "translocated_cancer_genes",
        "protein_kinases",          "other"};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < base.size()) {
            names.push_back(base[i]);
        } else {
            names.push_back("group" + std::to_string(i));
        }
    }
    return names;
}

std::vector<std::size_t> default_group_dims(std::size_t n) {
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < n; ++i) dims.push_back(48 - 4 * (i % 8));
    return dims;
}

Cohort generate_synthetic_cohort(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<std::size_t> dims = cfg.group_dims.empty() ? default_group_dims(cfg.n_groups)
                                                           : cfg.group_dims;
    std::vector<std::string> names = default_group_names(cfg.n_groups);

    Cohort cohort;
    for (std::size_t n = 0; n < cfg.n_groups; ++n) {
        cohort.groups.push_back(GroupSpec{names[n], dims[n]});
    }

    SplitRng root = SplitRng(cfg.seed).derive("synth");
    double latent_scale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    Tensor a_img = gaussian_matrix(kPatchDim, cfg.latent_dim, latent_scale, root.derive("A_img"));
    std::vector<Tensor> a_gen;
    for (std::size_t n = 0; n < cfg.n_groups; ++n) {
        a_gen.push_back(
            gaussian_matrix(dims[n], cfg.latent_dim, latent_scale, root.derive("A_gen", n)));
    }

    double rho = cfg.coupling;
    for (std::size_t p = 0; p < cfg.n_patients; ++p) {
        SplitRng prng = root.derive("patient", p);
        PatientRecord record;
        record.id = "synth" + std::to_string(p);

        std::vector<double> latent(cfg.latent_dim);
        SplitRng zr = prng.derive("latent");
        for (double& v : latent) v = zr.normal();
        double z = latent[0];

        std::size_t k = cfg.k_min + static_cast<std::size_t>(prng.derive("K").uniform_index(
                                        cfg.k_max - cfg.k_min + 1));
        std::vector<double> img_signal = matvec(a_img, latent);
        record.patches = Tensor::zeros({k, kPatchDim});
        SplitRng pn = prng.derive("patch_noise");
        for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t j = 0; j < kPatchDim; ++j) {
                double v = rho * img_signal[j] + (1.0 - rho) * cfg.noise_scale * pn.normal();
                // float32 storage grid so the on-disk format round-trips bit-exactly
                record.patches.at(ki, j) = static_cast<double>(static_cast<float>(v));
            }
        }

        SplitRng gn = prng.derive("gen_noise");
        for (std::size_t n = 0; n < cfg.n_groups; ++n) {
            std::vector<double> signal = matvec(a_gen[n], latent);
            Tensor vec = Tensor::zeros({dims[n]});
            for (std::size_t j = 0; j < dims[n]; ++j) {
                vec.data[j] = rho * signal[j] + (1.0 - rho) * cfg.noise_scale * gn.normal();
            }
            record.genomics.push_back(std::move(vec));
        }

        // Sequential hazard draw. The multiplier falls with z so larger z
        // survives longer; patients outliving every bin land in the last one.
        double mult = 2.0 * logistic(-cfg.risk_slope * z);
        SplitRng hr = prng.derive("hazard");
        int bin = static_cast<int>(cfg.base_hazards.size()) - 1;
        for (std::size_t r = 0; r < cfg.base_hazards.size(); ++r) {
            double hazard = std::min(1.0 - 1e-6, cfg.base_hazards[r] * mult);
            if (hr.uniform() < hazard) {
                bin = static_cast<int>(r);
                break;
            }
        }

        double mid = (static_cast<double>(bin) + 0.5) * kBinWidthMonths;
        double os = mid + prng.derive("jitter").uniform(-kJitterMonths, kJitterMonths);
        os = std::max(os, kMinOsMonths * 2.0);
        int event = 1;
        SplitRng cr = prng.derive("censor");
        if (cr.uniform() < cfg.censoring_rate) {
            event = 0;
            os = cr.uniform(kMinOsMonths, os);
        }
        record.survival = SurvivalRecord{record.id, os, event};
        cohort.patients.push_back(std::move(record));
    }
    return cohort;
}

}  // namespace pathomics

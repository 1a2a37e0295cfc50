#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pathomics/commands.hpp"

namespace {

using pathomics::RunConfig;

RunConfig load_config(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file " + config_path);
    nlohmann::json j;
    in >> j;
    return pathomics::run_config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathology-and-genomics multimodal transformer for survival prediction"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> modality, loss, scheme;
    std::optional<double> fraction;
    std::optional<std::size_t> epochs, repeats, fold;
    bool no_pretrain = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "rng seed override");
    app.add_option("--modality", modality, "multimodal|image|genomics");
    app.add_option("--fraction", fraction, "finetune data fraction in (0,1]");
    app.add_option("--loss", loss, "fusion loss: mse|cosine");
    app.add_option("--scheme", scheme, "split scheme: internal|external");
    app.add_option("--epochs", epochs, "epochs override");
    app.add_option("--repeats", repeats, "repeat count override");
    app.add_option("--fold", fold, "fold index");
    app.add_flag("--no-pretrain", no_pretrain, "disable unsupervised pretraining");

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort on disk");
    auto* pretrain = app.add_subcommand("pretrain", "unsupervised fusion pretraining per fold");
    auto* finetune = app.add_subcommand("finetune", "survival finetuning from a checkpoint");
    auto* evaluate = app.add_subcommand("evaluate", "held-out test evaluation of a checkpoint");
    auto* ablate = app.add_subcommand("ablate", "fraction x pretrain x loss sweep");
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");

    std::string checkpoint_path;
    std::string split = "test";
    finetune->add_option("--checkpoint", checkpoint_path, "pretrain checkpoint (omit for the "
                                                          "no-pretraining ablation)");
    evaluate->add_option("--checkpoint", checkpoint_path, "finetuned checkpoint")->required();
    evaluate->add_option("--split", split, "evaluation split (test only)");

    std::size_t gradcheck_samples = 0;
    bool force_dropout = false;
    gradcheck->add_option("--samples", gradcheck_samples, "sampled entries per tensor");
    gradcheck->add_flag("--force-dropout", force_dropout, "leave dropout on (expected to fail "
                                                          "the determinism check)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.synth.seed = *seed;
        }
        if (modality) {
            cfg.modality = pathomics::modality_from_string(*modality);
            cfg.modality_set = true;
        }
        if (fraction) cfg.finetune_fraction = *fraction;
        if (loss) cfg.fusion = pathomics::fusion_from_string(*loss);
        if (scheme) cfg.scheme = pathomics::scheme_from_string(*scheme);
        if (epochs) cfg.epochs = *epochs;
        if (repeats) cfg.repeats = *repeats;
        if (fold) cfg.fold = *fold;
        if (no_pretrain) cfg.pretraining_enabled = false;
        if (gradcheck_samples > 0) cfg.gradcheck_samples = gradcheck_samples;
        if (force_dropout) cfg.gradcheck_force_dropout = true;

        if (synth->parsed()) {
            pathomics::cmd_synth(cfg, out_dir);
        } else if (pretrain->parsed()) {
            pathomics::cmd_pretrain(cfg, out_dir);
        } else if (finetune->parsed()) {
            std::optional<std::filesystem::path> ckpt;
            if (!checkpoint_path.empty()) ckpt = checkpoint_path;
            if (!ckpt && cfg.pretraining_enabled) {
                std::cout << "finetune: no checkpoint given, training from scratch "
                             "(no-pretraining ablation)\n";
            }
            pathomics::cmd_finetune(cfg, ckpt, out_dir);
        } else if (evaluate->parsed()) {
            pathomics::cmd_evaluate(cfg, checkpoint_path, split, out_dir);
        } else if (ablate->parsed()) {
            pathomics::cmd_ablate(cfg, out_dir);
        } else if (gradcheck->parsed()) {
            return pathomics::cmd_gradcheck(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

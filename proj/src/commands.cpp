#include "pathomics/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace pathomics {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kGradCheckTolerance = 1e-4;

class WallClock {
  public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void write_report(const fs::path& out_dir, const json& report) {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "report.json");
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "report.json").string());
    out << report.dump(2) << "\n";
}

json checkpoint_echo(const RunConfig& cfg, const ModelConfig& mcfg, const std::string& stage,
                     std::size_t fold) {
    return json{{"stage", stage},
                {"modality", to_string(cfg.modality)},
                {"fold", fold},
                {"model", model_config_to_json(mcfg)},
                {"run", run_config_to_json(cfg)}};
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

PathOmicsModel model_from_checkpoint(const Checkpoint& ckpt, const ModelConfig& expected) {
    json echo = json::parse(ckpt.config_json);
    ModelConfig stored = model_config_from_json(echo.at("model"));
    if (model_config_to_json(stored) != model_config_to_json(expected)) {
        throw std::runtime_error("checkpoint model config does not match the configured data: " +
                                 model_config_to_json(stored).dump() + " vs " +
                                 model_config_to_json(expected).dump());
    }
    PathOmicsModel model = PathOmicsModel::init(expected, SplitRng(0));
    restore_model(model, ckpt);
    return model;
}

}  // namespace

json cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
    WallClock clock;
    Cohort cohort = generate_synthetic_cohort(cfg.synth);
    fs::create_directories(out_dir);
    write_cohort(cohort, out_dir);
    json report{{"command", "synth"},
                {"config", synth_config_to_json(cfg.synth)},
                {"patients", cohort.patients.size()},
                {"groups", cohort.groups.size()}};
    write_report(out_dir, report);
    std::cout << "synth: wrote " << cohort.patients.size() << " patients to " << out_dir
              << " (" << clock.seconds() << " s)\n";
    return report;
}

json cmd_pretrain(const RunConfig& cfg, const fs::path& out_dir) {
    if (!cfg.pretraining_enabled) {
        throw std::invalid_argument("pretrain: refusing to run with pretraining disabled "
                                    "(--no-pretrain)");
    }
    WallClock clock;
    Cohort cohort = cohort_from_config(cfg);
    ModelConfig mcfg = resolve_model_config(cfg, cohort);
    SplitPlan plan = make_splits(cohort, cfg.scheme, cfg.seed);
    plan.check_roles();

    fs::create_directories(out_dir / "checkpoints");
    json folds = json::array();
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        PathOmicsModel model =
            PathOmicsModel::init(mcfg, SplitRng(cfg.seed).derive("model-init", f));
        PretrainResult res = pretrain_fold(model, cohort, plan.folds[f].pretrain, plan.test, cfg,
                                           SplitRng(cfg.seed).derive("pretrain", f));
        fs::path ckpt_path = out_dir / "checkpoints" / ("pretrain_fold" + std::to_string(f) +
                                                        ".ckpt");
        write_checkpoint(ckpt_path,
                         snapshot_model(model, checkpoint_echo(cfg, mcfg, "pretrain", f).dump(),
                                        cfg.seed));
        folds.push_back(json{{"fold", f},
                             {"patients", plan.folds[f].pretrain.size()},
                             {"epoch_losses", res.epoch_losses},
                             {"checkpoint", ckpt_path.string()}});
        std::cout << "pretrain fold " << f << ": loss " << res.epoch_losses.front() << " -> "
                  << res.epoch_losses.back() << "\n";
    }
    json report{{"command", "pretrain"},
                {"config", run_config_to_json(cfg)},
                {"folds", folds},
                {"test_patients", plan.test.size()}};
    write_report(out_dir, report);
    std::cout << "pretrain: " << plan.folds.size() << " folds in " << clock.seconds() << " s\n";
    return report;
}

json cmd_finetune(const RunConfig& cfg, const std::optional<fs::path>& checkpoint,
                  const fs::path& out_dir) {
    WallClock clock;
    Cohort cohort = cohort_from_config(cfg);
    ModelConfig mcfg = resolve_model_config(cfg, cohort);
    SplitPlan plan = make_splits(cohort, cfg.scheme, cfg.seed);
    if (cfg.finetune_fraction < 1.0) {
        plan = subsample_finetune(plan, cohort, cfg.finetune_fraction,
                                  SplitRng(cfg.seed).derive("subsample").state());
    }
    plan.check_roles();
    if (cfg.fold >= plan.folds.size()) {
        throw std::invalid_argument("finetune: fold " + std::to_string(cfg.fold) +
                                    " out of range, plan has " +
                                    std::to_string(plan.folds.size()));
    }

    std::optional<Checkpoint> base;
    if (checkpoint) {
        base = read_checkpoint(*checkpoint);
        json echo = json::parse(base->config_json);
        if (echo.at("stage") != "pretrain") {
            throw std::invalid_argument("finetune: checkpoint stage is '" +
                                        echo.at("stage").get<std::string>() +
                                        "', expected a pretrain checkpoint");
        }
    }

    fs::create_directories(out_dir / "checkpoints");
    json reps = json::array();
    std::vector<double> best_vals;
    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        PathOmicsModel model =
            base ? model_from_checkpoint(*base, mcfg)
                 : PathOmicsModel::init(mcfg, SplitRng(cfg.seed).derive("scratch-init", rep));
        FinetuneResult res =
            finetune_fold(model, cohort, plan.folds[cfg.fold], plan.test, cfg, cfg.modality,
                          SplitRng(cfg.seed).derive("finetune", rep));
        fs::path ckpt_path =
            out_dir / "checkpoints" / ("finetune_rep" + std::to_string(rep) + ".ckpt");
        write_checkpoint(ckpt_path,
                         snapshot_model(model,
                                        checkpoint_echo(cfg, mcfg, "finetune", cfg.fold).dump(),
                                        cfg.seed));
        best_vals.push_back(res.best_val_cindex);
        reps.push_back(json{{"repeat", rep},
                            {"epoch_losses", res.epoch_losses},
                            {"epoch_val_cindex", res.epoch_val_cindex},
                            {"best_epoch", res.best_epoch},
                            {"best_val_cindex", res.best_val_cindex},
                            {"bin_edges", res.edges.cuts},
                            {"checkpoint", ckpt_path.string()}});
        std::cout << "finetune rep " << rep << ": best val C-index " << res.best_val_cindex
                  << " at epoch " << res.best_epoch << "\n";
    }
    json report{{"command", "finetune"},
                {"config", run_config_to_json(cfg)},
                {"pretrained", checkpoint.has_value()},
                {"fold", cfg.fold},
                {"repeats", reps},
                {"val_cindex_mean", mean_of(best_vals)},
                {"val_cindex_std", std_of(best_vals)},
                {"notes", "per-fold C-indices are averaged, never risk-ensembled"}};
    write_report(out_dir, report);
    std::cout << "finetune: val C-index " << mean_of(best_vals) << " +- " << std_of(best_vals)
              << " over " << cfg.repeats << " repeat(s) in " << clock.seconds() << " s\n";
    return report;
}

json cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint, const std::string& split,
                  const fs::path& out_dir) {
    if (split != "test") {
        throw std::invalid_argument("evaluate: split-role guard refuses split '" + split +
                                    "'; the held-out test subset is the only evaluation split");
    }
    WallClock clock;
    Checkpoint ckpt = read_checkpoint(checkpoint);
    json echo = json::parse(ckpt.config_json);
    if (echo.at("stage") != "finetune") {
        throw std::invalid_argument("evaluate: checkpoint stage is '" +
                                    echo.at("stage").get<std::string>() +
                                    "', expected a finetuned checkpoint");
    }
    Modality ckpt_mode = modality_from_string(echo.at("modality"));
    if (cfg.modality_set && cfg.modality != ckpt_mode) {
        throw std::invalid_argument("evaluate: requested modality '" + to_string(cfg.modality) +
                                    "' does not match checkpoint modality '" +
                                    to_string(ckpt_mode) + "'");
    }

    Cohort cohort = cohort_from_config(cfg);
    ModelConfig mcfg = resolve_model_config(cfg, cohort);
    PathOmicsModel model = model_from_checkpoint(ckpt, mcfg);
    SplitPlan plan = make_splits(cohort, cfg.scheme, cfg.seed);

    std::vector<double> risks = compute_risks(model, cohort, plan.test, ckpt_mode,
                                              SplitRng(cfg.seed).derive("test-eval"));
    double cindex = c_index(risks, cohort.survival_of(plan.test));

    json per_patient = json::array();
    for (std::size_t i = 0; i < plan.test.size(); ++i) {
        const SurvivalRecord& r = cohort.patient(plan.test[i]).survival;
        per_patient.push_back(json{{"patient_id", plan.test[i]},
                                   {"risk", risks[i]},
                                   {"os_months", r.os_months},
                                   {"event", r.event}});
    }
    json report{{"command", "evaluate"},
                {"config", run_config_to_json(cfg)},
                {"checkpoint", checkpoint.string()},
                {"modality", to_string(ckpt_mode)},
                {"split", split},
                {"test_cindex", cindex},
                {"patients", per_patient}};
    write_report(out_dir, report);
    std::cout << "evaluate: test C-index " << cindex << " on " << plan.test.size()
              << " patients (" << clock.seconds() << " s)\n";
    return report;
}

json cmd_ablate(const RunConfig& cfg, const fs::path& out_dir) {
    WallClock clock;
    Cohort cohort = cohort_from_config(cfg);
    ModelConfig mcfg = resolve_model_config(cfg, cohort);
    SplitPlan plan = make_splits(cohort, cfg.scheme, cfg.seed);
    plan.check_roles();
    if (cfg.fold >= plan.folds.size()) {
        throw std::invalid_argument("ablate: fold out of range");
    }

    struct Cell {
        bool pretrain;
        FusionKind loss;
        const char* label;
    };
    const std::vector<Cell> cells = {{true, FusionKind::mse, "mse"},
                                     {true, FusionKind::cosine, "cosine"},
                                     {false, FusionKind::mse, "none"}};

    fs::create_directories(out_dir);
    std::ofstream sweep(out_dir / "sweep.csv");
    sweep << "loss,pretrain,fraction,repeat,val_cindex,test_cindex\n";

    json cell_reports = json::array();
    for (const Cell& cell : cells) {
        json rows = json::array();
        std::vector<std::vector<double>> test_by_fraction(cfg.ablate_fractions.size());
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
            std::optional<Checkpoint> pretrained;
            if (cell.pretrain) {
                RunConfig pcfg = cfg;
                pcfg.fusion = cell.loss;
                PathOmicsModel model =
                    PathOmicsModel::init(mcfg, SplitRng(cfg.seed).derive("model-init", rep));
                pretrain_fold(model, cohort, plan.folds[cfg.fold].pretrain, plan.test, pcfg,
                              SplitRng(cfg.seed).derive("pretrain", rep));
                pretrained = snapshot_model(model, "in-memory", cfg.seed);
            }
            for (std::size_t fi = 0; fi < cfg.ablate_fractions.size(); ++fi) {
                double fraction = cfg.ablate_fractions[fi];
                SplitPlan fplan = plan;
                if (fraction < 1.0) {
                    fplan = subsample_finetune(
                        plan, cohort, fraction, SplitRng(cfg.seed).derive("subsample", fi).state());
                }
                PathOmicsModel model =
                    PathOmicsModel::init(mcfg, SplitRng(cfg.seed).derive("scratch-init", rep));
                if (pretrained) restore_model(model, *pretrained);
                FinetuneResult res = finetune_fold(
                    model, cohort, fplan.folds[cfg.fold], fplan.test, cfg, cfg.modality,
                    SplitRng(cfg.seed).derive("finetune", rep).derive(fi));
                double test = evaluate_cindex(model, cohort, fplan.test, cfg.modality,
                                              SplitRng(cfg.seed).derive("test-eval"));
                test_by_fraction[fi].push_back(test);
                rows.push_back(json{{"loss", cell.label},
                                    {"pretrain", cell.pretrain},
                                    {"fraction", fraction},
                                    {"repeat", rep},
                                    {"val_cindex", res.best_val_cindex},
                                    {"test_cindex", test}});
                char line[160];
                std::snprintf(line, sizeof(line), "%s,%d,%.4f,%zu,%.6f,%.6f\n", cell.label,
                              cell.pretrain ? 1 : 0, fraction, rep, res.best_val_cindex, test);
                sweep << line;
                std::cout << "ablate " << cell.label << (cell.pretrain ? "+pretrain" : "")
                          << " fraction " << fraction << " rep " << rep << ": test C-index "
                          << test << "\n";
            }
        }
        json summary = json::array();
        for (std::size_t fi = 0; fi < cfg.ablate_fractions.size(); ++fi) {
            summary.push_back(json{{"fraction", cfg.ablate_fractions[fi]},
                                   {"test_cindex_mean", mean_of(test_by_fraction[fi])},
                                   {"test_cindex_std", std_of(test_by_fraction[fi])}});
        }
        cell_reports.push_back(json{{"loss", cell.label},
                                    {"pretrain", cell.pretrain},
                                    {"rows", rows},
                                    {"summary", summary}});
    }
    json report{{"command", "ablate"},
                {"config", run_config_to_json(cfg)},
                {"cells", cell_reports}};
    write_report(out_dir, report);
    std::cout << "ablate: " << cells.size() << " cells x " << cfg.ablate_fractions.size()
              << " fractions x " << cfg.repeats << " repeats in " << clock.seconds() << " s\n";
    return report;
}

int cmd_gradcheck(const RunConfig& cfg) {
    WallClock clock;
    SynthConfig tiny;
    tiny.n_patients = 3;
    tiny.n_groups = 3;
    tiny.group_dims = {5, 4, 6};
    tiny.k_min = 9;
    tiny.k_max = 12;
    tiny.coupling = 0.8;
    tiny.censoring_rate = 0.0;
    tiny.seed = cfg.seed;
    Cohort cohort = generate_synthetic_cohort(tiny);

    RunConfig rcfg = cfg;
    rcfg.synth = tiny;
    rcfg.data.reset();
    ModelConfig mcfg = resolve_model_config(rcfg, cohort);
    PathOmicsModel model = PathOmicsModel::init(mcfg, SplitRng(cfg.seed).derive("model-init"));

    // Fixed labels so the survival loss exercises every term shape.
    std::vector<int> bins = {0, 1, 3};
    std::vector<int> censored = {0, 0, 1};

    auto dropout_nonce = std::make_shared<std::uint64_t>(0);
    auto forward_all = [&, dropout_nonce](Graph& g, bool with_head) -> Var {
        SplitRng part = SplitRng(cfg.seed).derive("gradcheck-partition");
        SplitRng drop = SplitRng(cfg.seed).derive("gradcheck-dropout", (*dropout_nonce)++);
        bool training = cfg.gradcheck_force_dropout;
        ForwardOptions fwd{training, training ? model.cfg.dropout : 0.0,
                           training ? &drop : nullptr, &part};
        if (with_head) {
            std::vector<HazardCurves> curves;
            for (const PatientRecord& p : cohort.patients) {
                curves.push_back(
                    hazard_curves(g, model.patient_logits(g, p, Modality::multimodal, fwd)));
            }
            return batch_survival_loss(curves, bins, censored);
        }
        std::vector<Var> imgs, gens;
        for (const PatientRecord& p : cohort.patients) {
            imgs.push_back(model.embed_image(g, p.patches, fwd));
            gens.push_back(model.embed_genomics(g, p.genomics, fwd));
        }
        return fusion_loss(g, concat(imgs, 0), concat(gens, 0));
    };

    struct ModuleGroup {
        const char* name;
        const char* prefix;
    };
    const std::vector<ModuleGroup> modules = {{"embedders.genomics", "genomics.group"},
                                              {"embedders.image", "image."},
                                              {"encoder.image_stream", "image_stream."},
                                              {"encoder.genomics_stream", "genomics_stream."},
                                              {"objectives.risk_head", "head."}};

    std::vector<NamedParam> all = model.named_params(ParamSet::all);
    GradCheckOptions options;
    options.eps = 1e-5;
    options.samples_per_tensor = cfg.gradcheck_samples;
    options.sample_seed = cfg.seed;

    bool failed = false;
    for (const char* loss_name : {"fusion", "survival"}) {
        bool with_head = std::string(loss_name) == "survival";
        auto build = [&, with_head](Graph& g) { return forward_all(g, with_head); };
        for (const ModuleGroup& module : modules) {
            if (!with_head && std::string(module.name) == "objectives.risk_head") continue;
            std::vector<NamedParam> subset;
            for (const NamedParam& p : all) {
                if (p.name.rfind(module.prefix, 0) == 0) subset.push_back(p);
            }
            GradCheckResult res;
            try {
                res = grad_check(build, subset, options);
            } catch (const std::exception& e) {
                std::cout << "gradcheck " << loss_name << " " << module.name << ": ERROR "
                          << e.what() << "\n";
                return 2;
            }
            bool ok = res.max_rel_error < kGradCheckTolerance;
            failed = failed || !ok;
            std::printf("gradcheck %-9s %-26s max_rel_err=%.3e (worst %s) %s\n", loss_name,
                        module.name, res.max_rel_error, res.worst_param.c_str(),
                        ok ? "ok" : "FAIL");
        }
    }
    std::cout << "gradcheck: done in " << clock.seconds() << " s\n";
    return failed ? 1 : 0;
}

}  // namespace pathomics

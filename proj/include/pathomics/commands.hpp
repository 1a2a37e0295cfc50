#pragma once

#include <filesystem>
#include <optional>

#include "pathomics/trainer.hpp"

namespace pathomics {

// Command bodies shared by the CLI and the test suites. Each writes
// report.json (plus checkpoints/sweep.csv where applicable) under out_dir and
// returns the report. Reports are deterministic for a fixed config and seed;
// wall time goes to stdout only.
nlohmann::json cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir);
nlohmann::json cmd_pretrain(const RunConfig& cfg, const std::filesystem::path& out_dir);
nlohmann::json cmd_finetune(const RunConfig& cfg,
                            const std::optional<std::filesystem::path>& checkpoint,
                            const std::filesystem::path& out_dir);
nlohmann::json cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                            const std::string& split, const std::filesystem::path& out_dir);
nlohmann::json cmd_ablate(const RunConfig& cfg, const std::filesystem::path& out_dir);
// Prints one line per module per loss; nonzero when any error exceeds 1e-4.
int cmd_gradcheck(const RunConfig& cfg);

}  // namespace pathomics

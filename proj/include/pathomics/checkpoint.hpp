#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pathomics/model.hpp"

namespace pathomics {

// Single-blob checkpoint: magic, format version, config echo (JSON), rng
// state, then named parameter tensors. Named tensors keep single-stream
// loading for modality-mode changes unambiguous.
struct Checkpoint {
    std::string config_json;
    std::uint64_t rng_state = 0;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

Checkpoint snapshot_model(PathOmicsModel& model, std::string config_json,
                          std::uint64_t rng_state);
// Restores by name; a missing or shape-mismatched tensor is an error.
void restore_model(PathOmicsModel& model, const Checkpoint& ckpt);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace pathomics

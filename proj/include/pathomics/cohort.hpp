#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pathomics/survival.hpp"
#include "pathomics/tensor.hpp"

namespace pathomics {

inline constexpr std::size_t kPatchDim = 1024;

struct GroupSpec {
    std::string name;
    std::size_t dim = 0;
};

struct PatientRecord {
    std::string id;
    Tensor patches;                // {K, kPatchDim}
    std::vector<Tensor> genomics;  // one {d_g} vector per group, group order
    SurvivalRecord survival;
};

struct Cohort {
    std::vector<GroupSpec> groups;
    std::vector<PatientRecord> patients;

    const PatientRecord& patient(const std::string& id) const;
    std::vector<SurvivalRecord> survival_of(std::span<const std::string> ids) const;
};

struct LoadStats {
    std::size_t dropped = 0;  // patients missing a modality or survival ground truth
};

// Reads the four on-disk artifacts into a validated cohort. Patients missing
// a feature file, a genomics file, any genomics group, or survival ground
// truth are dropped (counted in stats); structural defects raise errors.
Cohort load_cohort(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& features_dir,
                   const std::filesystem::path& genomics_dir,
                   const std::filesystem::path& group_spec_path, LoadStats* stats = nullptr);

// Standard layout: dir/manifest.csv, dir/groups.csv, dir/features/<id>.pfm,
// dir/genomics/<id>.csv.
Cohort load_cohort_dir(const std::filesystem::path& dir, LoadStats* stats = nullptr);
void write_cohort(const Cohort& cohort, const std::filesystem::path& dir);

}  // namespace pathomics

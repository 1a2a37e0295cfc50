#pragma once

#include <array>
#include <span>
#include <string>

namespace pathomics {

struct SurvivalRecord {
    std::string patient_id;
    double os_months = 0.0;
    int event = 0;  // 1 = death observed, 0 = censored
};

// Three ascending cut points splitting overall-survival months into four
// half-open intervals. Fit only from uncensored event times.
struct BinEdges {
    std::array<double, 3> cuts;
};

// 25/50/75 percentiles (linear interpolation between order statistics) of the
// uncensored event times. Throws a degenerate-cohort error when fewer than
// four uncensored records or fewer than four distinct event times exist, or
// when the resulting cuts are not strictly ascending.
BinEdges fit_bin_edges(std::span<const SurvivalRecord> records);

// Half-open interval membership: [.., t1) -> 0, [t1, t2) -> 1, [t2, t3) -> 2,
// [t3, ..) -> 3.
int assign_bin(double os_months, const BinEdges& edges);

// Harrell concordance: comparable pairs are (i, j) with event_i = 1 and
// os_i < os_j; concordant when risk_i > risk_j, tied risks count half.
// Throws when no comparable pair exists.
double c_index(std::span<const double> risks, std::span<const SurvivalRecord> records);

// True when at least one comparable pair exists.
bool has_comparable_pair(std::span<const SurvivalRecord> records);

}  // namespace pathomics

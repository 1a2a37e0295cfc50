#include "pathomics/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

namespace pathomics {

namespace {

double percentile_linear(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BinEdges fit_bin_edges(std::span<const SurvivalRecord> records) {
    std::vector<double> times;
    for (const SurvivalRecord& r : records) {
        if (r.event == 1) times.push_back(r.os_months);
    }
    if (times.size() < 4) {
        throw std::runtime_error("fit_bin_edges: degenerate cohort, only " +
                                 std::to_string(times.size()) + " uncensored records");
    }
    std::sort(times.begin(), times.end());
    std::set<double> distinct(times.begin(), times.end());
    if (distinct.size() < 4) {
        throw std::runtime_error("fit_bin_edges: degenerate cohort, only " +
                                 std::to_string(distinct.size()) + " distinct event times");
    }
    BinEdges edges{{percentile_linear(times, 0.25), percentile_linear(times, 0.50),
                    percentile_linear(times, 0.75)}};
    if (!(edges.cuts[0] < edges.cuts[1] && edges.cuts[1] < edges.cuts[2])) {
        throw std::runtime_error("fit_bin_edges: degenerate cohort, quartiles not strictly "
                                 "ascending");
    }
    return edges;
}

int assign_bin(double os_months, const BinEdges& edges) {
    if (os_months < edges.cuts[0]) return 0;
    if (os_months < edges.cuts[1]) return 1;
    if (os_months < edges.cuts[2]) return 2;
    return 3;
}

bool has_comparable_pair(std::span<const SurvivalRecord> records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].event != 1) continue;
        for (std::size_t j = 0; j < records.size(); ++j) {
            if (records[i].os_months < records[j].os_months) return true;
        }
    }
    return false;
}

double c_index(std::span<const double> risks, std::span<const SurvivalRecord> records) {
    if (risks.size() != records.size()) {
        throw std::invalid_argument("c_index: " + std::to_string(risks.size()) + " risks vs " +
                                    std::to_string(records.size()) + " records");
    }
    // Scan in time order: only ascending-time pairs can be comparable, so for
    // each uncensored i we walk the strictly-later block once.
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return records[a].os_months < records[b].os_months;
    });
    long long comparable = 0, concordant = 0, tied = 0;
    for (std::size_t a = 0; a < order.size(); ++a) {
        std::size_t i = order[a];
        if (records[i].event != 1) continue;
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            std::size_t j = order[b];
            if (!(records[i].os_months < records[j].os_months)) continue;  // time ties drop out
            ++comparable;
            if (risks[i] > risks[j]) {
                ++concordant;
            } else if (risks[i] == risks[j]) {
                ++tied;
            }
        }
    }
    if (comparable == 0) {
        throw std::runtime_error("c_index: no comparable pair (all censored or tied times)");
    }
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           static_cast<double>(comparable);
}

}  // namespace pathomics

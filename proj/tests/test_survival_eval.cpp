#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pathomics/survival.hpp"

using namespace pathomics;

namespace {

std::vector<SurvivalRecord> make_records(const std::vector<double>& times,
                                         const std::vector<int>& events) {
    std::vector<SurvivalRecord> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.push_back({"p" + std::to_string(i), times[i], events[i]});
    }
    return out;
}

}  // namespace

TEST_CASE("bin edges: linear-interpolation quartiles of uncensored times") {
    // uncensored times 1..8 -> 25/50/75 percentiles (2.75, 4.5, 6.25)
    auto recs = make_records({1, 2, 3, 4, 5, 6, 7, 8}, {1, 1, 1, 1, 1, 1, 1, 1});
    BinEdges e = fit_bin_edges(recs);
    CHECK(e.cuts[0] == doctest::Approx(2.75).epsilon(1e-15));
    CHECK(e.cuts[1] == doctest::Approx(4.5).epsilon(1e-15));
    CHECK(e.cuts[2] == doctest::Approx(6.25).epsilon(1e-15));

    // censored records never affect the cuts
    auto with_censored = recs;
    with_censored.push_back({"c1", 0.5, 0});
    with_censored.push_back({"c2", 100.0, 0});
    BinEdges e2 = fit_bin_edges(with_censored);
    CHECK(e2.cuts == e.cuts);

    // record order does not matter
    auto shuffled = recs;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(fit_bin_edges(shuffled).cuts == e.cuts);

    // identical event times are degenerate
    auto flat = make_records({5, 5, 5, 5, 5}, {1, 1, 1, 1, 1});
    CHECK_THROWS_WITH_AS(fit_bin_edges(flat), doctest::Contains("degenerate"),
                         std::runtime_error);
    auto too_few = make_records({1, 2, 3}, {1, 1, 1});
    CHECK_THROWS_AS(fit_bin_edges(too_few), std::runtime_error);
}

TEST_CASE("bin assignment uses half-open intervals") {
    BinEdges e{{2.75, 4.5, 6.25}};
    CHECK(assign_bin(0.01, e) == 0);
    CHECK(assign_bin(2.75, e) == 1);  // boundary belongs to the upper bin
    CHECK(assign_bin(4.5, e) == 2);
    CHECK(assign_bin(6.25, e) == 3);
    CHECK(assign_bin(100.0, e) == 3);
}

TEST_CASE("c-index: perfect ordering, all ties, worked example") {
    {
        // higher risk means earlier death, every patient uncensored
        std::vector<double> risks = {5, 4, 3, 2, 1};
        auto recs = make_records({1, 2, 3, 4, 5}, {1, 1, 1, 1, 1});
        CHECK(c_index(risks, recs) == 1.0);
    }
    {
        std::vector<double> risks = {2, 2, 2, 2};
        auto recs = make_records({1, 2, 3, 4}, {1, 1, 1, 1});
        CHECK(c_index(risks, recs) == 0.5);
    }
    {
        // pairs (0,1), (0,2) concordant; (1,2) discordant
        std::vector<double> risks = {3, 1, 2};
        auto recs = make_records({1, 2, 3}, {1, 1, 0});
        CHECK(c_index(risks, recs) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
    {
        std::vector<double> risks = {1, 2};
        auto recs = make_records({3, 4}, {0, 0});  // all censored
        CHECK_THROWS_WITH_AS(c_index(risks, recs), doctest::Contains("comparable"),
                             std::runtime_error);
        CHECK_THROWS_AS(c_index(std::vector<double>{1.0}, recs), std::invalid_argument);
    }
}

TEST_CASE("c-index equals brute force on random cohorts with ties and censoring") {
    SplitRng rng(23);
    for (int it = 0; it < 300; ++it) {
        std::size_t n = 3 + rng.uniform_index(28);
        std::vector<double> risks(n);
        std::vector<double> times(n);
        std::vector<int> events(n);
        for (std::size_t i = 0; i < n; ++i) {
            risks[i] = static_cast<double>(rng.uniform_index(6));  // forced risk ties
            times[i] = static_cast<double>(1 + rng.uniform_index(8));  // forced time ties
            events[i] = rng.uniform() < 0.7 ? 1 : 0;
        }
        auto recs = make_records(times, events);
        if (!has_comparable_pair(recs)) continue;
        CHECK(c_index(risks, recs) == oracles::c_index_bruteforce(risks, recs));
    }
}

TEST_CASE("c-index is invariant under strictly increasing risk transforms") {
    SplitRng rng(29);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 5 + rng.uniform_index(20);
        std::vector<double> risks(n), times(n);
        std::vector<int> events(n);
        for (std::size_t i = 0; i < n; ++i) {
            risks[i] = rng.normal();
            times[i] = rng.uniform(1.0, 60.0);
            events[i] = rng.uniform() < 0.75 ? 1 : 0;
        }
        auto recs = make_records(times, events);
        if (!has_comparable_pair(recs)) continue;
        double base = c_index(risks, recs);

        double a = rng.uniform(0.5, 3.0), b = rng.uniform(-2.0, 2.0);
        std::vector<double> mapped(n);
        for (std::size_t i = 0; i < n; ++i) mapped[i] = std::exp(a * risks[i]) + b * 0 + a;
        CHECK(c_index(mapped, recs) == base);

        // complement under sign flip when no risk ties exist (a.s. true here)
        std::vector<double> negated(n);
        for (std::size_t i = 0; i < n; ++i) negated[i] = -risks[i];
        CHECK(c_index(negated, recs) == doctest::Approx(1.0 - base).epsilon(1e-12));
    }
}

TEST_CASE("censored patients never anchor a comparable pair") {
    // the censored patient has the earliest time; flipping its risk wildly
    // cannot change the score
    std::vector<double> times = {1.0, 2.0, 3.0, 4.0};
    std::vector<int> events = {0, 1, 1, 1};
    auto recs = make_records(times, events);
    std::vector<double> risks = {0.0, 3.0, 2.0, 1.0};
    double base = c_index(risks, recs);
    risks[0] = 1000.0;
    CHECK(c_index(risks, recs) == base);
}

#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"

using namespace mic;

TEST_CASE("compute_weights exact cases") {
    CHECK(compute_weights({1, 1, 1, 1}) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(compute_weights({4, 1}) == std::vector<double>{2.0 / 3.0, 1.0 / 3.0});
    CHECK(compute_weights({9, 16, 25}) ==
          std::vector<double>{3.0 / 12.0, 4.0 / 12.0, 5.0 / 12.0});
}

TEST_CASE("compute_weights error cases") {
    CHECK_THROWS_AS((void)compute_weights({}), error);
    CHECK_THROWS_AS((void)compute_weights({3, 0, 5}), error);
}

TEST_CASE("compute_weights matches a long-double reference within 1e-12") {
    rng g(314159);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + g.below(16);
        std::vector<std::uint64_t> counts;
        for (std::uint64_t i = 0; i < n; ++i) counts.push_back(1 + g.below(10000000));
        auto p = compute_weights(counts);

        long double total = 0.0L;
        for (auto c : counts) total += std::sqrt(static_cast<long double>(c));
        double sum = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const long double want = std::sqrt(static_cast<long double>(counts[i])) / total;
            REQUIRE(std::fabs((static_cast<long double>(p[i]) - want) / want) <= 1e-12L);
            sum += p[i];
        }
        REQUIRE(std::fabs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("budget_from_fraction") {
    CHECK(budget_from_fraction(5800000, 0.10) == 580000);
    CHECK(budget_from_fraction(10, 1.0) == 10);
    CHECK(budget_from_fraction(3, 0.1) == 1);  // minimum clamp
}

TEST_CASE("mix_plan validation") {
    auto plan = make_mix_plan({{"a", 4, false, 4}, {"b", 1, false, 4}}, 100, 7);
    CHECK(validate(plan).empty());
    plan.probabilities[0] = 0.9;  // corrupt
    CHECK(!validate(plan).empty());
}

TEST_CASE("mix_stream basics") {
    SUBCASE("budget 1 emits exactly one draw") {
        auto plan = make_mix_plan({{"a", 5, false, 4}}, 1, 7);
        mix_stream s(plan);
        CHECK(s.next().has_value());
        CHECK(!s.next().has_value());
    }
    SUBCASE("single dataset covers all records per cycle, shuffled") {
        auto plan = make_mix_plan({{"a", 10, false, 4}}, 20, 7);
        mix_stream s(plan);
        std::set<std::size_t> first, second;
        for (int i = 0; i < 10; ++i) first.insert(s.next()->record);
        for (int i = 0; i < 10; ++i) second.insert(s.next()->record);
        CHECK(first.size() == 10);
        CHECK(second.size() == 10);
    }
    SUBCASE("deterministic across constructions") {
        auto plan = make_mix_plan({{"a", 40, false, 4}, {"b", 10, false, 4}}, 500, 99);
        mix_stream s1(plan), s2(plan);
        for (int i = 0; i < 500; ++i) {
            auto a = s1.next(), b = s2.next();
            REQUIRE(a.has_value());
            REQUIRE(a->dataset == b->dataset);
            REQUIRE(a->record == b->record);
        }
    }
}

TEST_CASE("mix_stream frequencies converge to p_d") {
    SUBCASE("plan [4,1] at budget 60000") {
        auto plan = make_mix_plan({{"big", 4, false, 4}, {"small", 1, false, 4}}, 60000, 7);
        mix_stream s(plan);
        std::vector<double> counts(2, 0.0);
        while (auto d = s.next()) counts[d->dataset] += 1.0;
        const double l1 = std::fabs(counts[0] / 60000.0 - 2.0 / 3.0) +
                          std::fabs(counts[1] / 60000.0 - 1.0 / 3.0);
        CHECK(l1 < 0.01);
    }
    SUBCASE("8 datasets at budget 100000") {
        std::vector<mix_dataset> ds;
        for (int i = 0; i < 8; ++i)
            ds.push_back({"d" + std::to_string(i), static_cast<std::uint64_t>(50 + i * 30),
                          false, 4});
        auto plan = make_mix_plan(ds, 100000, 7);
        mix_stream s(plan);
        std::vector<double> counts(8, 0.0);
        while (auto d = s.next()) counts[d->dataset] += 1.0;
        double l1 = 0.0;
        for (int i = 0; i < 8; ++i)
            l1 += std::fabs(counts[i] / 100000.0 - plan.probabilities[i]);
        CHECK(l1 < 0.01);
    }
}

TEST_CASE("mix_stream cycles small datasets without starving the plan") {
    auto plan = make_mix_plan({{"tiny", 2, false, 4}, {"big", 1000, false, 4}}, 2000, 13);
    mix_stream s(plan);
    std::uint64_t tiny = 0;
    while (auto d = s.next())
        if (d->dataset == 0) ++tiny;
    // sqrt weighting: p_tiny = sqrt(2)/(sqrt(2)+sqrt(1000)) ~ 0.0428
    CHECK(tiny > 40);
    CHECK(tiny < 140);
}

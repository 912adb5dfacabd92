#include <doctest.h>

#include <map>
#include <numeric>
#include <random>

#include "rsketch/space_saving.hpp"

using namespace rsketch;

TEST_CASE("classic step-through") {
    SpaceSaving ss(2);
    const Key a = 'a', b = 'b', c = 'c';
    ss.insert(a, 1);
    ss.insert(b, 1);
    REQUIRE(ss.entries().size() == 2);
    CHECK(ss.entries()[0] == SpaceSaving::Entry{a, 1, 0});
    CHECK(ss.entries()[1] == SpaceSaving::Entry{b, 1, 0});

    ss.insert(c, 1);  // both counts are 1: the lower slot (a) is evicted
    CHECK(ss.entries()[0] == SpaceSaving::Entry{c, 2, 1});
    CHECK(ss.entries()[1] == SpaceSaving::Entry{b, 1, 0});
    CHECK(ss.query(c) == BucketEstimate{2, 1});
    CHECK_FALSE(ss.contains(a));

    ss.insert(c, 4);
    CHECK(ss.query(c) == BucketEstimate{6, 1});
}

TEST_CASE("stash_query for absent keys") {
    SpaceSaving empty(4);
    CHECK(empty.query(9) == BucketEstimate{0, 0});

    SpaceSaving partial(4);
    partial.insert(1, 7);
    CHECK(partial.query(9) == BucketEstimate{0, 0});

    SpaceSaving full(2);
    full.insert(1, 5);
    full.insert(2, 8);
    CHECK(full.query(9) == BucketEstimate{5, 5});
}

TEST_CASE("zero capacity is rejected") {
    CHECK_THROWS_AS(SpaceSaving(0), ConfigError);
}

TEST_CASE("fuzzed soundness and sum conservation") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        SpaceSaving ss(1 + rng() % 12);
        std::map<Key, Count> truth;
        Count total = 0;
        for (int i = 0; i < 400; ++i) {
            const Key k = rng() % (5 + trial % 40);
            const Count v = 1 + rng() % 5;
            ss.insert(k, v);
            truth[k] += v;
            total += v;
        }
        Count sum = 0;
        for (const auto& e : ss.entries()) {
            REQUIRE(e.count >= e.err);
            sum += e.count;
        }
        REQUIRE(sum == total);
        REQUIRE(ss.size() <= ss.capacity());
        for (const auto& [k, f] : truth) {
            const auto q = ss.query(k);
            REQUIRE(q.estimate >= f);
            REQUIRE(q.estimate - q.mpe <= f);
        }
    }
}

TEST_CASE("load_entries validates and restores lookup") {
    SpaceSaving ss(3);
    const SpaceSaving::Entry good[] = {{1, 5, 2}, {2, 3, 0}};
    ss.load_entries(good);
    CHECK(ss.query(1) == BucketEstimate{5, 2});
    CHECK(ss.min_count() == 3);

    const SpaceSaving::Entry dup[] = {{1, 5, 0}, {1, 3, 0}};
    CHECK_THROWS_AS(ss.load_entries(dup), FormatError);
    const SpaceSaving::Entry inconsistent[] = {{1, 2, 5}};
    CHECK_THROWS_AS(ss.load_entries(inconsistent), FormatError);
    const SpaceSaving::Entry too_many[] = {{1, 1, 0}, {2, 1, 0}, {3, 1, 0}, {4, 1, 0}};
    CHECK_THROWS_AS(ss.load_entries(too_many), FormatError);
}

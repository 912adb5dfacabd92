#include <doctest.h>

#include <map>
#include <random>

#include "rsketch/datasets.hpp"
#include "rsketch/mice_filter.hpp"
#include "rsketch/reliable_sketch.hpp"

using namespace rsketch;

namespace {

// A one-column filter maps every key to counters[0] and counters[1].
MiceFilter single_column(Count cap, std::uint32_t c1, std::uint32_t c2) {
    MiceFilter f(1, cap, 7);
    const std::uint32_t init[] = {c1, c2};
    f.load_counters(init);
    return f;
}

}  // namespace

TEST_CASE("filter_insert examples") {
    MiceFilter fresh(64, 15, 1);
    CHECK(fresh.insert(42, 3) == 0);
    CHECK(fresh.query(42) == BucketEstimate{3, 3});

    MiceFilter f = single_column(15, 14, 15);
    CHECK(f.insert(42, 5) == 4);
    CHECK(f.counters()[0] == 15);
    CHECK(f.counters()[1] == 15);

    MiceFilter sat = single_column(15, 15, 15);
    CHECK(sat.insert(1, 9) == 9);
    CHECK(sat.insert(2, 1) == 1);
}

TEST_CASE("conservative update raises only what is needed") {
    MiceFilter f = single_column(15, 4, 9);
    CHECK(f.insert(1, 2) == 0);
    CHECK(f.counters()[0] == 6);
    CHECK(f.counters()[1] == 9);
}

TEST_CASE("filter_query") {
    MiceFilter f(128, 15, 3);
    CHECK(f.query(1) == BucketEstimate{0, 0});
    f.insert(5, 4);
    f.insert(5, 3);
    CHECK(f.query(5) == BucketEstimate{7, 7});
}

TEST_CASE("construction checks the cap against the counter width") {
    CHECK_THROWS_AS(MiceFilter(16, 300, 1, 8), ConfigError);
    CHECK_NOTHROW(MiceFilter(16, 300, 1, 16));
    CHECK_THROWS_AS(MiceFilter(0, 10, 1), ConfigError);
    MiceFilter f(4, 10, 1);
    const std::uint32_t too_big[] = {1, 2, 3, 11, 0, 0, 0, 0};
    CHECK_THROWS_AS(f.load_counters(too_big), FormatError);
    const std::uint32_t wrong_size[] = {1, 2};
    CHECK_THROWS_AS(f.load_counters(wrong_size), FormatError);
}

TEST_CASE("absorbed value never exceeds the min counter; counters monotone and capped") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const Count cap = 1 + rng() % 40;
        MiceFilter f(1 + rng() % 16, cap, rng());
        std::map<Key, Count> absorbed;
        std::vector<std::uint32_t> prev(f.counters().begin(), f.counters().end());
        for (int i = 0; i < 300; ++i) {
            const Key k = rng() % 50;
            const Count v = 1 + rng() % 6;
            const Count fwd = f.insert(k, v);
            REQUIRE(fwd <= v);
            absorbed[k] += v - fwd;
            for (std::size_t j = 0; j < prev.size(); ++j) {
                REQUIRE(f.counters()[j] >= prev[j]);
                REQUIRE(f.counters()[j] <= cap);
            }
            prev.assign(f.counters().begin(), f.counters().end());
        }
        for (const auto& [k, a] : absorbed) {
            const auto q = f.query(k);
            REQUIRE(a <= q.estimate);
            REQUIRE(q.mpe == q.estimate);
            REQUIRE(q.estimate <= cap);
        }
    }
}

TEST_CASE("end-to-end soundness with the filter enabled") {
    for (double skew : {0.3, 1.0, 1.5}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            Trace t = gen_zipf(40000, 8000, skew, seed);
            std::mt19937_64 rng(seed);
            for (auto& r : t) r.value = 1 + rng() % 4;
            const Truth truth = exact_oracle(t);

            SketchConfig c;
            c.total_buckets = 4000;
            c.lambda_cap = 40;
            c.seed = seed;
            c.mice_filter_fraction = 0.2;
            ReliableSketch s(c);
            for (const auto& r : t) s.insert(r.key, r.value);
            if (s.overflowed()) continue;

            Count lambda_sum = 0;
            for (Count th : s.layout().thresholds) lambda_sum += th;
            for (const auto& [k, f] : truth) {
                const auto iv = s.query(k);
                REQUIRE(iv.lower <= f);
                REQUIRE(iv.upper >= f);
                if (!iv.stash_consulted) REQUIRE(iv.mpe <= lambda_sum);
            }
        }
    }
}

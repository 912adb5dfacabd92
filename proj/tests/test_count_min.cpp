#include <doctest.h>

#include "rsketch/count_min.hpp"
#include "rsketch/datasets.hpp"

using namespace rsketch;

TEST_CASE("fresh and single-key queries") {
    CounterMatrix cm(3, 100, 1);
    CHECK(cm.query(5) == 0);
    for (int i = 0; i < 17; ++i) cm.insert_cm(5);
    CHECK(cm.query(5) == 17);

    CounterMatrix cu(3, 100, 1, CounterMatrix::Update::conservative);
    for (int i = 0; i < 17; ++i) cu.insert(5);
    CHECK(cu.query(5) == 17);
}

TEST_CASE("one-sided error and CU <= CM with shared layout") {
    for (double skew : {0.3, 1.0, 1.5}) {
        for (unsigned rows : {CounterMatrix::kFastRows, CounterMatrix::kAccurateRows}) {
            Trace t = gen_zipf(30000, 5000, skew, rows);
            for (std::size_t i = 0; i < t.size(); i += 3) t[i].value = 1 + i % 5;
            const Truth truth = exact_oracle(t);
            CounterMatrix cm(rows, 400, 17);
            CounterMatrix cu(rows, 400, 17, CounterMatrix::Update::conservative);
            for (const auto& r : t) {
                cm.insert(r.key, r.value);
                cu.insert(r.key, r.value);
            }
            std::size_t under_cm = 0, under_cu = 0, cu_above_cm = 0;
            for (const auto& [k, f] : truth) {
                under_cm += cm.query(k) < f;
                under_cu += cu.query(k) < f;
                cu_above_cm += cu.query(k) > cm.query(k);
            }
            CHECK(under_cm == 0);
            CHECK(under_cu == 0);
            CHECK(cu_above_cm == 0);
            for (std::size_t j = 0; j < cm.counters().size(); ++j) REQUIRE(cu.counters()[j] <= cm.counters()[j]);
        }
    }
}

TEST_CASE("with_memory sizing") {
    const auto m = CounterMatrix::with_memory(3, 1200, 0, CounterMatrix::Update::count_min);
    CHECK(m.width() == 100);
    CHECK_THROWS_AS(CounterMatrix::with_memory(16, 32, 0, CounterMatrix::Update::count_min), ConfigError);
}

TEST_CASE("CMS1 snapshot round trip and errors") {
    CounterMatrix cu(3, 50, 9, CounterMatrix::Update::conservative);
    for (Key k = 0; k < 500; ++k) cu.insert(k % 71, 1 + k % 4);
    const auto bytes = cu.snapshot();
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CMS1");
    const CounterMatrix back = CounterMatrix::restore(bytes);
    CHECK(back == cu);
    for (Key k = 0; k < 100; ++k) CHECK(back.query(k) == cu.query(k));

    auto bad = bytes;
    bad[0] = 'R';
    CHECK_THROWS_AS(CounterMatrix::restore(bad), FormatError);
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 1);
    CHECK_THROWS_AS(CounterMatrix::restore(truncated), FormatError);
}

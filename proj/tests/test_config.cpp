#include <doctest.h>

#include <numeric>

#include "rsketch/config.hpp"

using namespace rsketch;

TEST_CASE("layer_width evaluates ceil(W (R_w - 1) / R_w^i)") {
    CHECK(layer_width(1000, 2.0, 1) == 500);
    CHECK(layer_width(1000, 2.0, 2) == 250);
    CHECK(layer_width(1000, 2.0, 3) == 125);
    CHECK(layer_width(1000, 10.0, 1) == 900);
    CHECK(layer_width(1000, 10.0, 2) == 90);
    for (double r : {1.5, 2.0, 2.5, 10.0}) CHECK(layer_width(1, r, 1) >= 1);
    CHECK(layer_width(1000, 2.0, 4) == 63);  // 62.5 rounds up
}

TEST_CASE("layer_threshold evaluates floor(Lambda (R_l - 1) / R_l^i)") {
    CHECK(layer_threshold(25, 2.5, 1) == 15);
    CHECK(layer_threshold(25, 2.5, 2) == 6);
    CHECK(layer_threshold(25, 2.5, 3) == 2);
    CHECK(layer_threshold(25, 2.5, 4) == 0);

    CHECK(layer_threshold(25, 2.0, 1) == 12);
    CHECK(layer_threshold(25, 2.0, 2) == 6);
    CHECK(layer_threshold(25, 2.0, 3) == 3);
    CHECK(layer_threshold(25, 2.0, 4) == 1);
    CHECK(layer_threshold(25, 2.0, 5) == 0);

    for (unsigned i = 1; i <= 7; ++i) CHECK(layer_threshold(0, 2.5, i) == 0);
}

TEST_CASE("threshold sum never exceeds lambda") {
    for (Count lambda = 1; lambda <= 500; ++lambda) {
        for (double r : {1.5, 2.0, 2.5, 4.0, 10.0}) {
            Count sum = 0;
            for (unsigned i = 1; i <= 20; ++i) sum += layer_threshold(lambda, r, i);
            REQUIRE(sum <= lambda);
        }
    }
}

TEST_CASE("derive_lambda and derive_W") {
    CHECK(derive_lambda(100000, 1000000, 2.0, 2.5) == 167);
    CHECK(derive_lambda(5000, 5000, 2.0, 2.5) == 17);
    CHECK(derive_lambda(100000000, 1000, 2.0, 2.5) == 1);

    CHECK(derive_W(25, 1000000, 2.0, 2.5) == 666667);
    CHECK(derive_W(1000, 1000, 2.0, 2.5) == 17);
    const auto w1 = derive_W(40, 1000000, 2.0, 2.5);
    const auto w2 = derive_W(80, 1000000, 2.0, 2.5);
    CHECK(w2 * 2 >= w1 - 1);
    CHECK(w2 * 2 <= w1 + 1);

    // 4 * 5^6 / 1.5 * 10^6 / 25
    CHECK(derive_W_proof(25, 1000000, 2.0, 2.5) == 1666666667ULL);
    // 6 * 8 * 39.0625 * ln(100)
    CHECK(stash_capacity_for(2.0, 2.5, 0.01) == 8635);
}

TEST_CASE("resolve_layout trims zero-threshold layers") {
    SketchConfig c;
    c.total_buckets = 1000;
    c.lambda_cap = 25;
    c.mice_filter_fraction = 0.0;
    const Layout l = resolve_layout(c);
    CHECK(l.effective_depth == 3);
    REQUIRE(l.bucket_layers.size() == 3);
    CHECK(l.bucket_layers[0].width == 500);
    CHECK(l.bucket_layers[0].threshold == 15);
    CHECK(l.bucket_layers[1].width == 250);
    CHECK(l.bucket_layers[1].threshold == 6);
    CHECK(l.bucket_layers[2].width == 125);
    CHECK(l.bucket_layers[2].threshold == 2);
    CHECK(l.filter_width == 0);

    for (std::size_t i = 1; i < l.bucket_layers.size(); ++i) {
        CHECK(l.bucket_layers[i].width <= l.bucket_layers[i - 1].width);
        CHECK(l.bucket_layers[i].threshold <= l.bucket_layers[i - 1].threshold);
    }
}

TEST_CASE("resolve_layout with the mice filter standing in for layer 1") {
    SketchConfig c;
    c.total_buckets = 1000;
    c.lambda_cap = 25;
    c.mice_filter_fraction = 0.2;
    const Layout l = resolve_layout(c);
    CHECK(l.filter_cap == 15);
    // filter bytes = 0.25 * 1000 buckets * 10 bytes = 2500, two rows of 8-bit counters
    CHECK(l.filter_width == 1250);
    REQUIRE(l.bucket_layers.size() == 2);
    CHECK(l.bucket_layers[0].threshold == 6);
    CHECK(l.bucket_layers[0].width == 500);
    CHECK(l.bucket_layers[1].threshold == 2);
    CHECK(l.bucket_layers[1].width == 250);
}

TEST_CASE("resolve_layout from a memory budget") {
    SketchConfig c;
    c.memory_bytes = 100000;
    c.lambda_cap = 25;
    c.mice_filter_fraction = 0.2;
    c.stash_capacity = 64;
    const Layout l = resolve_layout(c);
    // 20000 filter bytes, 64 * 12 stash bytes, rest in 10-byte buckets
    CHECK(l.filter_width == 10000);
    CHECK(l.total_buckets == (100000 - 20000 - 768) / 10);

    c.lambda_cap.reset();
    c.n_hint = 100000;
    CHECK(resolve_layout(c).lambda_cap == derive_lambda(l.total_buckets, 100000, 2.0, 2.5));
}

TEST_CASE("resolve_layout rejects bad configurations") {
    SketchConfig base;
    base.total_buckets = 1000;
    base.lambda_cap = 25;

    auto rejects = [](SketchConfig c) { CHECK_THROWS_AS(resolve_layout(c), ConfigError); };

    SketchConfig c = base;
    c.lambda_cap = 0;
    rejects(c);
    c = base;
    c.lambda_cap = 1;  // floor(1 * 1.5 / 2.5) = 0
    rejects(c);
    c = base;
    c.memory_bytes = 10000;  // both sizings given
    rejects(c);
    c = base;
    c.total_buckets.reset();
    rejects(c);
    c = base;
    c.r_w = 1.0;
    rejects(c);
    c = base;
    c.r_lambda = 0.5;
    rejects(c);
    c = base;
    c.lambda_cap.reset();  // no n_hint either
    rejects(c);
    c = base;
    c.no_bits = 12;
    rejects(c);
    c = base;
    c.lambda_cap = 1000;  // lambda_1 = 600 does not fit an 8-bit filter counter
    c.mice_filter_fraction = 0.2;
    rejects(c);
    c = base;
    c.lambda_cap = 200000;  // lambda_1 = 120000 does not fit 16-bit NO
    c.mice_filter_fraction = 0.0;
    rejects(c);
    c = base;
    c.lambda_cap = 3;  // only one effective layer, nothing left after the filter
    c.mice_filter_fraction = 0.2;
    rejects(c);
    c = base;
    c.memory_bytes = 500;
    c.total_buckets.reset();
    rejects(c);  // stash alone needs 768 bytes
}

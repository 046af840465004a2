#include "pairscore/core.hpp"

#include <doctest.h>

#include <cmath>

using namespace pairscore;

TEST_CASE("normalize_slider maps the slider onto [-1, 1]") {
    CHECK(normalize_slider(0).value() == -1.0);
    CHECK(normalize_slider(50).value() == 0.0);
    CHECK(normalize_slider(100).value() == 1.0);
    CHECK(normalize_slider(75).value() == 0.5);
    CHECK_THROWS_AS(normalize_slider(-1), ValidationError);
    CHECK_THROWS_AS(normalize_slider(101), ValidationError);
}

TEST_CASE("normalize_slider is odd around the midpoint") {
    for (int s = 0; s <= 100; ++s) {
        CHECK(normalize_slider(s).value() == -normalize_slider(100 - s).value());
    }
}

TEST_CASE("comparison_weight") {
    CHECK(comparison_weight(3, 3.0) == 0.5);
    CHECK(comparison_weight(9, 3.0) == 0.75);
    CHECK(comparison_weight(0, 3.0) == 0.0);
    CHECK_THROWS_AS(comparison_weight(-1, 3.0), ValidationError);
    CHECK_THROWS_AS(comparison_weight(1, 0.0), ValidationError);

    SUBCASE("strictly increasing and below one") {
        double prev = -1.0;
        for (std::int64_t r = 0; r < 100000; r += 7) {
            const double w = comparison_weight(r, 3.0);
            CHECK(w > prev);
            CHECK(w < 1.0);
            prev = w;
        }
        CHECK(comparison_weight(1'000'000'000, 3.0) < 1.0);
    }
}

TEST_CASE("confidence_factor") {
    CHECK(confidence_factor(0) == 0.0);
    CHECK(confidence_factor(3) == 1.0);
    CHECK(confidence_factor(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(confidence_factor(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(confidence_factor(4), ValidationError);
    CHECK_THROWS_AS(confidence_factor(-1), ValidationError);
}

TEST_CASE("criterion catalog") {
    CHECK(Criterion(1).name() == "Should be largely recommended");
    CHECK(Criterion(1).is_default());
    CHECK(Criterion(10).name() == "Entertaining and relaxing");
    CHECK(Criterion(8).name() == "Resilience to backfiring risks");
    CHECK_THROWS_AS(Criterion(0), ValidationError);
    CHECK_THROWS_AS(Criterion(11), ValidationError);
    CHECK_THROWS_AS(Criterion::from_name("Funny"), ValidationError);

    int defaults = 0;
    for (const auto& c : Criterion::all()) {
        CHECK(Criterion::from_name(c.name()).id() == c.id());
        defaults += c.is_default() ? 1 : 0;
    }
    CHECK(Criterion::all().size() == 10);
    CHECK(defaults == 1);
}

TEST_CASE("comparison validation") {
    Comparison c{.contributor = {"alice"}, .entity_a = {"v1"}, .entity_b = {"v2"}};
    CHECK_NOTHROW(validate(c));

    auto bad = c;
    bad.entity_b = c.entity_a;
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = c;
    bad.slider = 101;
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = c;
    bad.confidence = 4;
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = c;
    bad.entity_a = EntityId{""};
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = c;
    bad.slider_trajectory = {{0, 50}, {120, 130}};
    CHECK_THROWS_AS(validate(bad), ValidationError);

    bad = c;
    bad.response_time_ms = -5;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("hyperparameter defaults and validation") {
    const Hyperparams h;
    CHECK(h.lambda == 1.0);
    CHECK(h.nu == 1.0);
    CHECK(h.c_weight == 3.0);
    CHECK(h.eps_abs == 1e-6);
    CHECK(h.step_size == 0.1);
    CHECK(h.max_iters == 10000);
    CHECK(h.grad_tol == 1e-7);
    CHECK_NOTHROW(validate(h));

    auto bad = h;
    bad.nu = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = h;
    bad.max_iters = 0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = h;
    bad.lambda = std::nan("");
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("unordered_pair is orientation independent") {
    const EntityId a{"x"}, b{"y"};
    CHECK(unordered_pair(a, b) == unordered_pair(b, a));
    CHECK(unordered_pair(b, a).first == a);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "extsrc/ensemble.hpp"
#include "testutil.hpp"

using namespace extsrc;

TEST_CASE("weight evaluation") {
    const Potential g = testutil::gaussian_potential();
    CHECK(weight_eval(g, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(weight_eval(g, 1.0, 1.0) ==
          doctest::Approx(std::exp(0.5)).epsilon(1e-14));

    const Potential q = testutil::quartic_potential();
    CHECK(weight_eval(q, 0.0, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    // Far tail underflows to zero rather than raising.
    CHECK(weight_eval(g, 0.0, 1e6) == 0.0);
}

TEST_CASE("weight exponent additivity") {
    const Potential q = Potential::validated({0.3, -0.2, 0.1, 0.0, 0.25});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int it = 0; it < 200; ++it) {
        const double x = U(rng), a = U(rng), b = U(rng);
        const double lhs = weight_eval(q, a, x) * std::exp(b * x - a * x);
        const double rhs = weight_eval(q, b, x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("potential validation") {
    CHECK_THROWS_AS(Potential::validated({0, 0, 0, 1}), config_error); // x^3
    CHECK_THROWS_AS(Potential::validated({0, 1}), config_error);       // x
    CHECK_THROWS_AS(Potential::validated({0, 0, -1}), config_error);
    CHECK_THROWS_AS(Potential::validated({1}), config_error);
    CHECK_NOTHROW(Potential::validated({0, 1, 0, 0, 2})); // odd terms allowed
    // Trailing zeros trim down to the true degree.
    CHECK(Potential::validated({0, 0, 0.5, 0}).degree() == 2);
    CHECK(Potential::validated({0, 0, 0.5}).is_gaussian());
    CHECK_FALSE(testutil::quartic_potential().is_gaussian());
}

TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(SourceSpectrum::validated({{1.0, 1}, {1.0, 1}}),
                    config_error);
    CHECK_THROWS_AS(SourceSpectrum::validated({{1.0, 0}}), config_error);
    CHECK_THROWS_AS(SourceSpectrum::validated({}), config_error);
    const auto s = SourceSpectrum::validated({{-1.0, 1}, {1.0, 2}});
    CHECK(s.n() == 3);
    CHECK(s.p() == 2);
    CHECK(s.max_abs_a() == 1.0);
}

TEST_CASE("default ordering") {
    SUBCASE("single eigenvalue") {
        const auto cfg = testutil::gauss_config({{0.0, 2}});
        CHECK(cfg.ordering().alpha == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("two eigenvalues end with (a1, a2)") {
        const auto cfg = testutil::gauss_config({{-1.0, 1}, {1.0, 2}});
        CHECK(cfg.ordering().alpha == std::vector<double>{1.0, -1.0, 1.0});
        const auto cfg2 = testutil::gauss_config({{-1.0, 2}, {1.0, 2}});
        CHECK(cfg2.ordering().alpha ==
              std::vector<double>{-1.0, 1.0, -1.0, 1.0});
    }
    SUBCASE("three eigenvalues use the block ordering") {
        const auto cfg = testutil::gauss_config({{-1.0, 1}, {0.0, 2}, {1.0, 1}});
        CHECK(cfg.ordering().alpha == std::vector<double>{-1.0, 0.0, 0.0, 1.0});
    }
}

TEST_CASE("prefix counts") {
    const auto spec = SourceSpectrum::validated({{-1.0, 2}, {1.0, 1}});
    const Ordering ord{{-1.0, 1.0, -1.0}};
    CHECK(prefix_counts(spec, ord, 0).k == std::vector<int>{0, 0});
    CHECK(prefix_counts(spec, ord, 2).k == std::vector<int>{1, 1});
    CHECK(prefix_counts(spec, ord, 3).k == std::vector<int>{2, 1});
    CHECK_THROWS_AS(prefix_counts(spec, ord, 4), config_error);
    CHECK_THROWS_AS(prefix_counts(spec, ord, -1), config_error);

    // |prefix_counts(ord, k)| = k for every k, and the full prefix equals
    // the multiplicity vector.
    const auto cfg = testutil::gauss_config({{-1.0, 2}, {0.5, 3}, {2.0, 1}});
    for (int k = 0; k <= cfg.n(); ++k)
        CHECK(cfg.prefix_counts(k).total() == k);
    CHECK(cfg.prefix_counts(cfg.n()).k == std::vector<int>{2, 3, 1});
}

TEST_CASE("extended prefix counts for two eigenvalues") {
    const auto cfg = testutil::gauss_config({{-1.0, 1}, {1.0, 2}});
    CHECK(cfg.extended_prefix_counts(4).k == std::vector<int>{2, 2});
    CHECK(cfg.extended_prefix_counts(5).k == std::vector<int>{2, 3});
    CHECK_THROWS_AS(cfg.extended_prefix_counts(6), config_error);
    const auto p3 = testutil::gauss_config({{-1.0, 1}, {0.0, 1}, {1.0, 1}});
    CHECK_THROWS_AS(p3.extended_prefix_counts(4), config_error);
}

TEST_CASE("ordering mismatch rejected") {
    const auto pot = testutil::gaussian_potential();
    const auto spec = SourceSpectrum::validated({{-1.0, 1}, {1.0, 2}});
    CHECK_THROWS_AS(EnsembleConfig::validated(pot, spec,
                                              Ordering{{-1.0, 1.0}}),
                    config_error);
    CHECK_THROWS_AS(EnsembleConfig::validated(pot, spec,
                                              Ordering{{-1.0, -1.0, 1.0}}),
                    config_error);
    CHECK_THROWS_AS(EnsembleConfig::validated(pot, spec,
                                              Ordering{{-1.0, 1.0, 2.0}}),
                    config_error);
    CHECK_NOTHROW(EnsembleConfig::validated(pot, spec,
                                            Ordering{{1.0, 1.0, -1.0}}));
}

TEST_CASE("config from JSON") {
    const auto doc = nlohmann::json::parse(R"({
        "potential": [0, 0, 0.5],
        "spectrum": [[-1, 1], [1, 2]]
    })");
    const auto cfg = EnsembleConfig::from_json(doc);
    CHECK(cfg.n() == 3);
    CHECK(cfg.potential().is_gaussian());
    CHECK(cfg.ordering().alpha == std::vector<double>{1.0, -1.0, 1.0});

    auto with_ord = doc;
    with_ord["ordering"] = {1.0, 1.0, -1.0};
    CHECK(EnsembleConfig::from_json(with_ord).ordering().alpha ==
          std::vector<double>{1.0, 1.0, -1.0});

    auto bad = doc;
    bad["potential"] = {0, 0, 0, 1};
    CHECK_THROWS_AS(EnsembleConfig::from_json(bad), config_error);
}

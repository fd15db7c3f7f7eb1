#include <doctest.h>

#include "ebco/errors.hpp"
#include "ebco/synthetic.hpp"

using namespace ebco;

namespace {

// Empirical P(label=1) split by whether a row matches the planted assignment.
struct MatchRates {
    double matched;
    double unmatched;
};

MatchRates label_rates(const Dataset& ds, const PlantedTruth& truth, std::size_t label) {
    double hit_m = 0, n_m = 0, hit_u = 0, n_u = 0;
    for (std::size_t r = 0; r < ds.sample_count(); ++r) {
        bool match = true;
        for (const auto& [name, value] : truth.assignment.bindings) {
            const auto idx = *ds.schema().feature_index(name);
            if (ds.raw()[r][idx] != std::get<std::string>(value)) {
                match = false;
                break;
            }
        }
        if (match) {
            n_m += 1;
            hit_m += ds.targets()(r, label);
        } else {
            n_u += 1;
            hit_u += ds.targets()(r, label);
        }
    }
    return {n_m > 0 ? hit_m / n_m : 0.0, n_u > 0 ? hit_u / n_u : 0.0};
}

} // namespace

TEST_CASE("planted rows carry lower empirical label rates") {
    SyntheticSpec spec;
    spec.n_features = 4;
    spec.values_per_feature = 3;
    spec.n_labels = 3;
    spec.n_samples = 500;
    spec.n_planted = 2;
    const auto [ds, truth] = generate_synthetic(spec, 7);
    CHECK(ds.sample_count() == 500);
    CHECK(ds.feature_count() == 4);
    CHECK(ds.label_count() == 3);
    CHECK(truth.assignment.size() == 2);
    for (std::size_t l = 0; l < 3; ++l) {
        const MatchRates rates = label_rates(ds, truth, l);
        CHECK(rates.matched < rates.unmatched);
        CHECK(truth.p_match_per_label[l] <= 0.1);
        CHECK(truth.p_nomatch_per_label[l] >= 0.7);
    }
}

TEST_CASE("zero planted features makes every row a match") {
    SyntheticSpec spec;
    spec.n_samples = 400;
    spec.n_planted = 0;
    const auto [ds, truth] = generate_synthetic(spec, 11);
    CHECK(truth.assignment.empty());
    for (std::size_t l = 0; l < ds.label_count(); ++l) {
        double mean = 0;
        for (std::size_t r = 0; r < ds.sample_count(); ++r) mean += ds.targets()(r, l);
        mean /= static_cast<double>(ds.sample_count());
        CHECK(mean < 0.15); // everything draws from the low probability
    }
}

TEST_CASE("different seeds give different tables, same seed identical ones") {
    SyntheticSpec spec;
    spec.n_samples = 50;
    const auto [a, ta] = generate_synthetic(spec, 7);
    const auto [b, tb] = generate_synthetic(spec, 8);
    const auto [c, tc] = generate_synthetic(spec, 7);
    CHECK(a.raw() != b.raw());
    CHECK(a.raw() == c.raw());
    CHECK(a.label_tokens() == c.label_tokens());
    CHECK(a.encoded() == c.encoded());
    CHECK(assignment_to_json(ta.assignment) == assignment_to_json(tc.assignment));
}

TEST_CASE("explicit planted assignment is honored") {
    SyntheticSpec spec;
    spec.n_samples = 60;
    spec.n_planted = 1;
    Assignment planted;
    planted.bindings["f2"] = std::string("v3");
    spec.planted = planted;
    const auto [ds, truth] = generate_synthetic(spec, 5);
    CHECK(value_equal(truth.assignment.bindings.at("f2"), Value(std::string("v3"))));
}

TEST_CASE("invalid specs are rejected") {
    SyntheticSpec too_many;
    too_many.n_planted = 9;
    too_many.n_features = 4;
    try {
        generate_synthetic(too_many, 1);
        FAIL("expected InvalidSpec");
    } catch (const Error& e) {
        CHECK(e.code() == errc::invalid_spec);
    }

    SyntheticSpec tiny;
    tiny.n_samples = 5;
    CHECK_THROWS_AS(generate_synthetic(tiny, 1), Error);
}

TEST_CASE("spec json round trip") {
    SyntheticSpec spec;
    spec.n_features = 6;
    spec.n_planted = 3;
    spec.p_match = 0.08;
    Assignment planted;
    planted.bindings["f1"] = std::string("v1");
    planted.bindings["f4"] = std::string("v2");
    planted.bindings["f6"] = std::string("v3");
    spec.planted = planted;
    const SyntheticSpec back = synthetic_spec_from_json(synthetic_spec_to_json(spec));
    CHECK(back.n_features == 6);
    CHECK(back.n_planted == 3);
    CHECK(back.p_match == 0.08);
    REQUIRE(back.planted.has_value());
    CHECK(assignment_to_json(*back.planted) == assignment_to_json(planted));
}

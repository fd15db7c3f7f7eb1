#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ebco/errors.hpp"
#include "ebco/sensitivity.hpp"
#include "helpers.hpp"

using namespace ebco;
using namespace ebco::testing;

namespace {

Dataset three_feature_dataset() {
    FeatureSchema schema;
    schema.features.push_back({"f1", FeatureKind::categorical, {"a", "b"}, 0, 0});
    schema.features.push_back({"f2", FeatureKind::categorical, {"x", "y", "z"}, 0, 0});
    schema.features.push_back({"q", FeatureKind::numeric, {}, -10, 10});
    schema.labels = {"l1", "l2"};
    std::vector<std::vector<std::string>> raw;
    std::vector<std::vector<std::string>> labels;
    const char* f2s[] = {"x", "y", "z"};
    for (int i = 0; i < 12; ++i) {
        raw.push_back({i % 2 == 0 ? "a" : "b", f2s[i % 3], std::to_string(0.7 * i - 4)});
        labels.push_back({i % 2 == 0 ? "1" : "0", i % 3 == 0 ? "1" : "0"});
    }
    return Dataset::from_rows(schema, std::move(raw), std::move(labels));
}

} // namespace

TEST_CASE("empty assignment scores upsilon one") {
    const Dataset ds = three_feature_dataset();
    Rng rng(61);
    const MlpModel model = random_model(rng, ds.encoding(), 6, 2, 1.5);
    const SensitivityScore score = sensitivity_score(model, ds, Assignment{});
    for (double u : score.upsilon) CHECK(std::abs(u - 1.0) < 1e-10);
}

TEST_CASE("full assignment scores upsilon zero") {
    const Dataset ds = three_feature_dataset();
    Rng rng(67);
    const MlpModel model = random_model(rng, ds.encoding(), 6, 2, 1.5);
    Assignment full;
    full.bindings["f1"] = std::string("a");
    full.bindings["f2"] = std::string("y");
    full.bindings["q"] = 1.5;
    const SensitivityScore score = sensitivity_score(model, ds, full);
    for (double u : score.upsilon) CHECK(std::abs(u) < 1e-10);
}

TEST_CASE("partial assignment matches an independent covariance computation") {
    const Dataset ds = three_feature_dataset();
    Rng rng(71);
    const MlpModel model = random_model(rng, ds.encoding(), 6, 2, 1.5);
    Assignment partial;
    partial.bindings["f2"] = std::string("z");
    const SensitivityScore score = sensitivity_score(model, ds, partial);

    // Spreadsheet-style oracle over the m predictions.
    const Matrix p = predict(model, ds.encoded());
    const Matrix pc = predict(model, apply_assignment(ds, partial).encoded());
    const std::size_t m = ds.sample_count();
    for (std::size_t l = 0; l < 2; ++l) {
        double mean_p = 0, mean_pc = 0;
        for (std::size_t r = 0; r < m; ++r) {
            mean_p += p(r, l);
            mean_pc += pc(r, l);
        }
        mean_p /= m;
        mean_pc /= m;
        double cov = 0, var = 0;
        for (std::size_t r = 0; r < m; ++r) {
            cov += (pc(r, l) - mean_pc) * (p(r, l) - mean_p);
            var += (p(r, l) - mean_p) * (p(r, l) - mean_p);
        }
        cov /= m;
        var /= m;
        CHECK(score.upsilon[l] == doctest::Approx(cov / var).epsilon(1e-10));
        CHECK(score.lambda[l] == doctest::Approx(mean_pc).epsilon(1e-12));
    }
}

TEST_CASE("constant predictor raises DegenerateVariance, or zero under policy") {
    const Dataset ds = three_feature_dataset();
    const MlpModel model =
        make_model(Matrix(ds.encoded_width(), 3), std::vector<double>(3, 0.0), Matrix(3, 2),
                   std::vector<double>(2, 0.0), ds.encoding());
    try {
        sensitivity_score(model, ds, Assignment{});
        FAIL("expected DegenerateVariance");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_variance);
    }
    const BasePredictionStats base = base_prediction_stats(model, ds);
    const SensitivityScore score =
        sensitivity_score(model, ds, Assignment{}, base, true);
    for (double u : score.upsilon) CHECK(u == 0.0);
}

TEST_CASE("upsilon respects the variance ratio bound") {
    const Dataset ds = three_feature_dataset();
    Rng rng(73);
    for (int t = 0; t < 10; ++t) {
        const MlpModel model = random_model(rng, ds.encoding(), 5, 2, 2.0);
        Assignment partial;
        partial.bindings["f1"] = std::string(t % 2 == 0 ? "a" : "b");
        const SensitivityScore score = sensitivity_score(model, ds, partial);
        const Matrix p = predict(model, ds.encoded());
        const Matrix pc = predict(model, apply_assignment(ds, partial).encoded());
        const std::size_t m = ds.sample_count();
        for (std::size_t l = 0; l < 2; ++l) {
            double mean_p = 0, mean_pc = 0;
            for (std::size_t r = 0; r < m; ++r) {
                mean_p += p(r, l);
                mean_pc += pc(r, l);
            }
            mean_p /= m;
            mean_pc /= m;
            double var_p = 0, var_pc = 0;
            for (std::size_t r = 0; r < m; ++r) {
                var_p += (p(r, l) - mean_p) * (p(r, l) - mean_p);
                var_pc += (pc(r, l) - mean_pc) * (pc(r, l) - mean_pc);
            }
            const double bound = std::sqrt(var_pc / var_p);
            CHECK(std::abs(score.upsilon[l]) <= bound + 1e-9);
        }
    }
}

TEST_CASE("row permutation leaves the score unchanged") {
    const Dataset ds = three_feature_dataset();
    Rng rng(79);
    const MlpModel model = random_model(rng, ds.encoding(), 5, 2, 1.0);

    // Rebuild the dataset with rows in reverse order.
    std::vector<std::vector<std::string>> raw(ds.raw().rbegin(), ds.raw().rend());
    std::vector<std::vector<std::string>> labels(ds.label_tokens().rbegin(),
                                                 ds.label_tokens().rend());
    const Dataset reversed =
        Dataset::from_rows(ds.schema(), std::move(raw), std::move(labels));

    Assignment partial;
    partial.bindings["f2"] = std::string("x");
    const SensitivityScore a = sensitivity_score(model, ds, partial);
    const SensitivityScore b = sensitivity_score(model, reversed, partial);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(std::abs(a.upsilon[l] - b.upsilon[l]) < 1e-12);
        CHECK(std::abs(a.lambda[l] - b.lambda[l]) < 1e-12);
    }
}

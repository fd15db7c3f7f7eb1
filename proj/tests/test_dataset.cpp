#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ebco/dataset.hpp"
#include "ebco/errors.hpp"
#include "ebco/report.hpp"

using namespace ebco;

namespace {

FeatureSchema cat_schema() {
    FeatureSchema schema;
    schema.features.push_back({"color", FeatureKind::categorical, {"a", "b"}, 0, 0});
    schema.labels = {"hit"};
    return schema;
}

FeatureSchema num_schema(double lo = -1000, double hi = 1000) {
    FeatureSchema schema;
    schema.features.push_back({"x", FeatureKind::numeric, {}, lo, hi});
    schema.labels = {"hit"};
    return schema;
}

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ebco_dataset_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::filesystem::path write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = temp_file(name);
    std::ofstream(path) << content;
    return path;
}

} // namespace

TEST_CASE("load_csv one-hot encodes a categorical feature") {
    const auto path = write_temp_csv("cat.csv", "color,label:hit\na,1\nb,0\na,1\n");
    const Dataset ds = load_csv(path.string(), cat_schema());
    CHECK(ds.sample_count() == 3);
    CHECK(ds.encoded_width() == 2);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(ds.encoded()(r, 0) + ds.encoded()(r, 1) == 1.0);
    }
    CHECK(ds.encoded()(0, 0) == 1.0);
    CHECK(ds.encoded()(1, 1) == 1.0);
    CHECK(ds.targets()(0, 0) == 1.0);
    CHECK(ds.targets()(1, 0) == 0.0);
}

TEST_CASE("load_csv rejects undeclared categories with the location") {
    const auto path = write_temp_csv("badcat.csv", "color,label:hit\na,1\nc,0\n");
    try {
        load_csv(path.string(), cat_schema());
        FAIL("expected UnknownCategory");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_category);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("color") != std::string::npos);
    }
}

TEST_CASE("numeric columns are standardized with the population stddev") {
    const auto path = write_temp_csv("num.csv", "x,label:hit\n1,0\n2,1\n3,0\n");
    const Dataset ds = load_csv(path.string(), num_schema());
    // Hand oracle: mean 2, population stddev sqrt(2/3); (1-2)/0.81649658 = -1.22474487.
    CHECK(ds.encoded()(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(ds.encoded()(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ds.encoded()(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("standardized columns have zero mean and unit stddev") {
    std::string csv = "x,label:hit\n";
    for (int i = 0; i < 17; ++i) {
        csv += std::to_string(3.5 + 0.7 * i * i) + ",0\n";
    }
    const auto path = write_temp_csv("std.csv", csv);
    const Dataset ds = load_csv(path.string(), num_schema(0, 1e6));
    double mean = 0.0;
    for (std::size_t r = 0; r < ds.sample_count(); ++r) mean += ds.encoded()(r, 0);
    mean /= static_cast<double>(ds.sample_count());
    double var = 0.0;
    for (std::size_t r = 0; r < ds.sample_count(); ++r) {
        var += (ds.encoded()(r, 0) - mean) * (ds.encoded()(r, 0) - mean);
    }
    var /= static_cast<double>(ds.sample_count());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("constant numeric columns encode to zeros") {
    const auto path = write_temp_csv("const.csv", "x,label:hit\n42,0\n42,1\n42,0\n");
    const Dataset ds = load_csv(path.string(), num_schema());
    for (std::size_t r = 0; r < 3; ++r) CHECK(ds.encoded()(r, 0) == 0.0);
    const auto domains = candidate_values(ds, 5);
    REQUIRE(domains[0].candidates.size() == 1);
    CHECK(std::get<double>(domains[0].candidates[0]) == 42.0);
}

TEST_CASE("load_csv error taxonomy") {
    SUBCASE("missing column") {
        const auto path = write_temp_csv("missing.csv", "wrong,label:hit\na,1\n");
        try {
            load_csv(path.string(), cat_schema());
            FAIL("expected MissingColumn");
        } catch (const Error& e) {
            CHECK(e.code() == errc::missing_column);
        }
    }
    SUBCASE("type mismatch carries row and column") {
        const auto path = write_temp_csv("badnum.csv", "x,label:hit\n1,0\nabc,1\n");
        try {
            load_csv(path.string(), num_schema());
            FAIL("expected TypeMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == errc::type_mismatch);
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("numeric value outside the declared range") {
        const auto path = write_temp_csv("range.csv", "x,label:hit\n7,0\n");
        try {
            load_csv(path.string(), num_schema(0, 5));
            FAIL("expected TypeMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == errc::type_mismatch);
        }
    }
    SUBCASE("empty dataset") {
        const auto path = write_temp_csv("empty.csv", "x,label:hit\n");
        try {
            load_csv(path.string(), num_schema());
            FAIL("expected EmptyDataset");
        } catch (const Error& e) {
            CHECK(e.code() == errc::empty_dataset);
        }
    }
    SUBCASE("non-binary label") {
        const auto path = write_temp_csv("badlabel.csv", "x,label:hit\n1,2\n");
        CHECK_THROWS_AS(load_csv(path.string(), num_schema()), Error);
    }
    SUBCASE("missing file") {
        try {
            load_csv("/nonexistent/nowhere.csv", num_schema());
            FAIL("expected IoError");
        } catch (const Error& e) {
            CHECK(e.code() == errc::io_error);
        }
    }
}

TEST_CASE("csv round-trip reproduces every cell") {
    const std::string content = "color,x,label:hit\na,1.5,1\nb,2.25,0\na,-3,1\n";
    FeatureSchema schema;
    schema.features.push_back({"color", FeatureKind::categorical, {"a", "b"}, 0, 0});
    schema.features.push_back({"x", FeatureKind::numeric, {}, -10, 10});
    schema.labels = {"hit"};
    const auto path = write_temp_csv("round.csv", content);
    const Dataset ds = load_csv(path.string(), schema);
    const auto out = temp_file("round_out.csv");
    write_csv(ds, out.string());
    CHECK(read_text_file(out.string()) == content);
}

TEST_CASE("candidate grid uses linear-interpolation quantiles") {
    std::string csv = "x,label:hit\n";
    for (int i = 1; i <= 100; ++i) csv += std::to_string(i) + ",0\n";
    const auto path = write_temp_csv("grid.csv", csv);
    const Dataset ds = load_csv(path.string(), num_schema(0, 200));
    const auto domains = candidate_values(ds, 5);
    REQUIRE(domains[0].candidates.size() == 5);
    // Hand-computed interpolated quantiles of 1..100 at 0, .25, .5, .75, 1.
    const double expected[] = {1.0, 25.75, 50.5, 75.25, 100.0};
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(std::abs(std::get<double>(domains[0].candidates[k]) - expected[k]) < 0.5);
    }
    CHECK_THROWS_AS(candidate_values(ds, 1), Error);
}

TEST_CASE("categorical candidates keep declaration order") {
    FeatureSchema schema;
    schema.features.push_back({"answer", FeatureKind::categorical, {"yes", "no"}, 0, 0});
    schema.labels = {"hit"};
    const Dataset ds = Dataset::from_rows(schema, {{"yes"}, {"no"}}, {{"1"}, {"0"}});
    const auto domains = candidate_values(ds, 5);
    REQUIRE(domains[0].candidates.size() == 2);
    CHECK(std::get<std::string>(domains[0].candidates[0]) == "yes");
    CHECK(std::get<std::string>(domains[0].candidates[1]) == "no");
}

TEST_CASE("apply_assignment") {
    FeatureSchema schema;
    schema.features.push_back({"color", FeatureKind::categorical, {"a", "b"}, 0, 0});
    schema.features.push_back({"x", FeatureKind::numeric, {}, -100, 100});
    schema.labels = {"hit"};
    const Dataset ds = Dataset::from_rows(
        schema, {{"a", "1"}, {"b", "2"}, {"a", "3"}}, {{"1"}, {"0"}, {"1"}});

    SUBCASE("empty assignment is the identity") {
        const Dataset out = apply_assignment(ds, Assignment{});
        CHECK(out.encoded() == ds.encoded());
    }
    SUBCASE("categorical assignment rewrites the one-hot slice") {
        Assignment a;
        a.bindings["color"] = std::string("b");
        const Dataset out = apply_assignment(ds, a);
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(out.encoded()(r, 0) == 0.0);
            CHECK(out.encoded()(r, 1) == 1.0);
            CHECK(out.raw()[r][0] == "b");
        }
        for (std::size_t r = 0; r < 3; ++r) CHECK(out.encoded()(r, 2) == ds.encoded()(r, 2));
    }
    SUBCASE("numeric assignment re-encodes with the original statistics") {
        Assignment a;
        a.bindings["x"] = 2.5;
        const Dataset out = apply_assignment(ds, a);
        const FeatureEncoding& fe = ds.encoding().features[1];
        const double expected = (2.5 - fe.mean) / fe.stddev;
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(out.encoded()(r, 2) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("idempotent") {
        Assignment a;
        a.bindings["color"] = std::string("b");
        a.bindings["x"] = 2.0;
        const Dataset once = apply_assignment(ds, a);
        const Dataset twice = apply_assignment(once, a);
        CHECK(once.encoded() == twice.encoded());
    }
    SUBCASE("full assignment yields identical rows") {
        Assignment a;
        a.bindings["color"] = std::string("a");
        a.bindings["x"] = 1.0;
        const Dataset out = apply_assignment(ds, a);
        for (std::size_t r = 1; r < 3; ++r) {
            for (std::size_t c = 0; c < out.encoded_width(); ++c) {
                CHECK(out.encoded()(r, c) == out.encoded()(0, c));
            }
        }
    }
    SUBCASE("unknown feature") {
        Assignment a;
        a.bindings["nope"] = 1.0;
        try {
            apply_assignment(ds, a);
            FAIL("expected UnknownFeature");
        } catch (const Error& e) {
            CHECK(e.code() == errc::unknown_feature);
        }
    }
    SUBCASE("value out of domain") {
        Assignment a;
        a.bindings["x"] = 1e6;
        try {
            apply_assignment(ds, a);
            FAIL("expected ValueOutOfDomain");
        } catch (const Error& e) {
            CHECK(e.code() == errc::value_out_of_domain);
        }
    }
}

TEST_CASE("assignment on a constant column keeps the zero encoding") {
    FeatureSchema schema;
    schema.features.push_back({"x", FeatureKind::numeric, {}, 0, 100});
    schema.labels = {"hit"};
    const Dataset ds =
        Dataset::from_rows(schema, {{"42"}, {"42"}, {"42"}}, {{"1"}, {"0"}, {"1"}});
    Assignment a;
    a.bindings["x"] = 7.0;
    const Dataset out = apply_assignment(ds, a);
    for (std::size_t r = 0; r < 3; ++r) CHECK(out.encoded()(r, 0) == 0.0);
}

TEST_CASE("schema validation") {
    FeatureSchema schema;
    schema.features.push_back({"x", FeatureKind::numeric, {}, 5, 5});
    schema.labels = {"hit"};
    CHECK_THROWS_AS(schema.validate(), Error);

    FeatureSchema dup;
    dup.features.push_back({"f", FeatureKind::categorical, {"a", "b"}, 0, 0});
    dup.features.push_back({"f", FeatureKind::categorical, {"a", "b"}, 0, 0});
    dup.labels = {"hit"};
    CHECK_THROWS_AS(dup.validate(), Error);

    FeatureSchema clash;
    clash.features.push_back({"f", FeatureKind::categorical, {"a", "b"}, 0, 0});
    clash.labels = {"f"};
    CHECK_THROWS_AS(clash.validate(), Error);

    FeatureSchema one_cat;
    one_cat.features.push_back({"f", FeatureKind::categorical, {"only"}, 0, 0});
    one_cat.labels = {"hit"};
    CHECK_THROWS_AS(one_cat.validate(), Error);
}

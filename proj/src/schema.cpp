#include "ebco/schema.hpp"

#include <charconv>
#include <cmath>
#include <unordered_set>

#include "ebco/errors.hpp"

namespace ebco {

std::string value_to_string(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    const double x = std::get<double>(v);
    // Shortest round-trip representation, locale independent.
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

bool value_equal(const Value& a, const Value& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<std::string>(a)) {
        return std::get<std::string>(a) == std::get<std::string>(b);
    }
    return std::get<double>(a) == std::get<double>(b);
}

bool FeatureDef::contains(const Value& v) const {
    if (kind == FeatureKind::categorical) {
        if (!std::holds_alternative<std::string>(v)) return false;
        const auto& s = std::get<std::string>(v);
        for (const auto& c : categories) {
            if (c == s) return true;
        }
        return false;
    }
    if (!std::holds_alternative<double>(v)) return false;
    const double x = std::get<double>(v);
    return std::isfinite(x) && x >= min && x <= max;
}

std::optional<std::size_t> FeatureSchema::feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].name == name) return i;
    }
    return std::nullopt;
}

void FeatureSchema::validate() const {
    if (features.empty()) {
        throw Error(errc::invalid_spec, "schema declares no features");
    }
    if (labels.empty()) {
        throw Error(errc::invalid_spec, "schema declares no labels");
    }
    std::unordered_set<std::string> names;
    for (const auto& f : features) {
        if (f.name.empty()) {
            throw Error(errc::invalid_spec, "feature with empty name");
        }
        if (!names.insert(f.name).second) {
            throw Error(errc::invalid_spec, "duplicate feature name '" + f.name + "'");
        }
        if (f.kind == FeatureKind::categorical) {
            std::unordered_set<std::string> cats(f.categories.begin(), f.categories.end());
            if (cats.size() != f.categories.size()) {
                throw Error(errc::invalid_spec,
                            "feature '" + f.name + "' has duplicate category values");
            }
            if (f.categories.size() < 2) {
                throw Error(errc::invalid_spec,
                            "categorical feature '" + f.name + "' needs at least 2 values");
            }
        } else {
            if (!(f.min < f.max)) {
                throw Error(errc::invalid_spec,
                            "numeric feature '" + f.name + "' needs min < max");
            }
        }
    }
    std::unordered_set<std::string> label_names;
    for (const auto& l : labels) {
        if (l.empty()) {
            throw Error(errc::invalid_spec, "label with empty name");
        }
        if (!label_names.insert(l).second) {
            throw Error(errc::invalid_spec, "duplicate label name '" + l + "'");
        }
        if (names.count(l) != 0) {
            throw Error(errc::invalid_spec, "label '" + l + "' collides with a feature name");
        }
    }
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
    FeatureSchema schema;
    for (const auto& jf : j.at("features")) {
        FeatureDef def;
        def.name = jf.at("name").get<std::string>();
        const auto kind = jf.at("kind").get<std::string>();
        if (kind == "categorical") {
            def.kind = FeatureKind::categorical;
            def.categories = jf.at("values").get<std::vector<std::string>>();
        } else if (kind == "numeric") {
            def.kind = FeatureKind::numeric;
            def.min = jf.at("min").get<double>();
            def.max = jf.at("max").get<double>();
        } else {
            throw Error(errc::bad_config, "unknown feature kind '" + kind + "'");
        }
        schema.features.push_back(std::move(def));
    }
    schema.labels = j.at("labels").get<std::vector<std::string>>();
    schema.validate();
    return schema;
}

nlohmann::json schema_to_json(const FeatureSchema& schema) {
    nlohmann::json jfeatures = nlohmann::json::array();
    for (const auto& f : schema.features) {
        nlohmann::json jf;
        jf["name"] = f.name;
        if (f.kind == FeatureKind::categorical) {
            jf["kind"] = "categorical";
            jf["values"] = f.categories;
        } else {
            jf["kind"] = "numeric";
            jf["min"] = f.min;
            jf["max"] = f.max;
        }
        jfeatures.push_back(std::move(jf));
    }
    return nlohmann::json{{"features", std::move(jfeatures)}, {"labels", schema.labels}};
}

nlohmann::json assignment_to_json(const Assignment& a) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : a.bindings) {
        if (std::holds_alternative<std::string>(value)) {
            j[name] = std::get<std::string>(value);
        } else {
            j[name] = std::get<double>(value);
        }
    }
    return j;
}

Assignment assignment_from_json(const nlohmann::json& j) {
    Assignment a;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_string()) {
            a.bindings[it.key()] = it.value().get<std::string>();
        } else {
            a.bindings[it.key()] = it.value().get<double>();
        }
    }
    return a;
}

const char* errc_name(errc code) {
    switch (code) {
        case errc::missing_column: return "MissingColumn";
        case errc::type_mismatch: return "TypeMismatch";
        case errc::unknown_category: return "UnknownCategory";
        case errc::empty_dataset: return "EmptyDataset";
        case errc::invalid_spec: return "InvalidSpec";
        case errc::unknown_feature: return "UnknownFeature";
        case errc::value_out_of_domain: return "ValueOutOfDomain";
        case errc::non_finite_loss: return "NonFiniteLoss";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::too_many_features: return "TooManyFeatures";
        case errc::unknown_value: return "UnknownValue";
        case errc::degenerate_variance: return "DegenerateVariance";
        case errc::capacity_exceeded: return "CapacityExceeded";
        case errc::space_too_large: return "SpaceTooLarge";
        case errc::empty_domain: return "EmptyDomain";
        case errc::io_error: return "IoError";
        case errc::bad_config: return "BadConfig";
        case errc::internal: return "InternalError";
    }
    return "UnknownError";
}

} // namespace ebco

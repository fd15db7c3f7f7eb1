#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ebco {

enum class FeatureKind { categorical, numeric };

// A concrete cell value: category name for categorical features, double for
// numeric ones.
using Value = std::variant<std::string, double>;

std::string value_to_string(const Value& v);
bool value_equal(const Value& a, const Value& b);

struct FeatureDef {
    std::string name;
    FeatureKind kind = FeatureKind::categorical;
    std::vector<std::string> categories; // categorical only
    double min = 0.0;                    // numeric only
    double max = 0.0;

    bool contains(const Value& v) const;
};

struct FeatureSchema {
    std::vector<FeatureDef> features;
    std::vector<std::string> labels;

    std::size_t feature_count() const { return features.size(); }
    std::size_t label_count() const { return labels.size(); }
    std::optional<std::size_t> feature_index(const std::string& name) const;

    // Enforces the structural invariants (unique nonempty names, categorical
    // domains of size >= 2, numeric min < max, labels disjoint from features).
    void validate() const;
};

// Partial feature -> value map. std::map keys give a canonical name order,
// which the search relies on for deterministic tie-breaking.
struct Assignment {
    std::map<std::string, Value> bindings;

    bool empty() const { return bindings.empty(); }
    std::size_t size() const { return bindings.size(); }
};

// Candidate values of one feature: declared categories, or a quantile grid
// for numeric features.
struct ValueDomain {
    std::string feature;
    std::vector<Value> candidates;
};

FeatureSchema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const FeatureSchema& schema);

nlohmann::json assignment_to_json(const Assignment& a);
Assignment assignment_from_json(const nlohmann::json& j);

} // namespace ebco

#include "ebco/pruning.hpp"

#include <algorithm>
#include <cmath>

#include "ebco/errors.hpp"

namespace ebco {

namespace {

// Index of the candidate nearest to x; ties resolve to the earlier (lower)
// grid point for determinism.
std::size_t nearest_candidate(const std::vector<Value>& candidates, double x) {
    std::size_t best = 0;
    double best_dist = std::abs(x - std::get<double>(candidates[0]));
    for (std::size_t c = 1; c < candidates.size(); ++c) {
        const double dist = std::abs(x - std::get<double>(candidates[c]));
        if (dist < best_dist) {
            best = c;
            best_dist = dist;
        }
    }
    return best;
}

std::size_t find_candidate(const ValueDomain& domain, const Value& value) {
    for (std::size_t c = 0; c < domain.candidates.size(); ++c) {
        if (value_equal(domain.candidates[c], value)) return c;
    }
    throw Error(errc::unknown_value, "value '" + value_to_string(value) +
                                         "' is not a candidate of feature '" + domain.feature +
                                         "'");
}

} // namespace

std::vector<double> value_relevance(const AttributionTensor& tensor, const Dataset& dataset,
                                    const ValueDomain& domain, const Value& value) {
    const auto feature_idx = dataset.schema().feature_index(domain.feature);
    if (!feature_idx) {
        throw Error(errc::unknown_feature, "feature '" + domain.feature + "' not in schema");
    }
    const std::size_t candidate_idx = find_candidate(domain, value);
    const FeatureDef& def = dataset.schema().features[*feature_idx];

    std::vector<double> relevance(tensor.labels, 0.0);
    std::size_t matches = 0;
    for (std::size_t r = 0; r < dataset.sample_count(); ++r) {
        bool match = false;
        if (def.kind == FeatureKind::categorical) {
            match = dataset.raw()[r][*feature_idx] == std::get<std::string>(value);
        } else {
            match = nearest_candidate(domain.candidates,
                                      dataset.numeric_cell(r, *feature_idx)) == candidate_idx;
        }
        if (!match) continue;
        ++matches;
        for (std::size_t l = 0; l < tensor.labels; ++l) {
            relevance[l] += std::abs(tensor.at(r, *feature_idx, l));
        }
    }
    if (matches > 0) {
        for (double& v : relevance) v /= static_cast<double>(matches);
    }
    return relevance;
}

std::vector<PrunedDomain> prune_values(const std::vector<ValueDomain>& domains,
                                       const AttributionTensor& tensor,
                                       const Dataset& dataset, double delta) {
    if (delta < 0.0) {
        throw Error(errc::bad_config, "pruning threshold must be >= 0");
    }
    std::vector<PrunedDomain> result;
    result.reserve(domains.size());
    for (const auto& domain : domains) {
        PrunedDomain pruned;
        pruned.feature = domain.feature;
        std::vector<ScoredValue> scored;
        scored.reserve(domain.candidates.size());
        for (const auto& value : domain.candidates) {
            ScoredValue sv;
            sv.value = value;
            sv.relevance = value_relevance(tensor, dataset, domain, value);
            sv.aggregate = *std::max_element(sv.relevance.begin(), sv.relevance.end());
            scored.push_back(std::move(sv));
        }
        for (auto& sv : scored) {
            if (sv.aggregate > delta) {
                pruned.kept.push_back(sv);
            } else {
                pruned.dropped.push_back(sv);
            }
        }
        if (pruned.kept.empty()) {
            // The search needs every feature assignable; retain the best value.
            std::size_t best = 0;
            for (std::size_t c = 1; c < pruned.dropped.size(); ++c) {
                if (pruned.dropped[c].aggregate > pruned.dropped[best].aggregate) best = c;
            }
            pruned.kept.push_back(pruned.dropped[best]);
            pruned.dropped.erase(pruned.dropped.begin() +
                                 static_cast<std::ptrdiff_t>(best));
            pruned.keep_one_applied = true;
        }
        result.push_back(std::move(pruned));
    }
    return result;
}

nlohmann::json pruning_audit_json(const std::vector<PrunedDomain>& pruned, double delta,
                                  const std::vector<std::string>& labels) {
    const auto scored_json = [&](const ScoredValue& sv) {
        nlohmann::json per_label = nlohmann::json::object();
        for (std::size_t l = 0; l < labels.size(); ++l) {
            per_label[labels[l]] = sv.relevance[l];
        }
        return nlohmann::json{{"value", value_to_string(sv.value)},
                              {"relevance", std::move(per_label)},
                              {"max_relevance", sv.aggregate}};
    };
    nlohmann::json features = nlohmann::json::array();
    for (const auto& domain : pruned) {
        nlohmann::json kept = nlohmann::json::array();
        nlohmann::json dropped = nlohmann::json::array();
        for (const auto& sv : domain.kept) kept.push_back(scored_json(sv));
        for (const auto& sv : domain.dropped) dropped.push_back(scored_json(sv));
        features.push_back(nlohmann::json{{"feature", domain.feature},
                                          {"kept", std::move(kept)},
                                          {"dropped", std::move(dropped)},
                                          {"keep_one_applied", domain.keep_one_applied}});
    }
    return nlohmann::json{{"spec_version", "1.0.0"},
                          {"delta", delta},
                          {"aggregation", "max_over_labels"},
                          {"features", std::move(features)}};
}

} // namespace ebco

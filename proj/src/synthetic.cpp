#include "ebco/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ebco/errors.hpp"
#include "ebco/rng.hpp"

namespace ebco {

namespace {

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n_planted > spec.n_features) {
        throw Error(errc::invalid_spec, "planted feature count " +
                                            std::to_string(spec.n_planted) +
                                            " exceeds feature count " +
                                            std::to_string(spec.n_features));
    }
    if (spec.n_samples < 10) {
        throw Error(errc::invalid_spec, "need at least 10 samples");
    }
    if (spec.n_features == 0 || spec.values_per_feature < 2 || spec.n_labels == 0) {
        throw Error(errc::invalid_spec, "need >= 1 feature, >= 2 values per feature, >= 1 label");
    }
    if (spec.p_match > 0.1 || spec.p_match <= 0.0) {
        throw Error(errc::invalid_spec, "p_match must be in (0, 0.1]");
    }
    if (spec.p_nomatch < 0.7 || spec.p_nomatch >= 1.0) {
        throw Error(errc::invalid_spec, "p_nomatch must be in [0.7, 1)");
    }
    if (spec.label_noise < 0.0) {
        throw Error(errc::invalid_spec, "label_noise must be >= 0");
    }
}

FeatureSchema make_schema(const SyntheticSpec& spec) {
    FeatureSchema schema;
    for (std::size_t i = 0; i < spec.n_features; ++i) {
        FeatureDef def;
        def.name = "f" + std::to_string(i + 1);
        def.kind = FeatureKind::categorical;
        for (std::size_t v = 0; v < spec.values_per_feature; ++v) {
            def.categories.push_back("v" + std::to_string(v + 1));
        }
        schema.features.push_back(std::move(def));
    }
    for (std::size_t l = 0; l < spec.n_labels; ++l) {
        schema.labels.push_back("y" + std::to_string(l + 1));
    }
    return schema;
}

} // namespace

std::pair<Dataset, PlantedTruth> generate_synthetic(const SyntheticSpec& spec,
                                                    std::uint64_t seed) {
    validate_spec(spec);
    FeatureSchema schema = make_schema(spec);
    Rng rng(seed);

    PlantedTruth truth;
    truth.p_match = spec.p_match;
    truth.p_nomatch = spec.p_nomatch;

    // Fixed draw order: planted assignment, per-label probabilities, then the
    // sample table row by row.
    if (spec.planted) {
        for (const auto& [name, value] : spec.planted->bindings) {
            const auto idx = schema.feature_index(name);
            if (!idx || !schema.features[*idx].contains(value)) {
                throw Error(errc::invalid_spec,
                            "planted binding '" + name + "' not valid for the generated schema");
            }
        }
        if (spec.planted->size() != spec.n_planted) {
            throw Error(errc::invalid_spec, "planted assignment size disagrees with n_planted");
        }
        truth.assignment = *spec.planted;
    } else {
        auto picked = rng.sample_without_replacement(spec.n_features, spec.n_planted);
        std::sort(picked.begin(), picked.end());
        for (std::size_t idx : picked) {
            const FeatureDef& def = schema.features[idx];
            truth.assignment.bindings[def.name] =
                def.categories[rng.index(def.categories.size())];
        }
    }

    const auto clamp = [](double p, double lo, double hi) {
        return std::min(hi, std::max(lo, p));
    };
    for (std::size_t l = 0; l < spec.n_labels; ++l) {
        const double jitter_lo = rng.uniform(-spec.label_noise, spec.label_noise);
        const double jitter_hi = rng.uniform(-spec.label_noise, spec.label_noise);
        truth.p_match_per_label.push_back(clamp(spec.p_match + jitter_lo, 0.005, 0.1));
        truth.p_nomatch_per_label.push_back(clamp(spec.p_nomatch + jitter_hi, 0.7, 0.995));
    }

    std::vector<std::size_t> planted_features;
    std::vector<std::size_t> planted_values;
    for (const auto& [name, value] : truth.assignment.bindings) {
        const auto idx = *schema.feature_index(name);
        const auto& cats = schema.features[idx].categories;
        planted_features.push_back(idx);
        planted_values.push_back(static_cast<std::size_t>(
            std::find(cats.begin(), cats.end(), std::get<std::string>(value)) - cats.begin()));
    }

    std::vector<std::vector<std::string>> raw(spec.n_samples);
    std::vector<std::vector<std::string>> labels(spec.n_samples);
    std::vector<std::size_t> row_values(spec.n_features);
    for (std::size_t r = 0; r < spec.n_samples; ++r) {
        raw[r].reserve(spec.n_features);
        for (std::size_t i = 0; i < spec.n_features; ++i) {
            row_values[i] = rng.index(spec.values_per_feature);
            raw[r].push_back(schema.features[i].categories[row_values[i]]);
        }
        bool match = true;
        for (std::size_t j = 0; j < planted_features.size(); ++j) {
            if (row_values[planted_features[j]] != planted_values[j]) {
                match = false;
                break;
            }
        }
        labels[r].reserve(spec.n_labels);
        for (std::size_t l = 0; l < spec.n_labels; ++l) {
            const double p = match ? truth.p_match_per_label[l] : truth.p_nomatch_per_label[l];
            labels[r].push_back(rng.bernoulli(p) ? "1" : "0");
        }
    }

    return {Dataset::from_rows(std::move(schema), std::move(raw), std::move(labels)),
            std::move(truth)};
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
    nlohmann::json j{{"n_features", spec.n_features},
                     {"values_per_feature", spec.values_per_feature},
                     {"n_labels", spec.n_labels},
                     {"n_samples", spec.n_samples},
                     {"n_planted", spec.n_planted},
                     {"p_match", spec.p_match},
                     {"p_nomatch", spec.p_nomatch},
                     {"label_noise", spec.label_noise}};
    if (spec.planted) {
        j["planted"] = assignment_to_json(*spec.planted);
    }
    return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    spec.n_features = j.value("n_features", spec.n_features);
    spec.values_per_feature = j.value("values_per_feature", spec.values_per_feature);
    spec.n_labels = j.value("n_labels", spec.n_labels);
    spec.n_samples = j.value("n_samples", spec.n_samples);
    spec.n_planted = j.value("n_planted", spec.n_planted);
    spec.p_match = j.value("p_match", spec.p_match);
    spec.p_nomatch = j.value("p_nomatch", spec.p_nomatch);
    spec.label_noise = j.value("label_noise", spec.label_noise);
    if (j.contains("planted")) {
        spec.planted = assignment_from_json(j.at("planted"));
    }
    return spec;
}

nlohmann::json planted_truth_to_json(const PlantedTruth& truth, const FeatureSchema& schema) {
    nlohmann::json per_match = nlohmann::json::object();
    nlohmann::json per_nomatch = nlohmann::json::object();
    for (std::size_t l = 0; l < schema.labels.size(); ++l) {
        per_match[schema.labels[l]] = truth.p_match_per_label[l];
        per_nomatch[schema.labels[l]] = truth.p_nomatch_per_label[l];
    }
    return nlohmann::json{{"assignment", assignment_to_json(truth.assignment)},
                          {"p_match", truth.p_match},
                          {"p_nomatch", truth.p_nomatch},
                          {"p_match_per_label", std::move(per_match)},
                          {"p_nomatch_per_label", std::move(per_nomatch)}};
}

} // namespace ebco

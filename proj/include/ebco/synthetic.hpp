#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <json.hpp>

#include "ebco/dataset.hpp"

namespace ebco {

// Shape of a generated benchmark dataset: categorical features f1..fn with
// values v1..vk, labels y1..yL. Labels are Bernoulli draws whose probability
// drops from p_nomatch to p_match when a sample matches the planted
// assignment on every planted feature.
struct SyntheticSpec {
    std::size_t n_features = 5;
    std::size_t values_per_feature = 3;
    std::size_t n_labels = 3;
    std::size_t n_samples = 500;
    std::size_t n_planted = 2;
    double p_match = 0.05;   // label probability when a sample matches the planted assignment
    double p_nomatch = 0.8;  // label probability otherwise
    double label_noise = 0.03;
    std::optional<Assignment> planted; // chosen from the seed when absent
};

struct PlantedTruth {
    Assignment assignment;
    double p_match = 0.0;
    double p_nomatch = 0.0;
    std::vector<double> p_match_per_label;
    std::vector<double> p_nomatch_per_label;
};

// Identical seed => bit-identical dataset, on any platform.
std::pair<Dataset, PlantedTruth> generate_synthetic(const SyntheticSpec& spec,
                                                    std::uint64_t seed);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json planted_truth_to_json(const PlantedTruth& truth,
                                     const FeatureSchema& schema);

} // namespace ebco

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebco/dataset.hpp"
#include "ebco/matrix.hpp"
#include "ebco/model.hpp"

namespace ebco {

// Background rows defining the "feature absent" condition: a coalition that
// excludes a feature takes that feature's columns from these rows.
struct ReferenceSet {
    Matrix rows; // r x p encoded
    std::uint64_t seed = 0;
};

// Drawn without replacement when count <= m, with replacement otherwise.
ReferenceSet sample_references(const Dataset& dataset, std::size_t count, std::uint64_t seed);

enum class AttributionMethod { exact, montecarlo, deepshap };

const char* attribution_method_name(AttributionMethod method);

// Per-(sample, original feature, label) contribution scores. One-hot column
// groups are always aggregated, so the feature axis has the schema's n
// entries regardless of the encoded width.
struct AttributionTensor {
    std::size_t samples = 0;
    std::size_t features = 0;
    std::size_t labels = 0;
    std::vector<double> values; // samples x features x labels, row-major
    AttributionMethod method = AttributionMethod::deepshap;
    std::vector<double> baseline; // per-label mean reference prediction
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;

    double& at(std::size_t s, std::size_t i, std::size_t l) {
        return values[(s * features + i) * labels + l];
    }
    double at(std::size_t s, std::size_t i, std::size_t l) const {
        return values[(s * features + i) * labels + l];
    }
};

// Exact Shapley values of one encoded row, per feature and label. The value
// v(S) of a coalition S is the mean prediction over reference rows with the
// coalition's feature columns taken from x. Cost grows as 2^n * refs, hence
// the feature-count guard.
Matrix shapley_exact(const MlpModel& model, std::span<const double> x,
                     const ReferenceSet& refs, std::size_t exact_limit = 12);

// Permutation-sampling estimator of the same quantity; marginals are averaged
// over every reference row, so it is unbiased for shapley_exact and collapses
// to it when only one permutation exists.
Matrix shapley_montecarlo(const MlpModel& model, std::span<const double> x,
                          const ReferenceSet& refs, std::size_t permutations,
                          std::uint64_t seed);

// DeepLIFT rescale rule against a single reference row: linear layers pass
// multipliers through their weights, nonlinear units use the secant slope
// (delta-out / delta-in) with a derivative fallback inside |delta| <= 1e-7.
// Returns per-feature contributions m_i * (x_i - ref_i), one-hot groups summed.
Matrix deeplift_multipliers(const MlpModel& model, std::span<const double> x,
                            std::span<const double> ref);

// DeepLIFT contributions averaged over the reference set, for many rows.
AttributionTensor deepshap_attribute(const MlpModel& model, const Matrix& rows,
                                     const ReferenceSet& refs);

struct AttributionOptions {
    AttributionMethod method = AttributionMethod::deepshap;
    std::size_t exact_limit = 12;
    std::size_t mc_permutations = 2000;
    std::uint64_t mc_seed = 0;
    // Diagnostic scale: attribute the output logit instead of the sigmoid
    // probability.
    bool logit_scale = false;
};

// Attribution tensor for every dataset row with the chosen method.
AttributionTensor attribute_dataset(const MlpModel& model, const Dataset& dataset,
                                    const ReferenceSet& refs,
                                    const AttributionOptions& options = {});

void write_attribution_csv(const AttributionTensor& tensor, const std::string& path);
nlohmann::json attribution_to_json(const AttributionTensor& tensor);

} // namespace ebco

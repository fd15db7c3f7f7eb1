#include "ebco/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "ebco/errors.hpp"
#include "ebco/parallel.hpp"
#include "ebco/rng.hpp"

namespace ebco {

namespace {

constexpr double kRescaleEpsilon = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean prediction over a batch, as an L-vector.
std::vector<double> mean_predict(const MlpModel& model, const Matrix& rows) {
    const Matrix scores = predict(model, rows);
    std::vector<double> mean(model.label_count(), 0.0);
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        for (std::size_t l = 0; l < mean.size(); ++l) mean[l] += scores(r, l);
    }
    for (double& v : mean) v /= static_cast<double>(scores.rows());
    return mean;
}

// Overwrite one feature's encoded column group in every row of `hybrid`.
void splice_feature(Matrix& hybrid, const FeatureEncoding& fe, std::span<const double> x) {
    for (std::size_t r = 0; r < hybrid.rows(); ++r) {
        auto row = hybrid.row(r);
        for (std::size_t c = 0; c < fe.width; ++c) row[fe.offset + c] = x[fe.offset + c];
    }
}

} // namespace

const char* attribution_method_name(AttributionMethod method) {
    switch (method) {
        case AttributionMethod::exact: return "exact";
        case AttributionMethod::montecarlo: return "montecarlo";
        case AttributionMethod::deepshap: return "deepshap";
    }
    return "unknown";
}

ReferenceSet sample_references(const Dataset& dataset, std::size_t count, std::uint64_t seed) {
    if (count == 0) {
        throw Error(errc::bad_config, "reference set must hold at least one row");
    }
    const std::size_t m = dataset.sample_count();
    Rng rng(seed);
    std::vector<std::size_t> indices;
    if (count <= m) {
        indices = rng.sample_without_replacement(m, count);
        std::sort(indices.begin(), indices.end());
    } else {
        indices.resize(count);
        for (auto& idx : indices) idx = rng.index(m);
    }
    ReferenceSet refs;
    refs.seed = seed;
    refs.rows = Matrix(count, dataset.encoded_width());
    for (std::size_t r = 0; r < count; ++r) {
        const auto src = dataset.encoded().row(indices[r]);
        std::copy(src.begin(), src.end(), refs.rows.row(r).begin());
    }
    return refs;
}

Matrix shapley_exact(const MlpModel& model, std::span<const double> x,
                     const ReferenceSet& refs, std::size_t exact_limit) {
    const std::size_t n = model.encoding.features.size();
    const std::size_t labels = model.label_count();
    if (n > exact_limit) {
        throw Error(errc::too_many_features,
                    std::to_string(n) + " features exceed the exact limit of " +
                        std::to_string(exact_limit));
    }
    if (x.size() != model.input_width()) {
        throw Error(errc::dimension_mismatch, "shapley_exact row width mismatch");
    }
    refs.rows.check_cols(model.input_width(), "shapley_exact references");

    // Coalition values v(S) for every subset mask: mean prediction over the
    // reference rows with the coalition's columns spliced in from x.
    const std::size_t n_masks = std::size_t{1} << n;
    std::vector<std::vector<double>> value(n_masks);
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        Matrix hybrid = refs.rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                splice_feature(hybrid, model.encoding.features[i], x);
            }
        }
        value[mask] = mean_predict(model, hybrid);
    }

    std::vector<double> factorial(n + 1, 1.0);
    for (std::size_t k = 1; k <= n; ++k) {
        factorial[k] = factorial[k - 1] * static_cast<double>(k);
    }

    Matrix phi(n, labels);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto size = static_cast<std::size_t>(std::popcount(mask));
            const double weight =
                factorial[size] * factorial[n - size - 1] / factorial[n];
            const auto& without = value[mask];
            const auto& with = value[mask | bit];
            for (std::size_t l = 0; l < labels; ++l) {
                phi(i, l) += weight * (with[l] - without[l]);
            }
        }
    }
    return phi;
}

Matrix shapley_montecarlo(const MlpModel& model, std::span<const double> x,
                          const ReferenceSet& refs, std::size_t permutations,
                          std::uint64_t seed) {
    if (permutations == 0) {
        throw Error(errc::bad_config, "need at least one permutation");
    }
    const std::size_t n = model.encoding.features.size();
    const std::size_t labels = model.label_count();
    if (n == 1) {
        // Only one permutation exists; the estimator is the exact value.
        return shapley_exact(model, x, refs, 1);
    }
    if (x.size() != model.input_width()) {
        throw Error(errc::dimension_mismatch, "shapley_montecarlo row width mismatch");
    }

    Rng rng(seed);
    std::vector<std::size_t> order(n);
    Matrix phi(n, labels);
    for (std::size_t t = 0; t < permutations; ++t) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        Matrix hybrid = refs.rows;
        std::vector<double> previous = mean_predict(model, hybrid);
        for (std::size_t i : order) {
            splice_feature(hybrid, model.encoding.features[i], x);
            std::vector<double> current = mean_predict(model, hybrid);
            for (std::size_t l = 0; l < labels; ++l) {
                phi(i, l) += current[l] - previous[l];
            }
            previous = std::move(current);
        }
    }
    for (double& v : phi.data()) v /= static_cast<double>(permutations);
    return phi;
}

Matrix deeplift_multipliers(const MlpModel& model, std::span<const double> x,
                            std::span<const double> ref) {
    const std::size_t p = model.input_width();
    const std::size_t h = model.hidden_size();
    const std::size_t labels = model.label_count();
    if (x.size() != p || ref.size() != p) {
        throw Error(errc::dimension_mismatch, "deeplift_multipliers row width mismatch");
    }

    // Forward both rows, keeping pre-activation values.
    std::vector<double> z1(h), z1_ref(h);
    for (std::size_t k = 0; k < h; ++k) {
        z1[k] = model.b1[k];
        z1_ref[k] = model.b1[k];
    }
    for (std::size_t j = 0; j < p; ++j) {
        const auto w = model.w1.row(j);
        for (std::size_t k = 0; k < h; ++k) {
            z1[k] += x[j] * w[k];
            z1_ref[k] += ref[j] * w[k];
        }
    }
    std::vector<double> a1(h), a1_ref(h), relu_mult(h);
    for (std::size_t k = 0; k < h; ++k) {
        a1[k] = std::max(z1[k], 0.0);
        a1_ref[k] = std::max(z1_ref[k], 0.0);
        const double dz = z1[k] - z1_ref[k];
        relu_mult[k] = std::abs(dz) > kRescaleEpsilon ? (a1[k] - a1_ref[k]) / dz
                                                      : (z1[k] > 0.0 ? 1.0 : 0.0);
    }
    std::vector<double> z2(labels), z2_ref(labels);
    for (std::size_t l = 0; l < labels; ++l) {
        z2[l] = model.b2[l];
        z2_ref[l] = model.b2[l];
    }
    for (std::size_t k = 0; k < h; ++k) {
        const auto w = model.w2.row(k);
        for (std::size_t l = 0; l < labels; ++l) {
            z2[l] += a1[k] * w[l];
            z2_ref[l] += a1_ref[k] * w[l];
        }
    }
    std::vector<double> out_mult(labels, 1.0);
    if (model.output_activation == OutputActivation::sigmoid) {
        for (std::size_t l = 0; l < labels; ++l) {
            const double dz = z2[l] - z2_ref[l];
            const double s = sigmoid(z2[l]);
            out_mult[l] = std::abs(dz) > kRescaleEpsilon
                              ? (s - sigmoid(z2_ref[l])) / dz
                              : s * (1.0 - s);
        }
    }

    // back(k, l) = relu_mult_k * w2(k, l) * out_mult_l; input multiplier is W1 * back.
    Matrix back(h, labels);
    for (std::size_t k = 0; k < h; ++k) {
        for (std::size_t l = 0; l < labels; ++l) {
            back(k, l) = relu_mult[k] * model.w2(k, l) * out_mult[l];
        }
    }
    const std::size_t n = model.encoding.features.size();
    Matrix contributions(n, labels);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureEncoding& fe = model.encoding.features[i];
        for (std::size_t c = 0; c < fe.width; ++c) {
            const std::size_t j = fe.offset + c;
            const double dx = x[j] - ref[j];
            if (dx == 0.0) continue;
            const auto w = model.w1.row(j);
            for (std::size_t l = 0; l < labels; ++l) {
                double mult = 0.0;
                for (std::size_t k = 0; k < h; ++k) mult += w[k] * back(k, l);
                contributions(i, l) += mult * dx;
            }
        }
    }
    return contributions;
}

AttributionTensor deepshap_attribute(const MlpModel& model, const Matrix& rows,
                                     const ReferenceSet& refs) {
    rows.check_cols(model.input_width(), "deepshap_attribute rows");
    refs.rows.check_cols(model.input_width(), "deepshap_attribute references");
    const std::size_t n = model.encoding.features.size();
    const std::size_t labels = model.label_count();
    const std::size_t r = refs.rows.rows();

    AttributionTensor tensor;
    tensor.samples = rows.rows();
    tensor.features = n;
    tensor.labels = labels;
    tensor.method = AttributionMethod::deepshap;
    tensor.values.assign(tensor.samples * n * labels, 0.0);
    tensor.baseline = mean_predict(model, refs.rows);
    for (const auto& fe : model.encoding.features) tensor.feature_names.push_back(fe.name);

    parallel_for(tensor.samples, [&](std::size_t s) {
        Matrix acc(n, labels);
        for (std::size_t q = 0; q < r; ++q) {
            const Matrix one = deeplift_multipliers(model, rows.row(s), refs.rows.row(q));
            for (std::size_t i = 0; i < acc.data().size(); ++i) {
                acc.data()[i] += one.data()[i];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < labels; ++l) {
                tensor.at(s, i, l) = acc(i, l) / static_cast<double>(r);
            }
        }
    });
    return tensor;
}

AttributionTensor attribute_dataset(const MlpModel& base_model, const Dataset& dataset,
                                    const ReferenceSet& refs,
                                    const AttributionOptions& options) {
    MlpModel model = base_model;
    if (options.logit_scale) model.output_activation = OutputActivation::identity;
    AttributionTensor tensor;
    if (options.method == AttributionMethod::deepshap) {
        tensor = deepshap_attribute(model, dataset.encoded(), refs);
    } else {
        const std::size_t n = model.encoding.features.size();
        const std::size_t labels = model.label_count();
        tensor.samples = dataset.sample_count();
        tensor.features = n;
        tensor.labels = labels;
        tensor.method = options.method;
        tensor.values.assign(tensor.samples * n * labels, 0.0);
        tensor.baseline = mean_predict(model, refs.rows);
        for (const auto& fe : model.encoding.features) tensor.feature_names.push_back(fe.name);
        parallel_for(tensor.samples, [&](std::size_t s) {
            const Matrix phi =
                options.method == AttributionMethod::exact
                    ? shapley_exact(model, dataset.encoded().row(s), refs, options.exact_limit)
                    : shapley_montecarlo(model, dataset.encoded().row(s), refs,
                                         options.mc_permutations,
                                         options.mc_seed + 0x9e3779b97f4a7c15ULL * s);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t l = 0; l < labels; ++l) tensor.at(s, i, l) = phi(i, l);
            }
        });
    }
    tensor.label_names = dataset.schema().labels;
    return tensor;
}

void write_attribution_csv(const AttributionTensor& tensor, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw Error(errc::io_error, "cannot write '" + path + "'");
    }
    file << "sample,feature,label,value\n";
    char buf[64];
    for (std::size_t s = 0; s < tensor.samples; ++s) {
        for (std::size_t i = 0; i < tensor.features; ++i) {
            for (std::size_t l = 0; l < tensor.labels; ++l) {
                const int len = std::snprintf(buf, sizeof(buf), "%.17g", tensor.at(s, i, l));
                file << s << ',' << tensor.feature_names[i] << ',' << tensor.label_names[l]
                     << ',' << std::string_view(buf, static_cast<std::size_t>(len)) << '\n';
            }
        }
    }
    if (!file.good()) {
        throw Error(errc::io_error, "failed while writing '" + path + "'");
    }
}

nlohmann::json attribution_to_json(const AttributionTensor& tensor) {
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t s = 0; s < tensor.samples; ++s) {
        nlohmann::json per_feature = nlohmann::json::array();
        for (std::size_t i = 0; i < tensor.features; ++i) {
            nlohmann::json per_label = nlohmann::json::array();
            for (std::size_t l = 0; l < tensor.labels; ++l) {
                per_label.push_back(tensor.at(s, i, l));
            }
            per_feature.push_back(std::move(per_label));
        }
        values.push_back(std::move(per_feature));
    }
    return nlohmann::json{{"spec_version", "1.0.0"},
                          {"method", attribution_method_name(tensor.method)},
                          {"feature_names", tensor.feature_names},
                          {"label_names", tensor.label_names},
                          {"baseline", tensor.baseline},
                          {"values", std::move(values)}};
}

} // namespace ebco

#pragma once

// Builders shared by the test suites: hand-weighted models, random models,
// and encodings detached from any dataset.

#include <vector>

#include "ebco/attribution.hpp"
#include "ebco/dataset.hpp"
#include "ebco/model.hpp"
#include "ebco/pruning.hpp"
#include "ebco/rng.hpp"

namespace ebco::testing {

// p independent numeric features, one encoded column each.
inline EncodingMap numeric_encoding(std::size_t p) {
    EncodingMap map;
    map.width = p;
    for (std::size_t j = 0; j < p; ++j) {
        FeatureEncoding fe;
        fe.name = "f" + std::to_string(j + 1);
        fe.offset = j;
        fe.width = 1;
        fe.kind = FeatureKind::numeric;
        fe.mean = 0.0;
        fe.stddev = 1.0;
        map.features.push_back(std::move(fe));
    }
    return map;
}

inline MlpModel make_model(Matrix w1, std::vector<double> b1, Matrix w2,
                           std::vector<double> b2, EncodingMap encoding,
                           OutputActivation activation = OutputActivation::sigmoid) {
    MlpModel model;
    model.w1 = std::move(w1);
    model.b1 = std::move(b1);
    model.w2 = std::move(w2);
    model.b2 = std::move(b2);
    model.encoding = std::move(encoding);
    model.output_activation = activation;
    return model;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo,
                            double hi) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

inline MlpModel random_model(Rng& rng, EncodingMap encoding, std::size_t hidden,
                             std::size_t labels, double scale = 1.0,
                             OutputActivation activation = OutputActivation::sigmoid) {
    const std::size_t p = encoding.width;
    MlpModel model = make_model(random_matrix(rng, p, hidden, -scale, scale),
                                std::vector<double>(hidden, 0.0),
                                random_matrix(rng, hidden, labels, -scale, scale),
                                std::vector<double>(labels, 0.0), std::move(encoding),
                                activation);
    for (double& b : model.b1) b = rng.uniform(-scale, scale);
    for (double& b : model.b2) b = rng.uniform(-scale, scale);
    return model;
}

// Pruned-domain view that keeps every candidate, for beam/oracle equivalence
// checks over identical spaces.
inline std::vector<PrunedDomain> keep_all(const std::vector<ValueDomain>& domains) {
    std::vector<PrunedDomain> pruned;
    for (const auto& domain : domains) {
        PrunedDomain pd;
        pd.feature = domain.feature;
        for (const auto& value : domain.candidates) {
            pd.kept.push_back(ScoredValue{value, {}, 0.0});
        }
        pruned.push_back(std::move(pd));
    }
    return pruned;
}

// Exactly linear network f(x) = x W + c on inputs with |x_j| < shift: the
// identity first layer is lifted by `shift` so every relu stays active, and
// the lift is cancelled in the output bias.
inline MlpModel linear_model(const Matrix& weights, const std::vector<double>& bias,
                             EncodingMap encoding, double shift = 100.0,
                             OutputActivation activation = OutputActivation::identity) {
    const std::size_t p = weights.rows();
    const std::size_t labels = weights.cols();
    Matrix w1(p, p);
    for (std::size_t j = 0; j < p; ++j) w1(j, j) = 1.0;
    std::vector<double> b1(p, shift);
    std::vector<double> b2(labels);
    for (std::size_t l = 0; l < labels; ++l) {
        double lift = 0.0;
        for (std::size_t j = 0; j < p; ++j) lift += weights(j, l);
        b2[l] = bias[l] - shift * lift;
    }
    return make_model(w1, std::move(b1), weights, std::move(b2), std::move(encoding),
                      activation);
}

} // namespace ebco::testing

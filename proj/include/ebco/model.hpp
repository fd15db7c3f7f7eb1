#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "ebco/dataset.hpp"
#include "ebco/matrix.hpp"

namespace ebco {

enum class OutputActivation { sigmoid, identity };

struct TrainConfig {
    std::size_t hidden = 30;
    std::size_t epochs = 2000;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    double holdout_fraction = 0.0; // > 0 trains on the remainder; accuracy reported only
};

struct TrainMeta {
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double holdout_accuracy = -1.0; // -1 when no holdout was requested
};

// One-hidden-layer multi-label network: sigmoid(relu(x W1 + b1) W2 + b2).
// Immutable after training. The identity output activation exists for
// linear-equivalence checks of the attribution code, not for training.
struct MlpModel {
    Matrix w1;              // p x h
    std::vector<double> b1; // h
    Matrix w2;              // h x L
    std::vector<double> b2; // L
    OutputActivation output_activation = OutputActivation::sigmoid;
    EncodingMap encoding;
    TrainMeta train_meta;

    std::size_t input_width() const { return w1.rows(); }
    std::size_t hidden_size() const { return w1.cols(); }
    std::size_t label_count() const { return w2.cols(); }
};

// Full-batch gradient descent on mean per-label binary cross-entropy.
// Deterministic for a fixed seed. Throws NonFiniteLoss on divergence.
MlpModel train(const Dataset& dataset, const TrainConfig& config);

std::vector<double> predict_row(const MlpModel& model, std::span<const double> row);
Matrix predict(const MlpModel& model, const Matrix& rows); // s x L

// Per-label mean of predict over apply_assignment(dataset, assignment).
std::vector<double> mean_prediction(const MlpModel& model, const Dataset& dataset,
                                    const Assignment& assignment);

// Training objective and its analytic gradients, exposed so the gradient
// check can compare them against finite differences.
double bce_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets);

struct LossGradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
    double loss = 0.0;
};

LossGradients bce_gradients(const MlpModel& model, const Matrix& inputs,
                            const Matrix& targets);

nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);

} // namespace ebco

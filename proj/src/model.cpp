#include "ebco/model.hpp"

#include <algorithm>
#include <cmath>

#include "ebco/errors.hpp"
#include "ebco/rng.hpp"

namespace ebco {

namespace {

constexpr const char* kModelVersion = "1.0.0";

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Stable binary cross-entropy from the logit z: max(z,0) - z*t + log1p(exp(-|z|)).
double bce_from_logit(double z, double t) {
    return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
}

// Hidden activations and output logits for a batch.
void forward(const MlpModel& model, const Matrix& inputs, Matrix& hidden, Matrix& logits) {
    const std::size_t m = inputs.rows();
    const std::size_t p = model.input_width();
    const std::size_t h = model.hidden_size();
    const std::size_t labels = model.label_count();
    hidden = Matrix(m, h);
    logits = Matrix(m, labels);
    for (std::size_t r = 0; r < m; ++r) {
        const auto x = inputs.row(r);
        auto a1 = hidden.row(r);
        for (std::size_t k = 0; k < h; ++k) a1[k] = model.b1[k];
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = x[j];
            if (xj == 0.0) continue;
            const auto w = model.w1.row(j);
            for (std::size_t k = 0; k < h; ++k) a1[k] += xj * w[k];
        }
        for (std::size_t k = 0; k < h; ++k) a1[k] = std::max(a1[k], 0.0);
        auto z2 = logits.row(r);
        for (std::size_t l = 0; l < labels; ++l) z2[l] = model.b2[l];
        for (std::size_t k = 0; k < h; ++k) {
            const double ak = a1[k];
            if (ak == 0.0) continue;
            const auto w = model.w2.row(k);
            for (std::size_t l = 0; l < labels; ++l) z2[l] += ak * w[l];
        }
    }
}

Matrix rows_subset(const Matrix& source, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), source.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = source.row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

} // namespace

double bce_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets) {
    inputs.check_cols(model.input_width(), "bce_loss inputs");
    Matrix hidden, logits;
    forward(model, inputs, hidden, logits);
    double total = 0.0;
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
        for (std::size_t l = 0; l < model.label_count(); ++l) {
            total += bce_from_logit(logits(r, l), targets(r, l));
        }
    }
    return total / static_cast<double>(inputs.rows() * model.label_count());
}

LossGradients bce_gradients(const MlpModel& model, const Matrix& inputs,
                            const Matrix& targets) {
    inputs.check_cols(model.input_width(), "bce_gradients inputs");
    const std::size_t m = inputs.rows();
    const std::size_t p = model.input_width();
    const std::size_t h = model.hidden_size();
    const std::size_t labels = model.label_count();

    Matrix hidden, logits;
    forward(model, inputs, hidden, logits);

    LossGradients g;
    g.w1 = Matrix(p, h);
    g.b1.assign(h, 0.0);
    g.w2 = Matrix(h, labels);
    g.b2.assign(labels, 0.0);

    const double scale = 1.0 / static_cast<double>(m * labels);
    std::vector<double> dz2(labels);
    std::vector<double> dz1(h);
    for (std::size_t r = 0; r < m; ++r) {
        double loss_row = 0.0;
        for (std::size_t l = 0; l < labels; ++l) {
            const double z = logits(r, l);
            const double t = targets(r, l);
            loss_row += bce_from_logit(z, t);
            dz2[l] = (sigmoid(z) - t) * scale;
        }
        g.loss += loss_row;
        const auto a1 = hidden.row(r);
        for (std::size_t k = 0; k < h; ++k) {
            const double ak = a1[k];
            auto gw2 = g.w2.row(k);
            const auto w2 = model.w2.row(k);
            double da = 0.0;
            for (std::size_t l = 0; l < labels; ++l) {
                gw2[l] += ak * dz2[l];
                da += dz2[l] * w2[l];
            }
            dz1[k] = ak > 0.0 ? da : 0.0; // relu gate
        }
        for (std::size_t l = 0; l < labels; ++l) g.b2[l] += dz2[l];
        const auto x = inputs.row(r);
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = x[j];
            if (xj == 0.0) continue;
            auto gw1 = g.w1.row(j);
            for (std::size_t k = 0; k < h; ++k) gw1[k] += xj * dz1[k];
        }
        for (std::size_t k = 0; k < h; ++k) g.b1[k] += dz1[k];
    }
    g.loss *= scale;
    return g;
}

MlpModel train(const Dataset& dataset, const TrainConfig& config) {
    const std::size_t m = dataset.sample_count();
    const std::size_t p = dataset.encoded_width();
    const std::size_t labels = dataset.label_count();
    const std::size_t h = config.hidden;
    if (m == 0) {
        throw Error(errc::empty_dataset, "cannot train on an empty dataset");
    }
    if (h == 0 || config.learning_rate <= 0.0) {
        throw Error(errc::bad_config, "hidden size and learning rate must be positive");
    }

    // Optional holdout split, drawn from its own stream so the weight
    // initialization is unchanged by the flag.
    Matrix train_x = dataset.encoded();
    Matrix train_t = dataset.targets();
    std::vector<std::size_t> holdout;
    if (config.holdout_fraction > 0.0) {
        const auto held = static_cast<std::size_t>(config.holdout_fraction *
                                                   static_cast<double>(m));
        if (held > 0 && held < m) {
            Rng split_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
            auto order = split_rng.sample_without_replacement(m, m);
            holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
            std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(held),
                                          order.end());
            std::sort(kept.begin(), kept.end());
            train_x = rows_subset(dataset.encoded(), kept);
            train_t = rows_subset(dataset.targets(), kept);
        }
    }

    MlpModel model;
    model.w1 = Matrix(p, h);
    model.b1.assign(h, 0.0);
    model.w2 = Matrix(h, labels);
    model.b2.assign(labels, 0.0);
    model.encoding = dataset.encoding();
    model.output_activation = OutputActivation::sigmoid;

    Rng rng(config.seed);
    const double r1 = std::sqrt(6.0 / static_cast<double>(p + h));
    for (double& w : model.w1.data()) w = rng.uniform(-r1, r1);
    const double r2 = std::sqrt(6.0 / static_cast<double>(h + labels));
    for (double& w : model.w2.data()) w = rng.uniform(-r2, r2);

    double initial_loss = 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        LossGradients g = bce_gradients(model, train_x, train_t);
        if (!std::isfinite(g.loss)) {
            throw Error(errc::non_finite_loss,
                        "training loss diverged at epoch " + std::to_string(epoch));
        }
        if (epoch == 0) initial_loss = g.loss;
        const double lr = config.learning_rate;
        for (std::size_t i = 0; i < model.w1.data().size(); ++i) {
            model.w1.data()[i] -= lr * g.w1.data()[i];
        }
        for (std::size_t k = 0; k < h; ++k) model.b1[k] -= lr * g.b1[k];
        for (std::size_t i = 0; i < model.w2.data().size(); ++i) {
            model.w2.data()[i] -= lr * g.w2.data()[i];
        }
        for (std::size_t l = 0; l < labels; ++l) model.b2[l] -= lr * g.b2[l];
    }

    const double final_loss = bce_loss(model, train_x, train_t);
    if (config.epochs == 0) initial_loss = final_loss;
    if (!std::isfinite(final_loss)) {
        throw Error(errc::non_finite_loss,
                    "training loss diverged at epoch " + std::to_string(config.epochs));
    }

    model.train_meta.seed = config.seed;
    model.train_meta.epochs = config.epochs;
    model.train_meta.learning_rate = config.learning_rate;
    model.train_meta.initial_loss = initial_loss;
    model.train_meta.final_loss = final_loss;

    if (!holdout.empty()) {
        const Matrix held_x = rows_subset(dataset.encoded(), holdout);
        const Matrix held_t = rows_subset(dataset.targets(), holdout);
        const Matrix scores = predict(model, held_x);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < held_x.rows(); ++r) {
            for (std::size_t l = 0; l < labels; ++l) {
                if ((scores(r, l) >= 0.5) == (held_t(r, l) >= 0.5)) ++correct;
            }
        }
        model.train_meta.holdout_accuracy =
            static_cast<double>(correct) / static_cast<double>(holdout.size() * labels);
    }
    return model;
}

std::vector<double> predict_row(const MlpModel& model, std::span<const double> row) {
    if (row.size() != model.input_width()) {
        throw Error(errc::dimension_mismatch,
                    "predict_row: expected width " + std::to_string(model.input_width()) +
                        ", got " + std::to_string(row.size()));
    }
    Matrix one(1, row.size());
    std::copy(row.begin(), row.end(), one.row(0).begin());
    Matrix hidden, logits;
    forward(model, one, hidden, logits);
    std::vector<double> out(model.label_count());
    for (std::size_t l = 0; l < out.size(); ++l) {
        out[l] = model.output_activation == OutputActivation::sigmoid ? sigmoid(logits(0, l))
                                                                      : logits(0, l);
    }
    return out;
}

Matrix predict(const MlpModel& model, const Matrix& rows) {
    rows.check_cols(model.input_width(), "predict inputs");
    Matrix hidden, logits;
    forward(model, rows, hidden, logits);
    if (model.output_activation == OutputActivation::sigmoid) {
        for (double& z : logits.data()) z = sigmoid(z);
    }
    return logits;
}

std::vector<double> mean_prediction(const MlpModel& model, const Dataset& dataset,
                                    const Assignment& assignment) {
    const Matrix scores = assignment.empty()
                              ? predict(model, dataset.encoded())
                              : predict(model, apply_assignment(dataset, assignment).encoded());
    std::vector<double> mean(model.label_count(), 0.0);
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        for (std::size_t l = 0; l < mean.size(); ++l) mean[l] += scores(r, l);
    }
    for (double& v : mean) v /= static_cast<double>(scores.rows());
    return mean;
}

nlohmann::json model_to_json(const MlpModel& model) {
    nlohmann::json jfeatures = nlohmann::json::array();
    for (const auto& fe : model.encoding.features) {
        nlohmann::json jf{{"name", fe.name},
                          {"offset", fe.offset},
                          {"width", fe.width},
                          {"kind", fe.kind == FeatureKind::categorical ? "categorical" : "numeric"}};
        if (fe.kind == FeatureKind::categorical) {
            jf["categories"] = fe.categories;
        } else {
            jf["mean"] = fe.mean;
            jf["stddev"] = fe.stddev;
            jf["constant"] = fe.constant;
        }
        jfeatures.push_back(std::move(jf));
    }
    return nlohmann::json{
        {"spec_version", kModelVersion},
        {"kind", "mlp"},
        {"input_width", model.input_width()},
        {"hidden", model.hidden_size()},
        {"labels", model.label_count()},
        {"hidden_activation", "relu"},
        {"output_activation",
         model.output_activation == OutputActivation::sigmoid ? "sigmoid" : "identity"},
        {"w1", model.w1.data()},
        {"b1", model.b1},
        {"w2", model.w2.data()},
        {"b2", model.b2},
        {"train_meta",
         {{"seed", model.train_meta.seed},
          {"epochs", model.train_meta.epochs},
          {"learning_rate", model.train_meta.learning_rate},
          {"initial_loss", model.train_meta.initial_loss},
          {"final_loss", model.train_meta.final_loss},
          {"holdout_accuracy", model.train_meta.holdout_accuracy}}},
        {"encoding", {{"width", model.encoding.width}, {"features", std::move(jfeatures)}}}};
}

MlpModel model_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "mlp") {
        throw Error(errc::bad_config, "model file is not an mlp document");
    }
    const auto p = j.at("input_width").get<std::size_t>();
    const auto h = j.at("hidden").get<std::size_t>();
    const auto labels = j.at("labels").get<std::size_t>();
    MlpModel model;
    model.w1 = Matrix(p, h);
    model.w1.data() = j.at("w1").get<std::vector<double>>();
    model.b1 = j.at("b1").get<std::vector<double>>();
    model.w2 = Matrix(h, labels);
    model.w2.data() = j.at("w2").get<std::vector<double>>();
    model.b2 = j.at("b2").get<std::vector<double>>();
    if (model.w1.data().size() != p * h || model.b1.size() != h ||
        model.w2.data().size() != h * labels || model.b2.size() != labels) {
        throw Error(errc::dimension_mismatch, "model weight arrays disagree with dimensions");
    }
    model.output_activation = j.value("output_activation", "sigmoid") == "identity"
                                  ? OutputActivation::identity
                                  : OutputActivation::sigmoid;
    const auto& jm = j.at("train_meta");
    model.train_meta.seed = jm.value("seed", 0ULL);
    model.train_meta.epochs = jm.value("epochs", 0ULL);
    model.train_meta.learning_rate = jm.value("learning_rate", 0.0);
    model.train_meta.initial_loss = jm.value("initial_loss", 0.0);
    model.train_meta.final_loss = jm.value("final_loss", 0.0);
    model.train_meta.holdout_accuracy = jm.value("holdout_accuracy", -1.0);

    const auto& jenc = j.at("encoding");
    model.encoding.width = jenc.at("width").get<std::size_t>();
    for (const auto& jf : jenc.at("features")) {
        FeatureEncoding fe;
        fe.name = jf.at("name").get<std::string>();
        fe.offset = jf.at("offset").get<std::size_t>();
        fe.width = jf.at("width").get<std::size_t>();
        if (jf.at("kind").get<std::string>() == "categorical") {
            fe.kind = FeatureKind::categorical;
            fe.categories = jf.at("categories").get<std::vector<std::string>>();
        } else {
            fe.kind = FeatureKind::numeric;
            fe.mean = jf.at("mean").get<double>();
            fe.stddev = jf.at("stddev").get<double>();
            fe.constant = jf.at("constant").get<bool>();
        }
        model.encoding.features.push_back(std::move(fe));
    }
    return model;
}

} // namespace ebco

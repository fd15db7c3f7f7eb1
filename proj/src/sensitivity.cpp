#include "ebco/sensitivity.hpp"

#include <cmath>

#include "ebco/errors.hpp"

namespace ebco {

namespace {

constexpr double kDegenerateVariance = 1e-12;

} // namespace

BasePredictionStats base_prediction_stats(const MlpModel& model, const Dataset& dataset) {
    BasePredictionStats base;
    base.predictions = predict(model, dataset.encoded());
    const std::size_t m = base.predictions.rows();
    const std::size_t labels = base.predictions.cols();
    base.mean.assign(labels, 0.0);
    base.variance.assign(labels, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t l = 0; l < labels; ++l) base.mean[l] += base.predictions(r, l);
    }
    for (double& v : base.mean) v /= static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t l = 0; l < labels; ++l) {
            const double d = base.predictions(r, l) - base.mean[l];
            base.variance[l] += d * d;
        }
    }
    for (double& v : base.variance) v /= static_cast<double>(m);
    return base;
}

SensitivityScore sensitivity_score(const MlpModel& model, const Dataset& dataset,
                                   const Assignment& assignment,
                                   const BasePredictionStats& base, bool zero_on_degenerate) {
    const std::size_t m = dataset.sample_count();
    const std::size_t labels = model.label_count();

    const Matrix assigned = assignment.empty()
                                ? base.predictions
                                : predict(model, apply_assignment(dataset, assignment).encoded());

    SensitivityScore score;
    score.assignment = assignment;
    score.upsilon.assign(labels, 0.0);
    score.lambda.assign(labels, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t l = 0; l < labels; ++l) score.lambda[l] += assigned(r, l);
    }
    for (double& v : score.lambda) v /= static_cast<double>(m);

    for (std::size_t l = 0; l < labels; ++l) {
        if (base.variance[l] <= kDegenerateVariance) {
            if (!zero_on_degenerate) {
                throw Error(errc::degenerate_variance,
                            "label index " + std::to_string(l) +
                                " has (near-)constant base predictions");
            }
            score.upsilon[l] = 0.0;
            continue;
        }
        double cov = 0.0;
        double var_assigned = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double da = assigned(r, l) - score.lambda[l];
            const double db = base.predictions(r, l) - base.mean[l];
            cov += da * db;
            var_assigned += da * da;
        }
        cov /= static_cast<double>(m);
        var_assigned /= static_cast<double>(m);
        score.upsilon[l] = cov / base.variance[l];

        // Cauchy-Schwarz bound |upsilon| <= sqrt(Var(p_c)/Var(p)), checked with
        // a little slack for rounding.
        const double bound = std::sqrt(var_assigned / base.variance[l]);
        if (std::abs(score.upsilon[l]) > bound * (1.0 + 1e-9) + 1e-12) {
            throw Error(errc::internal, "sensitivity ratio exceeded its variance bound");
        }
    }
    return score;
}

SensitivityScore sensitivity_score(const MlpModel& model, const Dataset& dataset,
                                   const Assignment& assignment) {
    const BasePredictionStats base = base_prediction_stats(model, dataset);
    return sensitivity_score(model, dataset, assignment, base, false);
}

} // namespace ebco

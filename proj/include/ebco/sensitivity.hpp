#pragma once

#include <vector>

#include "ebco/dataset.hpp"
#include "ebco/matrix.hpp"
#include "ebco/model.hpp"
#include "ebco/schema.hpp"

namespace ebco {

// Variance-based influence of a fixed assignment, per label:
// upsilon_l = Cov(p_c, p) / Var(p), where p are the original predictions and
// p_c the predictions after the assignment is applied to every sample.
// lambda_l is the mean of p_c. Population (1/m) normalization throughout.
struct SensitivityScore {
    std::vector<double> upsilon;
    std::vector<double> lambda;
    Assignment assignment;
};

// Predictions over the unmodified dataset plus per-label mean/variance,
// computed once and shared across many candidate scorings.
struct BasePredictionStats {
    Matrix predictions; // m x L
    std::vector<double> mean;
    std::vector<double> variance;
};

BasePredictionStats base_prediction_stats(const MlpModel& model, const Dataset& dataset);

// Throws DegenerateVariance if any label's base variance is <= 1e-12.
SensitivityScore sensitivity_score(const MlpModel& model, const Dataset& dataset,
                                   const Assignment& assignment);

// Variant used by the search: degenerate labels get upsilon 0 instead of an
// error, and the base statistics are reused across candidates.
SensitivityScore sensitivity_score(const MlpModel& model, const Dataset& dataset,
                                   const Assignment& assignment,
                                   const BasePredictionStats& base, bool zero_on_degenerate);

} // namespace ebco

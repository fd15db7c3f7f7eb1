#pragma once

#include <string>
#include <vector>

#include "ebco/attribution.hpp"
#include "ebco/dataset.hpp"
#include "ebco/model.hpp"
#include "ebco/pruning.hpp"
#include "ebco/schema.hpp"

namespace ebco {

enum class Direction { minimize, maximize };

// How the combined score treats per-label gammas at the threshold rho:
// as_written collapses every passing gamma to rho (the score counts passing
// objectives); passthrough keeps the gamma magnitude instead.
enum class GammaMode { as_written, passthrough };

enum class FeatureOrder { relevance, schema };

struct SearchConfig {
    double delta = 0.01;  // pruning threshold
    double omega = 0.5;   // prediction significance weight in [0,1]
    double rho = 0.5;     // penalization threshold >= 0
    std::size_t zeta = 5; // beam width >= 1
    std::vector<Direction> direction; // empty = minimize all; size 1 broadcasts
    FeatureOrder feature_order = FeatureOrder::relevance;
    GammaMode gamma_mode = GammaMode::as_written;
    std::size_t dp_capacity = 0;        // 0 = unbounded
    std::size_t oracle_limit = 100000;  // max assignments the oracle will enumerate
};

std::vector<Direction> resolve_directions(const SearchConfig& config, std::size_t labels);

// gamma_l = omega * (1 - lambda_l) + (1 - omega) * upsilon_l for minimized
// labels; maximized labels use lambda_l in place of (1 - lambda_l).
std::vector<double> selection_gamma(const std::vector<double>& lambda,
                                    const std::vector<double>& upsilon, double omega,
                                    const std::vector<Direction>& directions);

// Sum over labels of (0 if gamma_l < rho else rho) in as_written mode, or
// (0 if gamma_l < rho else gamma_l) in passthrough mode.
double penalized_score(const std::vector<double>& gamma, double rho, GammaMode mode);

// Mean over labels of the direction-adjusted prediction (1 - lambda for
// minimized labels, lambda for maximized ones). Higher is better; this is the
// DP baseline's objective and the axis of the method comparison.
double direction_adjusted_objective(const std::vector<double>& lambda,
                                    const std::vector<Direction>& directions);

struct Candidate {
    Assignment assignment;
    std::vector<double> gamma;
    std::vector<double> lambda;
    std::vector<double> upsilon;
    double big_gamma = 0.0;
};

struct IterationRecord {
    std::string feature;          // feature fixed at this iteration
    std::vector<Candidate> beam;  // retained candidates, best first
    std::vector<double> best_lambda; // per-label best over the beam
    double best_objective = 0.0;     // best objective over everything evaluated so far
    std::size_t evaluations = 0;     // cumulative candidate evaluations
};

struct SearchTrace {
    std::vector<IterationRecord> iterations;
    std::size_t total_evaluations = 0;
};

struct SearchResult {
    Candidate best;
    SearchTrace trace;
};

// Sequential beam search over pruned feature-value domains: each iteration
// fixes the next feature, scores every beam extension with sensitivity ->
// selection gamma -> penalized score, and keeps the top zeta candidates.
SearchResult ebco_search(const MlpModel& model, const Dataset& dataset,
                         const AttributionTensor& tensor,
                         const std::vector<PrunedDomain>& domains,
                         const SearchConfig& config);

// Stage-wise table over unpruned domains in schema order, scored by the mean
// direction-adjusted prediction alone. Unbounded by default; a configured
// capacity turns overflow into CapacityExceeded.
SearchResult dp_baseline(const MlpModel& model, const Dataset& dataset,
                         const std::vector<ValueDomain>& domains,
                         const SearchConfig& config);

// Enumerates every full assignment and scores it with the same machinery and
// tie-breaking as ebco_search.
Candidate exhaustive_oracle(const MlpModel& model, const Dataset& dataset,
                            const std::vector<ValueDomain>& domains,
                            const SearchConfig& config);

} // namespace ebco

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ebco/attribution.hpp"
#include "ebco/dataset.hpp"
#include "ebco/schema.hpp"

namespace ebco {

struct ScoredValue {
    Value value;
    std::vector<double> relevance; // per label
    double aggregate = 0.0;        // max over labels
};

// One feature's candidates after threshold pruning. kept and dropped
// partition the original domain; kept aggregates are all > delta unless the
// keep-one guard had to fire.
struct PrunedDomain {
    std::string feature;
    std::vector<ScoredValue> kept;
    std::vector<ScoredValue> dropped;
    bool keep_one_applied = false;
};

// Per-label relevance of one candidate value: mean |attribution| of the
// feature over the samples whose cell matches the value. Numeric cells match
// their nearest candidate on the quantile grid.
std::vector<double> value_relevance(const AttributionTensor& tensor, const Dataset& dataset,
                                    const ValueDomain& domain, const Value& value);

// Keeps a value iff its max-over-labels relevance exceeds delta. A feature
// whose domain would empty retains its single best value instead, flagged in
// the result.
std::vector<PrunedDomain> prune_values(const std::vector<ValueDomain>& domains,
                                       const AttributionTensor& tensor,
                                       const Dataset& dataset, double delta);

nlohmann::json pruning_audit_json(const std::vector<PrunedDomain>& pruned, double delta,
                                  const std::vector<std::string>& labels);

} // namespace ebco

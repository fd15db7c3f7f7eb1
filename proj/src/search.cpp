#include "ebco/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ebco/errors.hpp"
#include "ebco/parallel.hpp"
#include "ebco/sensitivity.hpp"

namespace ebco {

namespace {

void validate_config(const SearchConfig& config) {
    if (config.omega < 0.0 || config.omega > 1.0) {
        throw Error(errc::bad_config, "omega must lie in [0,1]");
    }
    if (config.rho < 0.0) {
        throw Error(errc::bad_config, "rho must be >= 0");
    }
    if (config.zeta == 0) {
        throw Error(errc::bad_config, "zeta must be >= 1");
    }
}

// Search state: the public candidate plus per-feature value indices keyed by
// feature name, the basis of lexicographic tie-breaking.
struct Node {
    Candidate cand;
    std::map<std::string, std::size_t> value_index;
};

bool lex_less(const Node& a, const Node& b) {
    return std::lexicographical_compare(
        a.value_index.begin(), a.value_index.end(), b.value_index.begin(),
        b.value_index.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first < y.first;
            return x.second < y.second;
        });
}

// Beam retention order: score first, then lexicographic assignment.
bool better_beam(const Node& a, const Node& b) {
    if (a.cand.big_gamma != b.cand.big_gamma) return a.cand.big_gamma > b.cand.big_gamma;
    return lex_less(a, b);
}

double mean_lambda_minimized(const Candidate& c, const std::vector<Direction>& directions) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t l = 0; l < directions.size(); ++l) {
        if (directions[l] == Direction::minimize) {
            sum += c.lambda[l];
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

// Final selection order: score, then lower mean prediction on minimized
// labels, then lexicographic assignment.
bool better_final(const Node& a, const Node& b, const std::vector<Direction>& directions) {
    if (a.cand.big_gamma != b.cand.big_gamma) return a.cand.big_gamma > b.cand.big_gamma;
    const double la = mean_lambda_minimized(a.cand, directions);
    const double lb = mean_lambda_minimized(b.cand, directions);
    if (la != lb) return la < lb;
    return lex_less(a, b);
}

Candidate score_gamma_candidate(const MlpModel& model, const Dataset& dataset,
                                const BasePredictionStats& base, Assignment assignment,
                                const SearchConfig& config,
                                const std::vector<Direction>& directions) {
    SensitivityScore sens = sensitivity_score(model, dataset, assignment, base, true);
    Candidate cand;
    cand.lambda = std::move(sens.lambda);
    cand.upsilon = std::move(sens.upsilon);
    cand.gamma = selection_gamma(cand.lambda, cand.upsilon, config.omega, directions);
    cand.big_gamma = penalized_score(cand.gamma, config.rho, config.gamma_mode);
    cand.assignment = std::move(assignment);
    return cand;
}

std::vector<double> beam_best_lambda(const std::vector<Node>& beam,
                                     const std::vector<Direction>& directions) {
    std::vector<double> best(directions.size());
    for (std::size_t l = 0; l < directions.size(); ++l) {
        double v = beam.front().cand.lambda[l];
        for (const Node& node : beam) {
            v = directions[l] == Direction::minimize ? std::min(v, node.cand.lambda[l])
                                                     : std::max(v, node.cand.lambda[l]);
        }
        best[l] = v;
    }
    return best;
}

} // namespace

std::vector<Direction> resolve_directions(const SearchConfig& config, std::size_t labels) {
    if (config.direction.empty()) {
        return std::vector<Direction>(labels, Direction::minimize);
    }
    if (config.direction.size() == 1) {
        return std::vector<Direction>(labels, config.direction.front());
    }
    if (config.direction.size() != labels) {
        throw Error(errc::bad_config, "direction list has " +
                                          std::to_string(config.direction.size()) +
                                          " entries for " + std::to_string(labels) + " labels");
    }
    return config.direction;
}

std::vector<double> selection_gamma(const std::vector<double>& lambda,
                                    const std::vector<double>& upsilon, double omega,
                                    const std::vector<Direction>& directions) {
    if (omega < 0.0 || omega > 1.0) {
        throw Error(errc::bad_config, "omega must lie in [0,1]");
    }
    if (lambda.size() != upsilon.size() || lambda.size() != directions.size()) {
        throw Error(errc::dimension_mismatch, "selection_gamma input lengths disagree");
    }
    std::vector<double> gamma(lambda.size());
    for (std::size_t l = 0; l < lambda.size(); ++l) {
        const double attainment =
            directions[l] == Direction::minimize ? 1.0 - lambda[l] : lambda[l];
        gamma[l] = omega * attainment + (1.0 - omega) * upsilon[l];
    }
    return gamma;
}

double penalized_score(const std::vector<double>& gamma, double rho, GammaMode mode) {
    if (rho < 0.0) {
        throw Error(errc::bad_config, "rho must be >= 0");
    }
    double total = 0.0;
    for (double g : gamma) {
        if (g < rho) continue;
        total += mode == GammaMode::as_written ? rho : g;
    }
    return total;
}

double direction_adjusted_objective(const std::vector<double>& lambda,
                                    const std::vector<Direction>& directions) {
    double sum = 0.0;
    for (std::size_t l = 0; l < lambda.size(); ++l) {
        sum += directions[l] == Direction::minimize ? 1.0 - lambda[l] : lambda[l];
    }
    return sum / static_cast<double>(lambda.size());
}

SearchResult ebco_search(const MlpModel& model, const Dataset& dataset,
                         const AttributionTensor& tensor,
                         const std::vector<PrunedDomain>& domains,
                         const SearchConfig& config) {
    validate_config(config);
    const std::vector<Direction> directions =
        resolve_directions(config, dataset.label_count());
    if (domains.empty()) {
        throw Error(errc::empty_domain, "no feature domains to search");
    }
    for (const auto& domain : domains) {
        if (domain.kept.empty()) {
            throw Error(errc::empty_domain,
                        "feature '" + domain.feature + "' has no kept values");
        }
    }

    // Feature iteration order: descending mean |attribution|, or schema order.
    std::vector<std::size_t> order(domains.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (config.feature_order == FeatureOrder::relevance) {
        std::vector<double> relevance(domains.size(), 0.0);
        for (std::size_t d = 0; d < domains.size(); ++d) {
            const auto it = std::find(tensor.feature_names.begin(), tensor.feature_names.end(),
                                      domains[d].feature);
            if (it == tensor.feature_names.end()) {
                throw Error(errc::unknown_feature, "feature '" + domains[d].feature +
                                                       "' missing from the attribution tensor");
            }
            const auto fi = static_cast<std::size_t>(it - tensor.feature_names.begin());
            double sum = 0.0;
            for (std::size_t s = 0; s < tensor.samples; ++s) {
                for (std::size_t l = 0; l < tensor.labels; ++l) {
                    sum += std::abs(tensor.at(s, fi, l));
                }
            }
            relevance[d] = sum / static_cast<double>(tensor.samples * tensor.labels);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return relevance[a] > relevance[b];
        });
    }

    const BasePredictionStats base = base_prediction_stats(model, dataset);

    SearchResult result;
    std::vector<Node> beam(1); // the empty assignment
    std::size_t evaluations = 0;
    double best_objective = 0.0;
    bool have_objective = false;
    for (std::size_t step = 0; step < order.size(); ++step) {
        const PrunedDomain& domain = domains[order[step]];
        const std::size_t values = domain.kept.size();
        std::vector<Node> extensions(beam.size() * values);
        parallel_for(extensions.size(), [&](std::size_t e) {
            const Node& parent = beam[e / values];
            const std::size_t v = e % values;
            Assignment assignment = parent.cand.assignment;
            assignment.bindings[domain.feature] = domain.kept[v].value;
            Node node;
            node.cand = score_gamma_candidate(model, dataset, base, std::move(assignment),
                                              config, directions);
            node.value_index = parent.value_index;
            node.value_index[domain.feature] = v;
            extensions[e] = std::move(node);
        });
        evaluations += extensions.size();
        for (const Node& node : extensions) {
            const double obj = direction_adjusted_objective(node.cand.lambda, directions);
            if (!have_objective || obj > best_objective) {
                best_objective = obj;
                have_objective = true;
            }
        }
        std::sort(extensions.begin(), extensions.end(), better_beam);
        if (extensions.size() > config.zeta) extensions.resize(config.zeta);
        beam = std::move(extensions);

        IterationRecord record;
        record.feature = domain.feature;
        record.beam.reserve(beam.size());
        for (const Node& node : beam) record.beam.push_back(node.cand);
        record.best_lambda = beam_best_lambda(beam, directions);
        record.best_objective = best_objective;
        record.evaluations = evaluations;
        result.trace.iterations.push_back(std::move(record));
    }
    result.trace.total_evaluations = evaluations;

    const Node* best = &beam.front();
    for (const Node& node : beam) {
        if (better_final(node, *best, directions)) best = &node;
    }
    result.best = best->cand;
    return result;
}

SearchResult dp_baseline(const MlpModel& model, const Dataset& dataset,
                         const std::vector<ValueDomain>& domains,
                         const SearchConfig& config) {
    const std::vector<Direction> directions =
        resolve_directions(config, dataset.label_count());
    if (domains.empty()) {
        throw Error(errc::empty_domain, "no feature domains to search");
    }

    // Stage order is schema order regardless of how the domains were passed.
    std::vector<std::size_t> schema_index(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const auto idx = dataset.schema().feature_index(domains[i].feature);
        if (!idx) {
            throw Error(errc::unknown_feature,
                        "feature '" + domains[i].feature + "' not in schema");
        }
        schema_index[i] = *idx;
    }
    std::vector<std::size_t> order(domains.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return schema_index[a] < schema_index[b];
    });

    SearchResult result;
    std::vector<Node> table(1);
    std::size_t evaluations = 0;
    double best_objective = 0.0;
    bool have_objective = false;
    for (std::size_t stage = 0; stage < order.size(); ++stage) {
        const ValueDomain& domain = domains[order[stage]];
        if (domain.candidates.empty()) {
            throw Error(errc::empty_domain,
                        "feature '" + domain.feature + "' has no candidate values");
        }
        const std::size_t values = domain.candidates.size();
        if (config.dp_capacity > 0 && table.size() * values > config.dp_capacity) {
            throw Error(errc::capacity_exceeded,
                        "stage " + std::to_string(stage) + " needs " +
                            std::to_string(table.size() * values) + " table entries");
        }
        std::vector<Node> extensions(table.size() * values);
        parallel_for(extensions.size(), [&](std::size_t e) {
            const Node& parent = table[e / values];
            const std::size_t v = e % values;
            Assignment assignment = parent.cand.assignment;
            assignment.bindings[domain.feature] = domain.candidates[v];
            Candidate cand;
            cand.lambda = mean_prediction(model, dataset, assignment);
            cand.upsilon.assign(cand.lambda.size(), 0.0);
            cand.gamma.resize(cand.lambda.size());
            for (std::size_t l = 0; l < cand.lambda.size(); ++l) {
                cand.gamma[l] = directions[l] == Direction::minimize ? 1.0 - cand.lambda[l]
                                                                     : cand.lambda[l];
            }
            cand.big_gamma = direction_adjusted_objective(cand.lambda, directions);
            cand.assignment = std::move(assignment);
            Node node;
            node.cand = std::move(cand);
            node.value_index = parent.value_index;
            node.value_index[domain.feature] = v;
            extensions[e] = std::move(node);
        });
        evaluations += extensions.size();
        for (const Node& node : extensions) {
            if (!have_objective || node.cand.big_gamma > best_objective) {
                best_objective = node.cand.big_gamma;
                have_objective = true;
            }
        }
        table = std::move(extensions);

        IterationRecord record;
        record.feature = domain.feature;
        std::vector<Node> snapshot = table;
        std::sort(snapshot.begin(), snapshot.end(), better_beam);
        record.beam.reserve(snapshot.size());
        for (const Node& node : snapshot) record.beam.push_back(node.cand);
        record.best_lambda = beam_best_lambda(table, directions);
        record.best_objective = best_objective;
        record.evaluations = evaluations;
        result.trace.iterations.push_back(std::move(record));
    }
    result.trace.total_evaluations = evaluations;

    const Node* best = &table.front();
    for (const Node& node : table) {
        if (better_final(node, *best, directions)) best = &node;
    }
    result.best = best->cand;
    return result;
}

Candidate exhaustive_oracle(const MlpModel& model, const Dataset& dataset,
                            const std::vector<ValueDomain>& domains,
                            const SearchConfig& config) {
    validate_config(config);
    const std::vector<Direction> directions =
        resolve_directions(config, dataset.label_count());
    if (domains.empty()) {
        throw Error(errc::empty_domain, "no feature domains to enumerate");
    }
    std::size_t total = 1;
    for (const auto& domain : domains) {
        if (domain.candidates.empty()) {
            throw Error(errc::empty_domain,
                        "feature '" + domain.feature + "' has no candidate values");
        }
        if (domain.candidates.size() > config.oracle_limit / total) {
            throw Error(errc::space_too_large,
                        "assignment space exceeds the oracle limit of " +
                            std::to_string(config.oracle_limit));
        }
        total *= domain.candidates.size();
    }

    const BasePredictionStats base = base_prediction_stats(model, dataset);
    std::vector<std::size_t> odometer(domains.size(), 0);
    Node best;
    bool have_best = false;
    for (std::size_t count = 0; count < total; ++count) {
        Assignment assignment;
        Node node;
        for (std::size_t d = 0; d < domains.size(); ++d) {
            assignment.bindings[domains[d].feature] = domains[d].candidates[odometer[d]];
            node.value_index[domains[d].feature] = odometer[d];
        }
        node.cand = score_gamma_candidate(model, dataset, base, std::move(assignment), config,
                                          directions);
        if (!have_best || better_final(node, best, directions)) {
            best = std::move(node);
            have_best = true;
        }
        for (std::size_t d = domains.size(); d-- > 0;) {
            if (++odometer[d] < domains[d].candidates.size()) break;
            odometer[d] = 0;
        }
    }
    return best.cand;
}

} // namespace ebco

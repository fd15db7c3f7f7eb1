#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ebco/search.hpp"

namespace ebco {

// Flat per-candidate trace: one row per beam member per iteration, columns
// expanded per label.
void write_trace_csv(const SearchTrace& trace, const std::vector<std::string>& labels,
                     const std::string& path);

// Plot-ready series: per iteration, the per-label best prediction in the beam
// and the best objective reached so far.
void write_plot_lambda_csv(const SearchTrace& trace, const std::vector<std::string>& labels,
                           const std::string& path);

// Two-series (method, evaluations, best objective) data aligning two traces.
void write_compare_csv(const SearchTrace& ebco_trace, const SearchTrace& dp_trace,
                       const std::string& path);

nlohmann::json trace_to_json(const SearchTrace& trace, const std::vector<std::string>& labels);

nlohmann::json candidate_to_json(const Candidate& candidate,
                                 const std::vector<std::string>& labels);

// Cumulative evaluations at the first iteration whose best objective reaches
// target - slack; falls back to the total count when never reached.
struct EvaluationsToTarget {
    std::size_t evaluations = 0;
    bool reached = false;
};
EvaluationsToTarget evaluations_to_target(const SearchTrace& trace, double target,
                                          double slack);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace ebco

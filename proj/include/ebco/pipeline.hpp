#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ebco/attribution.hpp"
#include "ebco/search.hpp"
#include "ebco/synthetic.hpp"

namespace ebco {

// Everything one run needs. The master seed drives every stochastic step:
// synthesis and training use it directly, reference sampling uses seed+1 and
// Monte Carlo attribution seed+2.
struct RunConfig {
    std::optional<FeatureSchema> schema;
    std::optional<std::string> dataset_csv;
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::string> model_path; // reuse instead of training
    TrainConfig train;
    SearchConfig search;
    std::size_t reference_size = 100;
    AttributionOptions attribution;
    std::size_t grid_size = 5;
    std::uint64_t seed = 0;
    std::size_t compare_seeds = 20;
    std::string out_dir = ".";
};

// Parses the documented config JSON shape; --seed/--out arrive as overrides.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_echo(const RunConfig& config);

// Subcommand bodies. Each loads and computes everything before writing any
// output file, then returns the report document it wrote (if any).
nlohmann::json cmd_synth(const RunConfig& config);
nlohmann::json cmd_train(const RunConfig& config);
nlohmann::json cmd_explain(const RunConfig& config);
nlohmann::json cmd_optimize(const RunConfig& config);
nlohmann::json cmd_compare(const RunConfig& config);

// Exit status for an error code, grouped by module.
int exit_code_for(errc code);

} // namespace ebco

#include "ebco/pipeline.hpp"

#include <ctime>
#include <filesystem>

#include "ebco/errors.hpp"
#include "ebco/report.hpp"

namespace ebco {

namespace {

constexpr const char* kReportVersion = "1.0.0";

std::string now_utc_iso() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Direction direction_from_string(const std::string& s) {
    if (s == "minimize") return Direction::minimize;
    if (s == "maximize") return Direction::maximize;
    throw Error(errc::bad_config, "direction must be 'minimize' or 'maximize', got '" + s + "'");
}

const char* direction_to_string(Direction d) {
    return d == Direction::minimize ? "minimize" : "maximize";
}

struct LoadedInput {
    Dataset dataset;
    std::optional<PlantedTruth> truth;
};

LoadedInput load_input(const RunConfig& config, std::uint64_t seed) {
    if (config.synthetic) {
        auto [dataset, truth] = generate_synthetic(*config.synthetic, seed);
        return {std::move(dataset), std::move(truth)};
    }
    if (!config.dataset_csv) {
        throw Error(errc::bad_config, "config needs either a dataset csv or a synthetic spec");
    }
    if (!config.schema) {
        throw Error(errc::bad_config, "a csv dataset needs a schema");
    }
    return {load_csv(*config.dataset_csv, *config.schema), std::nullopt};
}

MlpModel obtain_model(const RunConfig& config, const Dataset& dataset, std::uint64_t seed) {
    if (config.model_path) {
        MlpModel model = model_from_json(nlohmann::json::parse(read_text_file(*config.model_path)));
        if (model.input_width() != dataset.encoded_width() ||
            model.label_count() != dataset.label_count()) {
            throw Error(errc::dimension_mismatch,
                        "stored model does not match the dataset encoding");
        }
        return model;
    }
    TrainConfig train_config = config.train;
    train_config.seed = seed;
    return train(dataset, train_config);
}

// One full explanation pipeline pass: data -> model -> references ->
// attributions -> candidate domains -> pruned domains.
struct PipelineRun {
    Dataset dataset;
    std::optional<PlantedTruth> truth;
    MlpModel model;
    ReferenceSet refs;
    AttributionTensor tensor;
    std::vector<ValueDomain> domains;
    std::vector<PrunedDomain> pruned;
};

PipelineRun run_pipeline(const RunConfig& config, std::uint64_t seed) {
    PipelineRun run;
    LoadedInput input = load_input(config, seed);
    run.dataset = std::move(input.dataset);
    run.truth = std::move(input.truth);
    run.model = obtain_model(config, run.dataset, seed);
    run.refs = sample_references(run.dataset, config.reference_size, seed + 1);
    AttributionOptions attribution = config.attribution;
    attribution.mc_seed = seed + 2;
    run.tensor = attribute_dataset(run.model, run.dataset, run.refs, attribution);
    run.domains = candidate_values(run.dataset, config.grid_size);
    run.pruned = prune_values(run.domains, run.tensor, run.dataset, config.search.delta);
    return run;
}

std::filesystem::path ensure_out_dir(const RunConfig& config) {
    std::filesystem::path dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(errc::io_error, "cannot create output directory '" + config.out_dir + "'");
    }
    return dir;
}

void dump_json(const nlohmann::json& j, const std::filesystem::path& path) {
    write_text_file(path.string(), j.dump(2) + "\n");
}

nlohmann::json model_summary(const MlpModel& model) {
    return nlohmann::json{{"input_width", model.input_width()},
                          {"hidden", model.hidden_size()},
                          {"labels", model.label_count()},
                          {"seed", model.train_meta.seed},
                          {"epochs", model.train_meta.epochs},
                          {"learning_rate", model.train_meta.learning_rate},
                          {"initial_loss", model.train_meta.initial_loss},
                          {"final_loss", model.train_meta.final_loss},
                          {"holdout_accuracy", model.train_meta.holdout_accuracy}};
}

nlohmann::json pruning_summary(const std::vector<PrunedDomain>& pruned) {
    nlohmann::json kept_counts = nlohmann::json::object();
    nlohmann::json guarded = nlohmann::json::array();
    for (const auto& domain : pruned) {
        kept_counts[domain.feature] = domain.kept.size();
        if (domain.keep_one_applied) guarded.push_back(domain.feature);
    }
    return nlohmann::json{{"kept_counts", std::move(kept_counts)},
                          {"keep_one_applied", std::move(guarded)},
                          {"audit_file", "pruning_audit.json"}};
}

nlohmann::json interpretation_notes(const RunConfig& config) {
    return nlohmann::json{
        {"sensitivity_estimator",
         "per-sample prediction covariance ratio Cov(assigned, original) / Var(original), "
         "population normalization, no conditioning partition"},
        {"penalized_score_mode",
         config.search.gamma_mode == GammaMode::as_written
             ? "as_written: passing gammas collapse to rho, so the score counts passing "
               "objectives"
             : "passthrough: passing gammas keep their magnitude"},
        {"pruning_aggregation",
         "a value survives when its max-over-labels mean |attribution| exceeds delta"}};
}

bool contains_bindings(const Assignment& haystack, const Assignment& needle) {
    for (const auto& [name, value] : needle.bindings) {
        const auto it = haystack.bindings.find(name);
        if (it == haystack.bindings.end() || !value_equal(it->second, value)) return false;
    }
    return true;
}

} // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig config;
    if (j.contains("schema")) {
        const auto& js = j.at("schema");
        config.schema = js.contains("path")
                            ? schema_from_json(nlohmann::json::parse(
                                  read_text_file(js.at("path").get<std::string>())))
                            : schema_from_json(js);
    }
    if (j.contains("dataset")) {
        const auto& jd = j.at("dataset");
        if (jd.contains("csv")) config.dataset_csv = jd.at("csv").get<std::string>();
        if (jd.contains("synthetic")) {
            config.synthetic = synthetic_spec_from_json(jd.at("synthetic"));
        }
    }
    if (j.contains("model")) {
        const auto& jm = j.at("model");
        config.train.hidden = jm.value("hidden", config.train.hidden);
        config.train.epochs = jm.value("epochs", config.train.epochs);
        config.train.learning_rate = jm.value("learning_rate", config.train.learning_rate);
        config.train.holdout_fraction =
            jm.value("holdout_fraction", config.train.holdout_fraction);
        if (jm.contains("path")) config.model_path = jm.at("path").get<std::string>();
    }
    if (j.contains("search")) {
        const auto& js = j.at("search");
        config.search.delta = js.value("delta", config.search.delta);
        config.search.omega = js.value("omega", config.search.omega);
        config.search.rho = js.value("rho", config.search.rho);
        config.search.zeta = js.value("zeta", config.search.zeta);
        if (js.contains("direction")) {
            const auto& jdir = js.at("direction");
            if (jdir.is_string()) {
                config.search.direction = {direction_from_string(jdir.get<std::string>())};
            } else {
                for (const auto& d : jdir) {
                    config.search.direction.push_back(
                        direction_from_string(d.get<std::string>()));
                }
            }
        }
        if (js.contains("feature_order")) {
            const auto order = js.at("feature_order").get<std::string>();
            if (order == "relevance") {
                config.search.feature_order = FeatureOrder::relevance;
            } else if (order == "schema") {
                config.search.feature_order = FeatureOrder::schema;
            } else {
                throw Error(errc::bad_config, "feature_order must be 'relevance' or 'schema'");
            }
        }
        if (js.contains("gamma_mode")) {
            const auto mode = js.at("gamma_mode").get<std::string>();
            if (mode == "as_written") {
                config.search.gamma_mode = GammaMode::as_written;
            } else if (mode == "passthrough") {
                config.search.gamma_mode = GammaMode::passthrough;
            } else {
                throw Error(errc::bad_config,
                            "gamma_mode must be 'as_written' or 'passthrough'");
            }
        }
        config.search.dp_capacity = js.value("dp_capacity", config.search.dp_capacity);
        config.search.oracle_limit = js.value("oracle_limit", config.search.oracle_limit);
    }
    config.reference_size = j.value("reference_size", config.reference_size);
    if (j.contains("attribution")) {
        const auto& ja = j.at("attribution");
        if (ja.contains("method")) {
            const auto method = ja.at("method").get<std::string>();
            if (method == "exact") {
                config.attribution.method = AttributionMethod::exact;
            } else if (method == "montecarlo") {
                config.attribution.method = AttributionMethod::montecarlo;
            } else if (method == "deepshap") {
                config.attribution.method = AttributionMethod::deepshap;
            } else {
                throw Error(errc::bad_config, "unknown attribution method '" + method + "'");
            }
        }
        config.attribution.exact_limit = ja.value("exact_limit", config.attribution.exact_limit);
        config.attribution.mc_permutations =
            ja.value("mc_permutations", config.attribution.mc_permutations);
        if (ja.contains("scale")) {
            const auto scale = ja.at("scale").get<std::string>();
            if (scale == "logit") {
                config.attribution.logit_scale = true;
            } else if (scale != "probability") {
                throw Error(errc::bad_config,
                            "attribution scale must be 'probability' or 'logit'");
            }
        }
    }
    config.grid_size = j.value("grid_size", config.grid_size);
    config.seed = j.value("seed", config.seed);
    config.compare_seeds = j.value("compare_seeds", config.compare_seeds);
    if (config.compare_seeds == 0) {
        throw Error(errc::bad_config, "compare_seeds must be >= 1");
    }
    return config;
}

nlohmann::json run_config_echo(const RunConfig& config) {
    nlohmann::json dataset = nlohmann::json::object();
    if (config.dataset_csv) dataset["csv"] = *config.dataset_csv;
    if (config.synthetic) dataset["synthetic"] = synthetic_spec_to_json(*config.synthetic);
    nlohmann::json directions;
    if (config.search.direction.empty()) {
        directions = "minimize";
    } else if (config.search.direction.size() == 1) {
        directions = direction_to_string(config.search.direction.front());
    } else {
        directions = nlohmann::json::array();
        for (Direction d : config.search.direction) directions.push_back(direction_to_string(d));
    }
    nlohmann::json j{
        {"dataset", std::move(dataset)},
        {"model",
         {{"hidden", config.train.hidden},
          {"epochs", config.train.epochs},
          {"learning_rate", config.train.learning_rate},
          {"holdout_fraction", config.train.holdout_fraction}}},
        {"search",
         {{"delta", config.search.delta},
          {"omega", config.search.omega},
          {"rho", config.search.rho},
          {"zeta", config.search.zeta},
          {"direction", std::move(directions)},
          {"feature_order",
           config.search.feature_order == FeatureOrder::relevance ? "relevance" : "schema"},
          {"gamma_mode",
           config.search.gamma_mode == GammaMode::as_written ? "as_written" : "passthrough"},
          {"dp_capacity", config.search.dp_capacity},
          {"oracle_limit", config.search.oracle_limit}}},
        {"reference_size", config.reference_size},
        {"attribution",
         {{"method", attribution_method_name(config.attribution.method)},
          {"exact_limit", config.attribution.exact_limit},
          {"mc_permutations", config.attribution.mc_permutations},
          {"scale", config.attribution.logit_scale ? "logit" : "probability"}}},
        {"grid_size", config.grid_size},
        {"seed", config.seed},
        {"compare_seeds", config.compare_seeds}};
    if (config.schema) j["schema"] = schema_to_json(*config.schema);
    if (config.model_path) j["model"]["path"] = *config.model_path;
    return j;
}

nlohmann::json cmd_synth(const RunConfig& config) {
    if (!config.synthetic) {
        throw Error(errc::bad_config, "synth needs a synthetic spec in the config");
    }
    auto [dataset, truth] = generate_synthetic(*config.synthetic, config.seed);
    const auto dir = ensure_out_dir(config);
    write_csv(dataset, (dir / "dataset.csv").string());
    dump_json(planted_truth_to_json(truth, dataset.schema()), dir / "planted_truth.json");
    return nlohmann::json{{"rows", dataset.sample_count()},
                          {"features", dataset.feature_count()},
                          {"labels", dataset.label_count()},
                          {"files",
                           {{"dataset", (dir / "dataset.csv").string()},
                            {"planted_truth", (dir / "planted_truth.json").string()}}}};
}

nlohmann::json cmd_train(const RunConfig& config) {
    LoadedInput input = load_input(config, config.seed);
    TrainConfig train_config = config.train;
    train_config.seed = config.seed;
    const MlpModel model = train(input.dataset, train_config);
    const auto dir = ensure_out_dir(config);
    dump_json(model_to_json(model), dir / "model.json");
    return nlohmann::json{{"model", model_summary(model)},
                          {"files", {{"model", (dir / "model.json").string()}}}};
}

nlohmann::json cmd_explain(const RunConfig& config) {
    LoadedInput input = load_input(config, config.seed);
    const MlpModel model = obtain_model(config, input.dataset, config.seed);
    const ReferenceSet refs =
        sample_references(input.dataset, config.reference_size, config.seed + 1);
    AttributionOptions attribution = config.attribution;
    attribution.mc_seed = config.seed + 2;
    const AttributionTensor tensor =
        attribute_dataset(model, input.dataset, refs, attribution);
    const auto dir = ensure_out_dir(config);
    write_attribution_csv(tensor, (dir / "attributions.csv").string());
    dump_json(attribution_to_json(tensor), dir / "attributions.json");
    if (!config.model_path) dump_json(model_to_json(model), dir / "model.json");
    return nlohmann::json{{"model", model_summary(model)},
                          {"method", attribution_method_name(tensor.method)},
                          {"samples", tensor.samples},
                          {"files",
                           {{"attributions_csv", (dir / "attributions.csv").string()},
                            {"attributions_json", (dir / "attributions.json").string()}}}};
}

nlohmann::json cmd_optimize(const RunConfig& config) {
    PipelineRun run = run_pipeline(config, config.seed);
    const SearchResult result =
        ebco_search(run.model, run.dataset, run.tensor, run.pruned, config.search);
    const std::vector<Direction> directions =
        resolve_directions(config.search, run.dataset.label_count());

    const auto dir = ensure_out_dir(config);
    if (config.synthetic) {
        write_csv(run.dataset, (dir / "dataset.csv").string());
        dump_json(planted_truth_to_json(*run.truth, run.dataset.schema()),
                  dir / "planted_truth.json");
    }
    dump_json(model_to_json(run.model), dir / "model.json");
    dump_json(pruning_audit_json(run.pruned, config.search.delta, run.dataset.schema().labels),
              dir / "pruning_audit.json");
    write_trace_csv(result.trace, run.dataset.schema().labels,
                    (dir / "trace_ebco.csv").string());
    dump_json(trace_to_json(result.trace, run.dataset.schema().labels),
              dir / "trace_ebco.json");
    write_plot_lambda_csv(result.trace, run.dataset.schema().labels,
                          (dir / "plot_lambda.csv").string());

    nlohmann::json report{
        {"spec_version", kReportVersion},
        {"command", "optimize"},
        {"config", run_config_echo(config)},
        {"model", model_summary(run.model)},
        {"pruning", pruning_summary(run.pruned)},
        {"best", candidate_to_json(result.best, run.dataset.schema().labels)},
        {"best_objective", direction_adjusted_objective(result.best.lambda, directions)},
        {"total_evaluations", result.trace.total_evaluations},
        {"trace_files",
         {{"ebco", "trace_ebco.csv"}, {"plot_lambda", "plot_lambda.csv"}}},
        {"notes", interpretation_notes(config)}};
    if (run.truth) {
        report["planted_truth"] = planted_truth_to_json(*run.truth, run.dataset.schema());
        report["planted_recovered"] =
            contains_bindings(result.best.assignment, run.truth->assignment);
    }
    report["meta"] = {{"generated_at_utc", now_utc_iso()}, {"out_dir", config.out_dir}};
    dump_json(report, dir / "report.json");
    return report;
}

nlohmann::json cmd_compare(const RunConfig& config) {
    struct SeedOutcome {
        std::uint64_t seed;
        SearchResult ebco;
        SearchResult dp;
        double oracle_objective;
        nlohmann::json row;
    };

    constexpr double kSlack = 0.05;
    std::vector<SeedOutcome> outcomes;
    std::vector<std::string> labels;
    std::size_t ebco_not_worse = 0;
    std::size_t planted_recovered = 0;
    std::size_t with_truth = 0;
    for (std::size_t s = 0; s < config.compare_seeds; ++s) {
        const std::uint64_t seed = config.seed + s;
        PipelineRun run = run_pipeline(config, seed);
        labels = run.dataset.schema().labels;
        const std::vector<Direction> directions =
            resolve_directions(config.search, run.dataset.label_count());
        SearchResult ebco_result =
            ebco_search(run.model, run.dataset, run.tensor, run.pruned, config.search);
        SearchResult dp_result = dp_baseline(run.model, run.dataset, run.domains, config.search);
        // The unbounded DP table enumerates every full assignment, so its best
        // objective IS the exhaustive optimum of the comparison metric.
        const double oracle_objective = dp_result.best.big_gamma;

        const EvaluationsToTarget ebco_evals =
            evaluations_to_target(ebco_result.trace, oracle_objective, kSlack);
        const EvaluationsToTarget dp_evals =
            evaluations_to_target(dp_result.trace, oracle_objective, kSlack);
        if (ebco_evals.evaluations <= dp_evals.evaluations) ++ebco_not_worse;

        nlohmann::json row{
            {"seed", seed},
            {"ebco_evaluations_to_target", ebco_evals.evaluations},
            {"ebco_reached_target", ebco_evals.reached},
            {"dp_evaluations_to_target", dp_evals.evaluations},
            {"dp_reached_target", dp_evals.reached},
            {"ebco_best_objective",
             direction_adjusted_objective(ebco_result.best.lambda, directions)},
            {"dp_best_objective", dp_result.best.big_gamma},
            {"oracle_objective", oracle_objective},
            {"ebco_best_assignment", assignment_to_json(ebco_result.best.assignment)},
            {"dp_best_assignment", assignment_to_json(dp_result.best.assignment)}};
        if (run.truth) {
            ++with_truth;
            const bool recovered =
                contains_bindings(ebco_result.best.assignment, run.truth->assignment);
            if (recovered) ++planted_recovered;
            row["planted_assignment"] = assignment_to_json(run.truth->assignment);
            row["planted_recovered"] = recovered;
        }
        outcomes.push_back(SeedOutcome{seed, std::move(ebco_result), std::move(dp_result),
                                       oracle_objective, std::move(row)});
    }

    const auto dir = ensure_out_dir(config);
    const SeedOutcome& first = outcomes.front();
    write_trace_csv(first.ebco.trace, labels, (dir / "trace_ebco.csv").string());
    write_trace_csv(first.dp.trace, labels, (dir / "trace_dp.csv").string());
    dump_json(trace_to_json(first.ebco.trace, labels), dir / "trace_ebco.json");
    dump_json(trace_to_json(first.dp.trace, labels), dir / "trace_dp.json");
    write_plot_lambda_csv(first.ebco.trace, labels, (dir / "plot_lambda.csv").string());
    write_compare_csv(first.ebco.trace, first.dp.trace, (dir / "plot_compare.csv").string());

    nlohmann::json per_seed = nlohmann::json::array();
    for (const auto& outcome : outcomes) per_seed.push_back(outcome.row);
    nlohmann::json comparison{{"threshold_slack", kSlack},
                              {"seeds", config.compare_seeds},
                              {"ebco_not_worse_count", ebco_not_worse},
                              {"per_seed", std::move(per_seed)}};
    if (with_truth > 0) {
        comparison["planted_recovered_count"] = planted_recovered;
        comparison["planted_seeds"] = with_truth;
    }

    nlohmann::json report{
        {"spec_version", kReportVersion},
        {"command", "compare"},
        {"config", run_config_echo(config)},
        {"comparison", std::move(comparison)},
        {"trace_files",
         {{"ebco", "trace_ebco.csv"},
          {"dp", "trace_dp.csv"},
          {"plot_lambda", "plot_lambda.csv"},
          {"plot_compare", "plot_compare.csv"}}},
        {"notes", interpretation_notes(config)}};
    report["meta"] = {{"generated_at_utc", now_utc_iso()}, {"out_dir", config.out_dir}};
    dump_json(report, dir / "report.json");
    return report;
}

int exit_code_for(errc code) {
    switch (code) {
        case errc::bad_config:
            return 2;
        case errc::io_error:
            return 3;
        case errc::missing_column:
        case errc::type_mismatch:
        case errc::unknown_category:
        case errc::empty_dataset:
        case errc::invalid_spec:
        case errc::unknown_feature:
        case errc::value_out_of_domain:
        case errc::unknown_value:
            return 4;
        case errc::non_finite_loss:
        case errc::dimension_mismatch:
            return 5;
        case errc::too_many_features:
            return 6;
        case errc::degenerate_variance:
        case errc::capacity_exceeded:
        case errc::space_too_large:
        case errc::empty_domain:
            return 7;
        case errc::internal:
            return 9;
    }
    return 9;
}

} // namespace ebco

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebco/errors.hpp"
#include "ebco/pipeline.hpp"
#include "ebco/report.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

ebco::RunConfig load_run_config(const CliArgs& args) {
    const auto j = nlohmann::json::parse(ebco::read_text_file(args.config_path));
    ebco::RunConfig config = ebco::run_config_from_json(j);
    if (args.seed) config.seed = *args.seed;
    if (args.out) config.out_dir = *args.out;
    return config;
}

void add_common_options(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run configuration JSON file")
        ->required();
    cmd->add_option("-s,--seed", args.seed, "override the config seed");
    cmd->add_option("-o,--out", args.out, "override the output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"explanation-guided multi-label combinatorial optimization pipeline"};
    app.require_subcommand(1);

    CliArgs args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted truth");
    auto* train = app.add_subcommand("train", "train the multi-label network");
    auto* explain = app.add_subcommand("explain", "attribute predictions to feature values");
    auto* optimize = app.add_subcommand("optimize", "run the full search pipeline");
    auto* compare = app.add_subcommand("compare", "benchmark the search against the DP baseline");
    for (auto* cmd : {synth, train, explain, optimize, compare}) {
        add_common_options(cmd, args);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const ebco::RunConfig config = load_run_config(args);
        nlohmann::json summary;
        if (synth->parsed()) {
            summary = ebco::cmd_synth(config);
        } else if (train->parsed()) {
            summary = ebco::cmd_train(config);
        } else if (explain->parsed()) {
            summary = ebco::cmd_explain(config);
        } else if (optimize->parsed()) {
            summary = ebco::cmd_optimize(config);
        } else {
            summary = ebco::cmd_compare(config);
        }
        if (summary.contains("comparison")) {
            const auto& comparison = summary.at("comparison");
            std::cout << "ebco not worse than dp on " << comparison.at("ebco_not_worse_count")
                      << " of " << comparison.at("seeds") << " seeds\n";
        } else if (summary.contains("best")) {
            std::cout << "best assignment: " << summary.at("best").at("assignment").dump()
                      << "\n";
        }
        std::cout << summary.dump(2) << std::endl;
        return 0;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: invalid JSON: " << e.what() << std::endl;
        return ebco::exit_code_for(ebco::errc::bad_config);
    } catch (const ebco::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return ebco::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return ebco::exit_code_for(ebco::errc::internal);
    }
}

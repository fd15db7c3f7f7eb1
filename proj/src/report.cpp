#include "ebco/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ebco/errors.hpp"

namespace ebco {

namespace {

std::string fmt(double v) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string assignment_string(const Assignment& assignment) {
    std::string out;
    for (const auto& [name, value] : assignment.bindings) {
        if (!out.empty()) out += ';';
        out += name + "=" + value_to_string(value);
    }
    return out;
}

} // namespace

void write_trace_csv(const SearchTrace& trace, const std::vector<std::string>& labels,
                     const std::string& path) {
    std::ostringstream out;
    out << "iteration,feature,assignment";
    for (const auto& l : labels) out << ",lambda:" << l;
    for (const auto& l : labels) out << ",upsilon:" << l;
    for (const auto& l : labels) out << ",gamma:" << l;
    out << ",big_gamma,cumulative_evaluations\n";
    for (std::size_t it = 0; it < trace.iterations.size(); ++it) {
        const IterationRecord& record = trace.iterations[it];
        for (const Candidate& cand : record.beam) {
            out << (it + 1) << ',' << record.feature << ',' << assignment_string(cand.assignment);
            for (double v : cand.lambda) out << ',' << fmt(v);
            for (double v : cand.upsilon) out << ',' << fmt(v);
            for (double v : cand.gamma) out << ',' << fmt(v);
            out << ',' << fmt(cand.big_gamma) << ',' << record.evaluations << '\n';
        }
    }
    write_text_file(path, out.str());
}

void write_plot_lambda_csv(const SearchTrace& trace, const std::vector<std::string>& labels,
                           const std::string& path) {
    std::ostringstream out;
    out << "iteration,feature,cumulative_evaluations,best_objective";
    for (const auto& l : labels) out << ",best_lambda:" << l;
    out << '\n';
    for (std::size_t it = 0; it < trace.iterations.size(); ++it) {
        const IterationRecord& record = trace.iterations[it];
        out << (it + 1) << ',' << record.feature << ',' << record.evaluations << ','
            << fmt(record.best_objective);
        for (double v : record.best_lambda) out << ',' << fmt(v);
        out << '\n';
    }
    write_text_file(path, out.str());
}

void write_compare_csv(const SearchTrace& ebco_trace, const SearchTrace& dp_trace,
                       const std::string& path) {
    std::ostringstream out;
    out << "method,iteration,cumulative_evaluations,best_objective\n";
    const auto emit = [&](const char* method, const SearchTrace& trace) {
        for (std::size_t it = 0; it < trace.iterations.size(); ++it) {
            out << method << ',' << (it + 1) << ',' << trace.iterations[it].evaluations << ','
                << fmt(trace.iterations[it].best_objective) << '\n';
        }
    };
    emit("ebco", ebco_trace);
    emit("dp", dp_trace);
    write_text_file(path, out.str());
}

nlohmann::json trace_to_json(const SearchTrace& trace, const std::vector<std::string>& labels) {
    nlohmann::json iterations = nlohmann::json::array();
    for (const IterationRecord& record : trace.iterations) {
        nlohmann::json beam = nlohmann::json::array();
        for (const Candidate& cand : record.beam) beam.push_back(candidate_to_json(cand, labels));
        nlohmann::json best_lambda = nlohmann::json::object();
        for (std::size_t l = 0; l < labels.size(); ++l) {
            best_lambda[labels[l]] = record.best_lambda[l];
        }
        iterations.push_back(nlohmann::json{{"feature", record.feature},
                                            {"beam", std::move(beam)},
                                            {"best_lambda", std::move(best_lambda)},
                                            {"best_objective", record.best_objective},
                                            {"cumulative_evaluations", record.evaluations}});
    }
    return nlohmann::json{{"spec_version", "1.0.0"},
                          {"iterations", std::move(iterations)},
                          {"total_evaluations", trace.total_evaluations}};
}

nlohmann::json candidate_to_json(const Candidate& candidate,
                                 const std::vector<std::string>& labels) {
    nlohmann::json lambda = nlohmann::json::object();
    nlohmann::json upsilon = nlohmann::json::object();
    nlohmann::json gamma = nlohmann::json::object();
    for (std::size_t l = 0; l < labels.size(); ++l) {
        lambda[labels[l]] = candidate.lambda[l];
        upsilon[labels[l]] = candidate.upsilon[l];
        gamma[labels[l]] = candidate.gamma[l];
    }
    return nlohmann::json{{"assignment", assignment_to_json(candidate.assignment)},
                          {"lambda", std::move(lambda)},
                          {"upsilon", std::move(upsilon)},
                          {"gamma", std::move(gamma)},
                          {"big_gamma", candidate.big_gamma}};
}

EvaluationsToTarget evaluations_to_target(const SearchTrace& trace, double target,
                                          double slack) {
    EvaluationsToTarget result;
    result.evaluations = trace.total_evaluations;
    for (const IterationRecord& record : trace.iterations) {
        if (record.best_objective >= target - slack) {
            result.evaluations = record.evaluations;
            result.reached = true;
            break;
        }
    }
    return result;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw Error(errc::io_error, "cannot write '" + path + "'");
    }
    file << content;
    if (!file.good()) {
        throw Error(errc::io_error, "failed while writing '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw Error(errc::io_error, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

} // namespace ebco

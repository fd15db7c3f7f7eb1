#include "ebco/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ebco/errors.hpp"

namespace ebco {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string cell_location(std::size_t row, const std::string& column) {
    return "row " + std::to_string(row + 1) + ", column '" + column + "'";
}

} // namespace

Dataset Dataset::from_rows(FeatureSchema schema,
                           std::vector<std::vector<std::string>> raw,
                           std::vector<std::vector<std::string>> label_tokens) {
    schema.validate();
    const std::size_t m = raw.size();
    const std::size_t n = schema.feature_count();
    const std::size_t label_count = schema.label_count();
    if (m == 0) {
        throw Error(errc::empty_dataset, "no data rows");
    }
    if (label_tokens.size() != m) {
        throw Error(errc::dimension_mismatch, "label rows do not match feature rows");
    }

    Dataset ds;
    ds.numeric_cache_.assign(n, {});
    ds.category_cache_.assign(n, {});

    // Parse and validate every cell.
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureDef& def = schema.features[i];
        if (def.kind == FeatureKind::numeric) {
            ds.numeric_cache_[i].resize(m);
        } else {
            ds.category_cache_[i].resize(m);
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (raw[r].size() != n) {
                throw Error(errc::type_mismatch,
                            "row " + std::to_string(r + 1) + " has " +
                                std::to_string(raw[r].size()) + " feature cells, expected " +
                                std::to_string(n));
            }
            const std::string& token = raw[r][i];
            if (def.kind == FeatureKind::numeric) {
                double v = 0.0;
                if (!parse_double(token, v)) {
                    throw Error(errc::type_mismatch, cell_location(r, def.name) +
                                                         ": cannot parse '" + token +
                                                         "' as numeric");
                }
                if (v < def.min || v > def.max) {
                    throw Error(errc::type_mismatch,
                                cell_location(r, def.name) + ": value " + token +
                                    " outside declared range [" + std::to_string(def.min) +
                                    ", " + std::to_string(def.max) + "]");
                }
                ds.numeric_cache_[i][r] = v;
            } else {
                auto it = std::find(def.categories.begin(), def.categories.end(), token);
                if (it == def.categories.end()) {
                    throw Error(errc::unknown_category, cell_location(r, def.name) +
                                                            ": category '" + token +
                                                            "' not declared");
                }
                ds.category_cache_[i][r] =
                    static_cast<std::size_t>(it - def.categories.begin());
            }
        }
    }

    Matrix targets(m, label_count);
    for (std::size_t r = 0; r < m; ++r) {
        if (label_tokens[r].size() != label_count) {
            throw Error(errc::type_mismatch, "row " + std::to_string(r + 1) + " has " +
                                                 std::to_string(label_tokens[r].size()) +
                                                 " label cells, expected " +
                                                 std::to_string(label_count));
        }
        for (std::size_t l = 0; l < label_count; ++l) {
            double v = 0.0;
            if (!parse_double(label_tokens[r][l], v) || (v != 0.0 && v != 1.0)) {
                throw Error(errc::type_mismatch,
                            cell_location(r, "label:" + schema.labels[l]) + ": label '" +
                                label_tokens[r][l] + "' must be 0 or 1");
            }
            targets(r, l) = v;
        }
    }

    // Build the encoding map: one-hot slices and z-score statistics.
    EncodingMap encoding;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureDef& def = schema.features[i];
        FeatureEncoding fe;
        fe.name = def.name;
        fe.offset = offset;
        fe.kind = def.kind;
        if (def.kind == FeatureKind::categorical) {
            fe.width = def.categories.size();
            fe.categories = def.categories;
        } else {
            fe.width = 1;
            const auto& column = ds.numeric_cache_[i];
            double sum = 0.0;
            for (double v : column) sum += v;
            fe.mean = sum / static_cast<double>(m);
            fe.constant = std::all_of(column.begin(), column.end(),
                                      [&](double v) { return v == column.front(); });
            if (!fe.constant) {
                double sq = 0.0;
                for (double v : column) sq += (v - fe.mean) * (v - fe.mean);
                fe.stddev = std::sqrt(sq / static_cast<double>(m));
            }
        }
        offset += fe.width;
        encoding.features.push_back(std::move(fe));
    }
    encoding.width = offset;

    Matrix encoded(m, encoding.width);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureEncoding& fe = encoding.features[i];
        for (std::size_t r = 0; r < m; ++r) {
            if (fe.kind == FeatureKind::categorical) {
                encoded(r, fe.offset + ds.category_cache_[i][r]) = 1.0;
            } else if (!fe.constant) {
                encoded(r, fe.offset) = (ds.numeric_cache_[i][r] - fe.mean) / fe.stddev;
            }
        }
    }

    ds.schema_ = std::move(schema);
    ds.raw_ = std::move(raw);
    ds.label_tokens_ = std::move(label_tokens);
    ds.targets_ = std::move(targets);
    ds.encoded_ = std::move(encoded);
    ds.encoding_ = std::move(encoding);
    return ds;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
    std::ifstream file(path);
    if (!file.is_open()) {
        throw Error(errc::io_error, "cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(file, line)) {
        throw Error(errc::empty_dataset, "'" + path + "' is empty");
    }
    const auto header = split_csv_line(line);
    const std::size_t n = schema.feature_count();
    const std::size_t label_count = schema.label_count();
    if (header.size() != n + label_count) {
        throw Error(errc::missing_column,
                    "header has " + std::to_string(header.size()) + " columns, expected " +
                        std::to_string(n + label_count));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (header[i] != schema.features[i].name) {
            throw Error(errc::missing_column, "header column " + std::to_string(i + 1) +
                                                  " is '" + header[i] + "', expected '" +
                                                  schema.features[i].name + "'");
        }
    }
    for (std::size_t l = 0; l < label_count; ++l) {
        const std::string expected = "label:" + schema.labels[l];
        if (header[n + l] != expected) {
            throw Error(errc::missing_column, "header column " + std::to_string(n + l + 1) +
                                                  " is '" + header[n + l] + "', expected '" +
                                                  expected + "'");
        }
    }

    std::vector<std::vector<std::string>> raw;
    std::vector<std::vector<std::string>> label_tokens;
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != n + label_count) {
            throw Error(errc::type_mismatch,
                        "row " + std::to_string(raw.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(n + label_count));
        }
        raw.emplace_back(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n));
        label_tokens.emplace_back(cells.begin() + static_cast<std::ptrdiff_t>(n), cells.end());
    }
    if (raw.empty()) {
        throw Error(errc::empty_dataset, "'" + path + "' has no data rows");
    }
    return Dataset::from_rows(schema, std::move(raw), std::move(label_tokens));
}

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw Error(errc::io_error, "cannot write '" + path + "'");
    }
    const auto& schema = dataset.schema();
    for (std::size_t i = 0; i < schema.feature_count(); ++i) {
        if (i > 0) file << ',';
        file << schema.features[i].name;
    }
    for (const auto& label : schema.labels) {
        file << ",label:" << label;
    }
    file << '\n';
    for (std::size_t r = 0; r < dataset.sample_count(); ++r) {
        for (std::size_t i = 0; i < schema.feature_count(); ++i) {
            if (i > 0) file << ',';
            file << dataset.raw()[r][i];
        }
        for (std::size_t l = 0; l < schema.label_count(); ++l) {
            file << ',' << dataset.label_tokens()[r][l];
        }
        file << '\n';
    }
    if (!file.good()) {
        throw Error(errc::io_error, "failed while writing '" + path + "'");
    }
}

std::vector<ValueDomain> candidate_values(const Dataset& dataset, std::size_t grid_size) {
    if (grid_size < 2) {
        throw Error(errc::bad_config, "grid_size must be >= 2");
    }
    std::vector<ValueDomain> domains;
    const auto& schema = dataset.schema();
    for (std::size_t i = 0; i < schema.feature_count(); ++i) {
        const FeatureDef& def = schema.features[i];
        ValueDomain domain;
        domain.feature = def.name;
        if (def.kind == FeatureKind::categorical) {
            for (const auto& c : def.categories) domain.candidates.emplace_back(c);
        } else {
            std::vector<double> column(dataset.sample_count());
            for (std::size_t r = 0; r < column.size(); ++r) {
                column[r] = dataset.numeric_cell(r, i);
            }
            std::sort(column.begin(), column.end());
            const std::size_t m = column.size();
            double previous = 0.0;
            for (std::size_t k = 0; k < grid_size; ++k) {
                // Linear-interpolation quantile at position (k/(q-1)) * (m-1).
                const double pos = static_cast<double>(k) /
                                   static_cast<double>(grid_size - 1) *
                                   static_cast<double>(m - 1);
                const auto lo = static_cast<std::size_t>(std::floor(pos));
                const auto hi = static_cast<std::size_t>(std::ceil(pos));
                const double frac = pos - static_cast<double>(lo);
                const double q = column[lo] + frac * (column[hi] - column[lo]);
                if (k == 0 || q != previous) {
                    domain.candidates.emplace_back(q);
                    previous = q;
                }
            }
        }
        domains.push_back(std::move(domain));
    }
    return domains;
}

Dataset apply_assignment(const Dataset& dataset, const Assignment& assignment) {
    Dataset out = dataset;
    const auto& schema = dataset.schema();
    for (const auto& [name, value] : assignment.bindings) {
        const auto idx = schema.feature_index(name);
        if (!idx) {
            throw Error(errc::unknown_feature, "feature '" + name + "' not in schema");
        }
        const FeatureDef& def = schema.features[*idx];
        if (!def.contains(value)) {
            throw Error(errc::value_out_of_domain, "value '" + value_to_string(value) +
                                                       "' outside domain of feature '" + name +
                                                       "'");
        }
        const FeatureEncoding& fe = dataset.encoding().features[*idx];
        const std::string token = value_to_string(value);
        const std::size_t m = dataset.sample_count();
        if (def.kind == FeatureKind::categorical) {
            const auto& cat = std::get<std::string>(value);
            const auto cat_it = std::find(fe.categories.begin(), fe.categories.end(), cat);
            const auto cat_idx = static_cast<std::size_t>(cat_it - fe.categories.begin());
            for (std::size_t r = 0; r < m; ++r) {
                out.raw_[r][*idx] = token;
                out.category_cache_[*idx][r] = cat_idx;
                for (std::size_t c = 0; c < fe.width; ++c) {
                    out.encoded_(r, fe.offset + c) = c == cat_idx ? 1.0 : 0.0;
                }
            }
        } else {
            const double v = std::get<double>(value);
            // Original statistics; a constant column keeps its all-zero encoding.
            const double enc = fe.constant ? 0.0 : (v - fe.mean) / fe.stddev;
            for (std::size_t r = 0; r < m; ++r) {
                out.raw_[r][*idx] = token;
                out.numeric_cache_[*idx][r] = v;
                out.encoded_(r, fe.offset) = enc;
            }
        }
    }
    return out;
}

} // namespace ebco

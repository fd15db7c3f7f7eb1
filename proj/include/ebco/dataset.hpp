#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ebco/matrix.hpp"
#include "ebco/schema.hpp"

namespace ebco {

// How one feature maps into the encoded matrix: a contiguous column slice,
// one-hot for categorical features, a single z-scored column for numeric
// ones. Constant numeric columns encode to all zeros.
struct FeatureEncoding {
    std::string name;
    std::size_t offset = 0;
    std::size_t width = 0;
    FeatureKind kind = FeatureKind::categorical;
    std::vector<std::string> categories; // declaration order
    double mean = 0.0;
    double stddev = 0.0; // population stddev; 0 marks a constant column
    bool constant = false;
};

struct EncodingMap {
    std::vector<FeatureEncoding> features;
    std::size_t width = 0;
};

// Validated, encoded tabular multi-label dataset. Immutable after
// construction; all operations on it are pure.
class Dataset {
public:
    // Validates every cell against the schema and builds the encoded matrix.
    // `raw` holds the original feature cell tokens (m x n), `label_tokens`
    // the original label cell tokens (m x L, each "0" or "1"-valued).
    static Dataset from_rows(FeatureSchema schema,
                             std::vector<std::vector<std::string>> raw,
                             std::vector<std::vector<std::string>> label_tokens);

    const FeatureSchema& schema() const { return schema_; }
    std::size_t sample_count() const { return raw_.size(); }
    std::size_t feature_count() const { return schema_.feature_count(); }
    std::size_t label_count() const { return schema_.label_count(); }
    std::size_t encoded_width() const { return encoding_.width; }

    const Matrix& encoded() const { return encoded_; }
    const Matrix& targets() const { return targets_; }
    const EncodingMap& encoding() const { return encoding_; }

    const std::vector<std::vector<std::string>>& raw() const { return raw_; }
    const std::vector<std::vector<std::string>>& label_tokens() const { return label_tokens_; }

    // Parsed numeric cell; feature must be numeric.
    double numeric_cell(std::size_t row, std::size_t feature) const {
        return numeric_cache_[feature][row];
    }
    // Category index within the declared list; feature must be categorical.
    std::size_t category_index(std::size_t row, std::size_t feature) const {
        return category_cache_[feature][row];
    }

private:
    FeatureSchema schema_;
    std::vector<std::vector<std::string>> raw_;
    std::vector<std::vector<std::string>> label_tokens_;
    Matrix targets_;  // m x L, entries in {0,1}
    Matrix encoded_;  // m x p
    EncodingMap encoding_;
    std::vector<std::vector<double>> numeric_cache_;      // [feature][row]
    std::vector<std::vector<std::size_t>> category_cache_; // [feature][row]

    friend Dataset apply_assignment(const Dataset& dataset, const Assignment& assignment);
};

// CSV ingestion: UTF-8, comma-delimited, header row of feature names followed
// by "label:<name>" columns in schema order.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);
void write_csv(const Dataset& dataset, const std::string& path);

// Candidate value grid per feature: declared categories, or `grid_size`
// empirical quantiles (linear interpolation, duplicates collapsed).
std::vector<ValueDomain> candidate_values(const Dataset& dataset, std::size_t grid_size);

// Copy of the dataset with the assigned features overwritten in every sample
// and re-encoded using the ORIGINAL encoding map.
Dataset apply_assignment(const Dataset& dataset, const Assignment& assignment);

} // namespace ebco

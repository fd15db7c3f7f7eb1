#pragma once

#include <stdexcept>
#include <string>

namespace ebco {

// Error codes carried by every ebco exception. Grouped by module so the CLI
// can map them to exit statuses.
enum class errc {
    // dataset
    missing_column,
    type_mismatch,
    unknown_category,
    empty_dataset,
    invalid_spec,
    unknown_feature,
    value_out_of_domain,
    // model
    non_finite_loss,
    dimension_mismatch,
    // attribution
    too_many_features,
    // pruning
    unknown_value,
    // sensitivity
    degenerate_variance,
    // search
    capacity_exceeded,
    space_too_large,
    empty_domain,
    // cli / io
    io_error,
    bad_config,
    internal,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

} // namespace ebco

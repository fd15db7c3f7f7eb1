#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ebco/errors.hpp"

namespace ebco {

// Dense row-major double matrix. Sized for desk-scale problems; no BLAS.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void check_cols(std::size_t expected, const char* what) const {
        if (cols_ != expected) {
            throw Error(errc::dimension_mismatch,
                        std::string(what) + ": expected width " + std::to_string(expected) +
                            ", got " + std::to_string(cols_));
        }
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace ebco

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hallsand {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square compressed-sparse-row matrix. Column indices within each row are
/// strictly ascending, which fixes the summation order of every product.
class CsrMatrix {
public:
    CsrMatrix() = default;
    explicit CsrMatrix(std::size_t n) : n_(n), row_ptr_(n + 1, 0) {}

    /// Builds from unordered triplets. Duplicate coordinates are rejected
    /// with std::invalid_argument.
    static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);
    static CsrMatrix from_dense(std::size_t n, std::span<const double> row_major);

    std::size_t size() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<double> row_values(std::size_t i) noexcept {
        return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// Value at (i, j); zero when the entry is not stored.
    double at(std::size_t i, std::size_t j) const noexcept;

    /// Sum of row i, accumulated in ascending column order.
    double row_sum(std::size_t i) const noexcept;
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;

    CsrMatrix transpose() const;
    CsrMatrix scaled(double factor) const;
    std::vector<double> to_dense() const;

    bool operator==(const CsrMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

}  // namespace hallsand

#include "hallsand/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hallsand {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m(n);
    m.cols_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (e.row >= n || e.col >= n) {
            throw std::invalid_argument("triplet index out of range");
        }
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
            throw std::invalid_argument("duplicate entry (" + std::to_string(e.row) + ", " +
                                        std::to_string(e.col) + ")");
        }
        ++m.row_ptr_[e.row + 1];
        m.cols_.push_back(e.col);
        m.values_.push_back(e.value);
    }
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ptr_[i + 1] += m.row_ptr_[i];
    }
    return m;
}

CsrMatrix CsrMatrix::from_dense(std::size_t n, std::span<const double> row_major) {
    if (row_major.size() != n * n) {
        throw std::invalid_argument("dense matrix must be n x n");
    }
    std::vector<Triplet> entries;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = row_major[i * n + j];
            if (v != 0.0) entries.push_back({i, j, v});
        }
    }
    return from_triplets(n, std::move(entries));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const noexcept {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

double CsrMatrix::row_sum(std::size_t i) const noexcept {
    double total = 0.0;
    for (double v : row_values(i)) total += v;
    return total;
}

std::vector<double> CsrMatrix::row_sums() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = row_sum(i);
    return out;
}

std::vector<double> CsrMatrix::col_sums() const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] += vals[k];
    }
    return out;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        const std::size_t end = row_ptr_[i + 1];
        for (std::size_t k = row_ptr_[i]; k < end; ++k) acc += values_[k] * x[cols_[k]];
        y[i] = acc;
    }
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t(n_);
    t.cols_.resize(values_.size());
    t.values_.resize(values_.size());
    for (std::size_t c : cols_) ++t.row_ptr_[c + 1];
    for (std::size_t i = 0; i < n_; ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];

    // Walking source rows in ascending order keeps each transposed row sorted.
    std::vector<std::size_t> next(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t slot = next[cols_[k]]++;
            t.cols_[slot] = i;
            t.values_[slot] = values_[k];
        }
    }
    return t;
}

CsrMatrix CsrMatrix::scaled(double factor) const {
    CsrMatrix out = *this;
    for (double& v : out.values_) v *= factor;
    return out;
}

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> dense(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto cols = row_cols(i);
        const auto vals = row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) dense[i * n_ + cols[k]] = vals[k];
    }
    return dense;
}

}  // namespace hallsand

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hallsand {

struct CcdfPoint {
    std::uint64_t x;
    double prob;  ///< P(S >= x)
};

/// Empirical P(S >= x) at every distinct sample value, ascending in x.
/// Throws InputError on empty input.
std::vector<CcdfPoint> ccdf(std::span<const std::uint64_t> samples);

struct TailOptions {
    std::size_t min_tail = 50;
    /// Shift the lower cut-off by one half for integer data. Turning this off
    /// gives the plain continuous Hill estimator.
    bool discrete_correction = true;
};

/// Continuous Hill estimator 1 + n / sum ln(x / lower) over `tail`, all of
/// which must be >= lower > 0. Infinite when every sample equals `lower`.
double hill_alpha(std::span<const double> tail, double lower);

/// Hill estimate over samples >= x_min with lower bound x_min - 1/2 (or
/// x_min without the correction). Throws InputError with fewer than two
/// tail samples or x_min < 1.
double fit_alpha(std::span<const std::uint64_t> samples, std::uint64_t x_min, const TailOptions& options = {});

struct TailFit {
    std::uint64_t x_min = 0;
    std::size_t n_tail = 0;
    double alpha = 0.0;
    double ks_distance = 1.0;
    bool informative = false;
};

/// Model P(S >= x | S >= x_min) for the fitted exponent.
double model_ccdf(std::uint64_t x, std::uint64_t x_min, double alpha, const TailOptions& options = {});

/// KS distance between the empirical and model tail CCDFs, both conditioned
/// on S >= x_min, taken over the integer support of the tail.
double ks_distance(std::span<const std::uint64_t> samples, std::uint64_t x_min, double alpha,
                   const TailOptions& options = {});

/// Chooses x_min among distinct positive sample values whose tail holds at
/// least `min_tail` samples spread over three or more distinct values,
/// minimising the KS distance (ties go to the smaller x_min). Zeros are
/// ignored. When no candidate qualifies, or the positive sample has at most
/// two distinct values, the result is marked uninformative and describes
/// the fit at the smallest positive value.
TailFit select_xmin(std::span<const std::uint64_t> samples, const TailOptions& options = {});

}  // namespace hallsand

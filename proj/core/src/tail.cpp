#include "hallsand/tail.hpp"

#include "hallsand/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hallsand {

namespace {

struct Histogram {
    std::vector<std::uint64_t> value;  // ascending, distinct
    std::vector<std::size_t> count;
    std::vector<std::size_t> at_least;  // samples >= value[k]
};

Histogram histogram(std::span<const std::uint64_t> samples, std::uint64_t floor) {
    std::vector<std::uint64_t> sorted;
    sorted.reserve(samples.size());
    for (auto s : samples) {
        if (s >= floor) sorted.push_back(s);
    }
    std::sort(sorted.begin(), sorted.end());
    Histogram h;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        h.value.push_back(sorted[i]);
        h.count.push_back(j - i);
        i = j;
    }
    h.at_least.assign(h.value.size() + 1, 0);
    for (std::size_t k = h.value.size(); k-- > 0;) h.at_least[k] = h.at_least[k + 1] + h.count[k];
    h.at_least.pop_back();
    return h;
}

double lower_bound_of(std::uint64_t x_min, const TailOptions& options) {
    return static_cast<double>(x_min) - (options.discrete_correction ? 0.5 : 0.0);
}

// Hill estimate over the histogram entries from `first` on.
double alpha_from(const Histogram& h, std::size_t first, const TailOptions& options) {
    const double lower = lower_bound_of(h.value[first], options);
    double sum = 0.0;
    for (std::size_t k = first; k < h.value.size(); ++k) {
        sum += static_cast<double>(h.count[k]) * std::log(static_cast<double>(h.value[k]) / lower);
    }
    if (sum == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 + static_cast<double>(h.at_least[first]) / sum;
}

double ks_from(const Histogram& h, std::size_t first, double alpha, const TailOptions& options) {
    const double n = static_cast<double>(h.at_least[first]);
    const std::uint64_t x_min = h.value[first];
    double ks = 0.0;
    for (std::size_t k = first; k < h.value.size(); ++k) {
        const double here = static_cast<double>(h.at_least[k]) / n;
        const double after = k + 1 < h.value.size() ? static_cast<double>(h.at_least[k + 1]) / n : 0.0;
        ks = std::max(ks, std::abs(here - model_ccdf(h.value[k], x_min, alpha, options)));
        ks = std::max(ks, std::abs(after - model_ccdf(h.value[k] + 1, x_min, alpha, options)));
    }
    return std::min(ks, 1.0);
}

// Histogram of samples >= x_min whose first bin sits exactly at x_min
// (possibly empty), so x_min need not be a sample value.
Histogram anchored(std::span<const std::uint64_t> samples, std::uint64_t x_min) {
    auto h = histogram(samples, x_min);
    if (h.value.empty() || h.value[0] == x_min) return h;
    h.value.insert(h.value.begin(), x_min);
    h.count.insert(h.count.begin(), 0);
    const std::size_t total = h.at_least[0];
    h.at_least.insert(h.at_least.begin(), total);
    return h;
}

}  // namespace

std::vector<CcdfPoint> ccdf(std::span<const std::uint64_t> samples) {
    if (samples.empty()) throw InputError("ccdf of an empty sample");
    const auto h = histogram(samples, 0);
    const double n = static_cast<double>(samples.size());
    std::vector<CcdfPoint> out;
    out.reserve(h.value.size());
    for (std::size_t k = 0; k < h.value.size(); ++k) {
        out.push_back({h.value[k], static_cast<double>(h.at_least[k]) / n});
    }
    return out;
}

double hill_alpha(std::span<const double> tail, double lower) {
    if (!(lower > 0.0)) throw InputError("Hill estimator needs a positive lower bound");
    if (tail.empty()) throw InputError("Hill estimator needs at least one sample");
    double sum = 0.0;
    for (double x : tail) {
        if (!(x >= lower)) throw InputError("tail sample below the lower bound");
        sum += std::log(x / lower);
    }
    if (sum == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 + static_cast<double>(tail.size()) / sum;
}

double fit_alpha(std::span<const std::uint64_t> samples, std::uint64_t x_min, const TailOptions& options) {
    if (x_min < 1) throw InputError("x_min must be >= 1");
    const auto h = anchored(samples, x_min);
    if (h.value.empty() || h.at_least[0] < 2) {
        throw InputError("need at least two samples >= x_min to fit a tail exponent");
    }
    return alpha_from(h, 0, options);
}

double model_ccdf(std::uint64_t x, std::uint64_t x_min, double alpha, const TailOptions& options) {
    if (x <= x_min) return 1.0;
    if (std::isinf(alpha)) return 0.0;
    const double shift = options.discrete_correction ? 0.5 : 0.0;
    const double ratio = (static_cast<double>(x) - shift) / (static_cast<double>(x_min) - shift);
    return std::pow(ratio, -(alpha - 1.0));
}

double ks_distance(std::span<const std::uint64_t> samples, std::uint64_t x_min, double alpha,
                   const TailOptions& options) {
    const auto h = anchored(samples, x_min);
    if (h.value.empty()) throw InputError("no samples >= x_min");
    return ks_from(h, 0, alpha, options);
}

TailFit select_xmin(std::span<const std::uint64_t> samples, const TailOptions& options) {
    const auto h = histogram(samples, 1);
    TailFit best;
    if (h.value.empty()) return best;

    const std::size_t distinct = h.value.size();
    bool found = false;
    if (distinct > 2) {
        for (std::size_t k = 0; k + 2 < distinct; ++k) {
            if (h.at_least[k] < options.min_tail) break;
            const double alpha = alpha_from(h, k, options);
            const double ks = ks_from(h, k, alpha, options);
            if (!found || ks < best.ks_distance) {
                best = {h.value[k], h.at_least[k], alpha, ks, true};
                found = true;
            }
        }
    }
    if (found) return best;

    best.x_min = h.value[0];
    best.n_tail = h.at_least[0];
    best.alpha = best.n_tail >= 2 ? alpha_from(h, 0, options) : std::numeric_limits<double>::quiet_NaN();
    best.ks_distance = std::isnan(best.alpha) ? 1.0 : ks_from(h, 0, best.alpha, options);
    best.informative = false;
    return best;
}

}  // namespace hallsand

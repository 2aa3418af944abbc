#include "hallsand/operators.hpp"

#include "hallsand/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hallsand {

std::string_view to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::RowShare: return "row-share";
        case OperatorKind::LeakageAdjusted: return "leakage-adjusted";
        case OperatorKind::MaxRow: return "max-row";
    }
    return "unknown";
}

std::optional<OperatorKind> parse_operator_kind(std::string_view text) {
    if (text == "share" || text == "row-share") return OperatorKind::RowShare;
    if (text == "leak" || text == "leakage-adjusted") return OperatorKind::LeakageAdjusted;
    if (text == "max" || text == "max-row") return OperatorKind::MaxRow;
    return std::nullopt;
}

LeakageProfile leakage_profile(const IOTable& table) {
    LeakageProfile profile;
    const std::size_t n = table.size();
    profile.leak.assign(n, 0.0);
    const auto out = table.outflows();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (out[i] > 0.0) {
            if (!(table.row_use_total[i] > 0.0)) {
                throw InputError("node " + node_label(table.nodes[i]) +
                                 " has outflows but zero gross use");
            }
            profile.leak[i] = std::clamp(out[i] / table.row_use_total[i], 0.0, 1.0);
        }
        total += profile.leak[i];
    }
    profile.mean_leakage = n > 0 ? total / static_cast<double>(n) : 0.0;
    return profile;
}

PropagationOperator build_operator(const IOTable& table, OperatorKind kind,
                                   const SpectralOptions& spectral) {
    PropagationOperator op;
    op.kind = kind;
    op.year = table.year;
    op.matrix = table.flows;

    const std::size_t n = table.size();
    const auto out = table.outflows();

    switch (kind) {
        case OperatorKind::RowShare:
            for (std::size_t i = 0; i < n; ++i) {
                for (double& v : op.matrix.row_values(i)) v = out[i] > 0.0 ? v / out[i] : 0.0;
            }
            break;
        case OperatorKind::LeakageAdjusted: {
            const auto profile = leakage_profile(table);
            for (std::size_t i = 0; i < n; ++i) {
                for (double& v : op.matrix.row_values(i)) {
                    v = out[i] > 0.0 ? profile.leak[i] * (v / out[i]) : 0.0;
                }
            }
            break;
        }
        case OperatorKind::MaxRow: {
            const double largest = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
            for (std::size_t i = 0; i < n; ++i) {
                for (double& v : op.matrix.row_values(i)) v = largest > 0.0 ? v / largest : 0.0;
            }
            break;
        }
    }

    op.spectral_radius = spectral_radius(op.matrix, spectral);
    return op;
}

namespace {

// Strongly connected components of the positive-entry pattern (iterative
// Tarjan). Components are returned in discovery order; nodes within a
// component are sorted ascending.
std::vector<std::vector<std::size_t>> strong_components(const CsrMatrix& m) {
    const std::size_t n = m.size();
    constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order(n, kUnvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next edge offset)
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (order[root] != kUnvisited) continue;
        call.emplace_back(root, 0);
        order[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            const auto cols = m.row_cols(v);
            const auto vals = m.row_values(v);
            if (edge < cols.size()) {
                const std::size_t w = cols[edge];
                const bool positive = vals[edge] > 0.0;
                ++edge;
                if (!positive) continue;
                if (order[w] == kUnvisited) {
                    order[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], order[w]);
                }
                continue;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) {
                const std::size_t parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == order[done]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

// Shifted power iteration on an irreducible non-negative block.
double irreducible_radius(const CsrMatrix& block, const SpectralOptions& options) {
    const std::size_t n = block.size();
    const auto sums = block.row_sums();
    const double max_row = *std::max_element(sums.begin(), sums.end());
    if (max_row == 0.0) return 0.0;

    const double shift = 0.5 * max_row;
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::vector<double> y(n);

    double previous = 0.0;
    double estimate = 0.0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        block.multiply(x, y);
        double norm = 0.0;
        // Collatz-Wielandt: min and max of (Mx)_i / x_i bracket the Perron root.
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += shift * x[i];
            norm += y[i];
            const double r = y[i] / x[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        previous = estimate;
        estimate = 0.5 * (lo + hi) - shift;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (hi - lo < options.tol) return std::max(0.0, estimate);
    }
    throw ConvergenceError("power iteration did not converge in " + std::to_string(options.max_iter) +
                               " iterations (last estimates " + std::to_string(previous) + ", " +
                               std::to_string(estimate) + ")",
                           previous, estimate);
}

}  // namespace

double spectral_radius(const CsrMatrix& matrix, const SpectralOptions& options) {
    if (!(options.tol > 0.0)) throw InputError("spectral tolerance must be positive");
    if (options.max_iter < 1) throw InputError("max_iter must be at least 1");
    const std::size_t n = matrix.size();
    if (n == 0) return 0.0;

    // The spectrum of a reducible matrix is the union of the spectra of its
    // irreducible diagonal blocks, and every block has a positive Perron vector.
    double radius = 0.0;
    std::vector<std::size_t> local(n);
    for (const auto& comp : strong_components(matrix)) {
        if (comp.size() == 1) {
            radius = std::max(radius, matrix.at(comp[0], comp[0]));
            continue;
        }
        for (std::size_t k = 0; k < comp.size(); ++k) local[comp[k]] = k;
        std::vector<Triplet> entries;
        for (std::size_t k = 0; k < comp.size(); ++k) {
            const auto cols = matrix.row_cols(comp[k]);
            const auto vals = matrix.row_values(comp[k]);
            for (std::size_t e = 0; e < cols.size(); ++e) {
                if (vals[e] > 0.0 && std::binary_search(comp.begin(), comp.end(), cols[e])) {
                    entries.push_back({k, local[cols[e]], vals[e]});
                }
            }
        }
        const auto block = CsrMatrix::from_triplets(comp.size(), std::move(entries));
        radius = std::max(radius, irreducible_radius(block, options));
    }
    return radius;
}

}  // namespace hallsand

#include "hallsand/exposure.hpp"

#include "hallsand/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hallsand {

std::vector<double> flow_share(const IOTable& table) {
    const double total = table.total_flow();
    if (!(total > 0.0)) throw InputError("flow share undefined: table has no positive flows");
    const auto out = table.outflows();
    const auto in = table.inflows();
    std::vector<double> share(table.size());
    for (std::size_t i = 0; i < share.size(); ++i) share[i] = (out[i] + in[i]) / (2.0 * total);
    return share;
}

std::vector<double> outflow_hhi(const IOTable& table) {
    const auto out = table.outflows();
    std::vector<double> hhi(table.size(), 1.0);
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(out[i] > 0.0)) continue;
        double h = 0.0;
        for (double z : table.flows.row_values(i)) {
            const double p = z / out[i];
            h += p * p;
        }
        hhi[i] = h;
    }
    return hhi;
}

std::vector<double> inflow_hhi(const IOTable& table) {
    const auto in = table.inflows();
    std::vector<double> hhi(table.size(), 0.0);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto cols = table.flows.row_cols(i);
        const auto vals = table.flows.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t j = cols[k];
            if (in[j] > 0.0) {
                const double p = vals[k] / in[j];
                hhi[j] += p * p;
            }
        }
    }
    for (std::size_t j = 0; j < hhi.size(); ++j) {
        if (!(in[j] > 0.0)) hhi[j] = 1.0;
    }
    return hhi;
}

std::vector<double> redundancy(const IOTable& table, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InputError("redundancy floor must be in (0, 1)");
    const auto out = table.outflows();
    const auto hhi = outflow_hhi(table);
    const std::size_t n = table.size();

    std::vector<double> raw(n, 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(out[i] > 0.0)) continue;
        raw[i] = (1.0 - hhi[i]) / hhi[i];
        lo = std::min(lo, raw[i]);
        hi = std::max(hi, raw[i]);
    }

    std::vector<double> d(n, floor);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(out[i] > 0.0)) continue;
        const double scaled = hi > lo ? (raw[i] - lo) / (hi - lo) : (raw[i] > 0.0 ? 1.0 : 0.0);
        d[i] = floor + (1.0 - floor) * scaled;
    }
    return d;
}

std::vector<double> capacity(const IOTable& table, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InputError("capacity floor must be in (0, 1)");
    const auto hhi = inflow_hhi(table);
    std::vector<double> c(table.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::max(floor, 1.0 - hhi[i]);
    return c;
}

ExposureProfile compute_exposure(const IOTable& table, const ExposureOptions& options) {
    if (!(options.epsilon > 0.0)) throw InputError("epsilon must be positive");
    ExposureProfile p;
    p.epsilon = options.epsilon;
    p.flow_share = flow_share(table);
    p.hhi_out = outflow_hhi(table);
    p.hhi_in = inflow_hhi(table);
    p.redundancy = redundancy(table, options.redundancy_floor);
    p.capacity = capacity(table, options.capacity_floor);
    p.resistance.resize(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        p.resistance[i] = 1.0 / (p.redundancy[i] * p.capacity[i] + options.epsilon);
    }
    return p;
}

HallStress hall_stress(double field, const ExposureProfile& profile) {
    if (!(field >= 0.0)) throw InputError("field intensity must be non-negative");
    const std::size_t n = profile.size();
    HallStress h;
    h.stress.resize(n);
    h.relative.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        h.stress[i] = field * profile.flow_share[i] /
                      (profile.redundancy[i] * profile.capacity[i] + profile.epsilon);
        total += h.stress[i];
    }
    if (total > 0.0) {
        for (std::size_t i = 0; i < n; ++i) h.relative[i] = h.stress[i] / total;
    }
    return h;
}

std::vector<RankedNode> rank_exposure(const ExposureProfile& profile, std::span<const double> relative,
                                      std::size_t k) {
    if (k == 0) throw InputError("rank_exposure needs k >= 1");
    std::vector<std::size_t> order(relative.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return relative[a] != relative[b] ? relative[a] > relative[b] : a < b;
                      });
    std::vector<RankedNode> top;
    top.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t i = order[r];
        top.push_back({i, profile.flow_share[i], profile.resistance[i], relative[i]});
    }
    return top;
}

}  // namespace hallsand

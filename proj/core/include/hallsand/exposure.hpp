#pragma once

#include "hallsand/ingest.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hallsand {

struct ExposureOptions {
    double redundancy_floor = 0.05;
    double capacity_floor = 0.05;
    double epsilon = 1e-6;
};

/// Node-level quantities that convert an external field into transversal
/// stress. All vectors have one entry per node.
struct ExposureProfile {
    std::vector<double> flow_share;   ///< I: share of intermediate flow through the node
    std::vector<double> hhi_out;      ///< concentration of outgoing flow (1 for empty rows)
    std::vector<double> hhi_in;       ///< concentration of incoming flow (1 for empty columns)
    std::vector<double> redundancy;   ///< D in [floor, 1]
    std::vector<double> capacity;     ///< C in [floor, 1]
    std::vector<double> resistance;   ///< R = 1 / (D C + epsilon)
    double epsilon = 1e-6;

    std::size_t size() const noexcept { return flow_share.size(); }
};

struct HallStress {
    std::vector<double> stress;    ///< H
    std::vector<double> relative;  ///< H / sum H, all zero when sum H = 0
};

/// I_i = (out_i + in_i) / (2 * total flow). Throws InputError for an
/// all-zero table.
std::vector<double> flow_share(const IOTable& table);

/// Outgoing Herfindahl index per node.
std::vector<double> outflow_hhi(const IOTable& table);
/// Incoming Herfindahl index per node.
std::vector<double> inflow_hhi(const IOTable& table);

/// Inverse-Herfindahl redundancy (1 - HHI) / HHI, min-max scaled to
/// [floor, 1] over nodes that have outflows. Nodes without outflows sit at
/// the floor; when every scaled node has the same raw value, nodes with
/// positive raw redundancy get 1 and single-destination nodes the floor.
std::vector<double> redundancy(const IOTable& table, double floor);

/// C_i = max(floor, 1 - HHI_in). Nodes without inflows get the floor.
std::vector<double> capacity(const IOTable& table, double floor);

ExposureProfile compute_exposure(const IOTable& table, const ExposureOptions& options = {});

/// H_i = B I_i / (D_i C_i + epsilon) and its normalisation.
HallStress hall_stress(double field, const ExposureProfile& profile);

struct RankedNode {
    std::size_t index;
    double flow_share;
    double resistance;
    double relative_exposure;
};

/// Top-k nodes by relative exposure, descending; ties go to the lower index.
std::vector<RankedNode> rank_exposure(const ExposureProfile& profile, std::span<const double> relative,
                                      std::size_t k);

}  // namespace hallsand

#pragma once

#include "hallsand/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hallsand {

/// A country-sector production unit. `index` is the dense position of the
/// node in its table; indices follow lexicographic (country, sector) order.
struct NodeId {
    std::string country;
    std::string sector;
    std::size_t index = 0;

    bool operator==(const NodeId&) const = default;
};

/// "CHN_C26"-style label. Countries never contain '_', so the first
/// underscore separates the two parts even for sectors like "C31_C32".
std::string node_label(const NodeId& node);

/// One year of intermediate flows. `flows(i, j)` is the flow from node i to
/// node j; `row_use_total[i]` is the gross row-use proxy of node i, in the
/// same monetary units, and is never below node i's intermediate outflow.
struct IOTable {
    int year = 0;
    std::vector<NodeId> nodes;
    CsrMatrix flows;
    std::vector<double> row_use_total;

    std::size_t size() const noexcept { return nodes.size(); }

    std::optional<std::size_t> find(std::string_view country, std::string_view sector) const;
    /// Inverse of node_label. Throws InputError for unknown labels.
    std::size_t index_of_label(std::string_view label) const;

    std::vector<double> outflows() const { return flows.row_sums(); }
    std::vector<double> inflows() const { return flows.col_sums(); }
    double total_flow() const;

    /// Checks every structural invariant; throws InputError on the first
    /// violation.
    void validate() const;

    bool operator==(const IOTable&) const = default;
};

/// Reads one year from a long-format flow file
/// (`year,src_country,src_sector,dst_country,dst_sector,value`).
///
/// Gross row use comes from `row_use` when given, otherwise from a sibling
/// `row_use.csv` next to the flow file if one exists. Nodes missing from the
/// row-use data get their own outflow as gross use, i.e. no leakage.
IOTable parse_io_table(const std::filesystem::path& flows_path, int year,
                       std::optional<std::filesystem::path> row_use = std::nullopt);

/// Distinct years present in a flow file, ascending.
std::vector<int> list_years(const std::filesystem::path& flows_path);

void write_flows_csv(std::span<const IOTable> tables, std::ostream& out);
void write_row_use_csv(std::span<const IOTable> tables, std::ostream& out);

/// Writes `flows.csv` and `row_use.csv` into `dir`, creating it if needed.
void write_io_tables(std::span<const IOTable> tables, const std::filesystem::path& dir);

/// Seed-reproducible synthetic substrate.
///
/// Node sizes are log-normal, the link pattern is Bernoulli(density) without
/// self-loops, and link weights are balanced so that leakage averages 0.373
/// while high-leakage nodes receive slightly less of the network's stress
/// inflow. That keeps the leakage-adjusted spectral radius near 0.33.
IOTable synth_substrate(std::size_t n, double density, std::uint64_t seed, int year = 2014);

}  // namespace hallsand

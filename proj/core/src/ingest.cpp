#include "hallsand/ingest.hpp"

#include "hallsand/csv.hpp"
#include "hallsand/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <utility>

namespace hallsand {

namespace {

constexpr std::string_view kFlowsHeader = "year,src_country,src_sector,dst_country,dst_sector,value";
constexpr std::string_view kRowUseHeader = "year,country,sector,gross_use";

// Relative slack when comparing gross use against intermediate outflow, so
// that converted tables with rounded totals are not rejected.
constexpr double kGrossUseSlack = 1e-9;

using NodeKey = std::pair<std::string, std::string>;

std::string where(const std::filesystem::path& path, std::size_t line_no) {
    return path.string() + ":" + std::to_string(line_no);
}

void check_header(const std::vector<std::string>& lines, std::string_view expected,
                  const std::filesystem::path& path) {
    if (lines.empty()) throw InputError(path.string() + ": empty file, no edges");
    const auto got = csv::split(lines.front());
    const auto want = csv::split(expected);
    if (got != want) {
        throw InputError(path.string() + ": expected header '" + std::string(expected) + "'");
    }
}

bool valid_country(std::string_view c) {
    return c.size() == 3 && std::all_of(c.begin(), c.end(), [](char ch) {
               return (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9');
           });
}

bool valid_sector(std::string_view s) {
    return !s.empty() && s.find(',') == std::string_view::npos;
}

struct FlowRow {
    std::size_t line_no;
    NodeKey src;
    NodeKey dst;
    double value;
};

}  // namespace

std::string node_label(const NodeId& node) { return node.country + "_" + node.sector; }

std::optional<std::size_t> IOTable::find(std::string_view country, std::string_view sector) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), std::pair(country, sector),
                                     [](const NodeId& n, const auto& key) {
                                         return std::pair<std::string_view, std::string_view>(
                                                    n.country, n.sector) < key;
                                     });
    if (it == nodes.end() || it->country != country || it->sector != sector) return std::nullopt;
    return it->index;
}

std::size_t IOTable::index_of_label(std::string_view label) const {
    const auto underscore = label.find('_');
    if (underscore != std::string_view::npos) {
        if (auto idx = find(label.substr(0, underscore), label.substr(underscore + 1))) return *idx;
    }
    throw InputError("unknown node label '" + std::string(label) + "'");
}

double IOTable::total_flow() const {
    double total = 0.0;
    for (double v : flows.row_sums()) total += v;
    return total;
}

void IOTable::validate() const {
    const std::size_t n = nodes.size();
    if (n == 0) throw InputError("table has no nodes");
    if (flows.size() != n) throw InputError("flow matrix is not n x n");
    if (row_use_total.size() != n) throw InputError("row-use vector has wrong length");
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].index != i) throw InputError("node indices are not contiguous");
        if (i > 0 && !(std::tie(nodes[i - 1].country, nodes[i - 1].sector) <
                       std::tie(nodes[i].country, nodes[i].sector))) {
            throw InputError("nodes are not in strict lexicographic order");
        }
        for (double v : flows.row_values(i)) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InputError("negative or non-finite flow in row of " + node_label(nodes[i]));
            }
        }
        const double out = flows.row_sum(i);
        if (!(row_use_total[i] >= out)) {
            throw InputError("gross use below intermediate outflow for " + node_label(nodes[i]));
        }
    }
}

std::vector<int> list_years(const std::filesystem::path& flows_path) {
    const auto lines = csv::read_lines(flows_path);
    check_header(lines, kFlowsHeader, flows_path);
    std::set<int> years;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const auto fields = csv::split(lines[k]);
        const auto y = csv::parse_int(fields.front());
        if (!y) throw InputError(where(flows_path, k + 1) + ": bad year");
        years.insert(static_cast<int>(*y));
    }
    return {years.begin(), years.end()};
}

IOTable parse_io_table(const std::filesystem::path& flows_path, int year,
                       std::optional<std::filesystem::path> row_use) {
    const auto lines = csv::read_lines(flows_path);
    check_header(lines, kFlowsHeader, flows_path);

    std::vector<FlowRow> rows;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const std::size_t line_no = k + 1;
        const auto f = csv::split(lines[k]);
        if (f.size() != 6) throw InputError(where(flows_path, line_no) + ": expected 6 fields");
        const auto y = csv::parse_int(f[0]);
        const auto value = csv::parse_double(f[5]);
        if (!y) throw InputError(where(flows_path, line_no) + ": bad year '" + std::string(f[0]) + "'");
        if (!value) {
            throw InputError(where(flows_path, line_no) + ": bad value '" + std::string(f[5]) + "'");
        }
        if (*value < 0.0) {
            throw InputError(where(flows_path, line_no) + ": negative flow value " + std::string(f[5]));
        }
        if (!valid_country(f[1]) || !valid_country(f[3])) {
            throw InputError(where(flows_path, line_no) + ": country codes must be 3 alphanumerics");
        }
        if (!valid_sector(f[2]) || !valid_sector(f[4])) {
            throw InputError(where(flows_path, line_no) + ": empty sector code");
        }
        if (*y != year) continue;
        rows.push_back({line_no, {std::string(f[1]), std::string(f[2])},
                        {std::string(f[3]), std::string(f[4])}, *value});
    }
    if (rows.empty()) {
        throw InputError(flows_path.string() + ": no edges for year " + std::to_string(year));
    }

    std::map<NodeKey, std::size_t> index;
    for (const auto& r : rows) {
        index.emplace(r.src, 0);
        index.emplace(r.dst, 0);
    }
    IOTable table;
    table.year = year;
    for (auto& [key, idx] : index) {
        idx = table.nodes.size();
        table.nodes.push_back({key.first, key.second, idx});
    }

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
    std::vector<Triplet> entries;
    entries.reserve(rows.size());
    for (const auto& r : rows) {
        const std::size_t i = index.at(r.src);
        const std::size_t j = index.at(r.dst);
        const auto [it, inserted] = seen.emplace(std::pair(i, j), r.line_no);
        if (!inserted) {
            throw InputError(where(flows_path, r.line_no) + ": duplicate flow " +
                             node_label(table.nodes[i]) + " -> " + node_label(table.nodes[j]) +
                             " (first seen on line " + std::to_string(it->second) + ")");
        }
        entries.push_back({i, j, r.value});
    }
    table.flows = CsrMatrix::from_triplets(table.nodes.size(), std::move(entries));
    table.row_use_total = table.outflows();

    if (!row_use) {
        auto sibling = flows_path.parent_path() / "row_use.csv";
        if (std::filesystem::exists(sibling)) row_use = sibling;
    }
    if (row_use) {
        const auto use_lines = csv::read_lines(*row_use);
        check_header(use_lines, kRowUseHeader, *row_use);
        std::vector<bool> assigned(table.size(), false);
        for (std::size_t k = 1; k < use_lines.size(); ++k) {
            if (use_lines[k].empty()) continue;
            const std::size_t line_no = k + 1;
            const auto f = csv::split(use_lines[k]);
            if (f.size() != 4) throw InputError(where(*row_use, line_no) + ": expected 4 fields");
            const auto y = csv::parse_int(f[0]);
            const auto gross = csv::parse_double(f[3]);
            if (!y || !gross) throw InputError(where(*row_use, line_no) + ": malformed row");
            if (*y != year) continue;
            const auto idx = table.find(f[1], f[2]);
            if (!idx) {
                throw InputError(where(*row_use, line_no) + ": unknown node " + std::string(f[1]) +
                                 "_" + std::string(f[2]));
            }
            if (assigned[*idx]) throw InputError(where(*row_use, line_no) + ": duplicate node");
            const double out = table.row_use_total[*idx];
            if (*gross < 0.0 || *gross < out * (1.0 - kGrossUseSlack)) {
                throw InputError(where(*row_use, line_no) + ": gross use " + std::string(f[3]) +
                                 " below intermediate outflow " + csv::format(out));
            }
            table.row_use_total[*idx] = std::max(*gross, out);
            assigned[*idx] = true;
        }
    }

    table.validate();
    return table;
}

void write_flows_csv(std::span<const IOTable> tables, std::ostream& out) {
    csv::Writer w(out);
    w.header({"year", "src_country", "src_sector", "dst_country", "dst_sector", "value"});
    for (const auto& t : tables) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto cols = t.flows.row_cols(i);
            const auto vals = t.flows.row_values(i);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto& src = t.nodes[i];
                const auto& dst = t.nodes[cols[k]];
                w.field(static_cast<std::int64_t>(t.year))
                    .field(src.country)
                    .field(src.sector)
                    .field(dst.country)
                    .field(dst.sector)
                    .field(vals[k]);
                w.end_row();
            }
        }
    }
}

void write_row_use_csv(std::span<const IOTable> tables, std::ostream& out) {
    csv::Writer w(out);
    w.header({"year", "country", "sector", "gross_use"});
    for (const auto& t : tables) {
        for (const auto& node : t.nodes) {
            w.field(static_cast<std::int64_t>(t.year))
                .field(node.country)
                .field(node.sector)
                .field(t.row_use_total[node.index]);
            w.end_row();
        }
    }
}

void write_io_tables(std::span<const IOTable> tables, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream flows(dir / "flows.csv");
    std::ofstream use(dir / "row_use.csv");
    if (!flows || !use) throw InputError("cannot write into " + dir.string());
    write_flows_csv(tables, flows);
    write_row_use_csv(tables, use);
}

namespace {

constexpr double kTargetLeakage = 0.373;
constexpr double kLeakageSpread = 0.2;     // std dev of node leakage
constexpr double kInflowTilt = 0.35;       // inflow share falls as leakage rises
constexpr std::size_t kSectorsPerCountry = 5;

std::string country_code(std::size_t c) {
    std::string code(3, 'A');
    for (int pos = 2; pos >= 0; --pos) {
        code[static_cast<std::size_t>(pos)] = static_cast<char>('A' + c % 26);
        c /= 26;
    }
    return code;
}

std::string sector_code(std::size_t s) {
    std::string code = std::to_string(s + 1);
    return "S" + std::string(code.size() < 2 ? 2 - code.size() : 0, '0') + code;
}

}  // namespace

IOTable synth_substrate(std::size_t n, double density, std::uint64_t seed, int year) {
    if (n < 2) throw InputError("synthetic substrate needs n >= 2");
    if (!(density > 0.0 && density <= 1.0)) throw InputError("density must be in (0, 1]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.5, 1.5);
    std::lognormal_distribution<double> size_dist(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> other(0, n - 2);

    IOTable table;
    table.year = year;
    for (std::size_t i = 0; i < n; ++i) {
        table.nodes.push_back({country_code(i / kSectorsPerCountry), sector_code(i % kSectorsPerCountry), i});
    }

    std::vector<double> size(n);
    for (auto& s : size) s = size_dist(rng);

    // Link pattern; every node gets at least one supplier and one customer.
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    std::vector<std::size_t> in_degree(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (unit(rng) < density) {
                rows[i].emplace_back(j, weight(rng));
                ++in_degree[j];
            }
        }
    }
    auto pick_other = [&](std::size_t self) {
        std::size_t j = other(rng);
        return j >= self ? j + 1 : j;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].empty()) {
            const std::size_t j = pick_other(i);
            rows[i].emplace_back(j, weight(rng));
            ++in_degree[j];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (in_degree[j] == 0) {
            const std::size_t i = pick_other(j);
            rows[i].emplace_back(j, weight(rng));
            ++in_degree[j];
        }
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());

    std::vector<double> leak(n);
    for (auto& l : leak) {
        l = std::clamp(kTargetLeakage + kLeakageSpread * std::sqrt(12.0) * (unit(rng) - 0.5), 0.02, 0.98);
    }
    double leak_sum = 0.0;
    for (double l : leak) leak_sum += l;
    for (auto& l : leak) l = std::min(1.0, l * kTargetLeakage * static_cast<double>(n) / leak_sum);
    leak_sum = 0.0;
    for (double l : leak) leak_sum += l;

    std::vector<double> inflow_target(n);
    double target_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        inflow_target[j] = std::max(1e-3, kTargetLeakage - kInflowTilt * (leak[j] - kTargetLeakage));
        target_sum += inflow_target[j];
    }
    for (auto& t : inflow_target) t *= leak_sum / target_sum;

    // Sinkhorn balancing of leak_i * w_ij towards row sums leak_i and column
    // sums inflow_target_j. Sparse patterns may not admit an exact solution,
    // so the loop is capped and rows are renormalised exactly afterwards.
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& [j, w] : rows[i]) w *= leak[i];
    }
    std::vector<double> col(n);
    for (int iter = 0; iter < 1000; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& e : rows[i]) s += e.second;
            for (auto& e : rows[i]) e.second *= leak[i] / s;
        }
        std::fill(col.begin(), col.end(), 0.0);
        for (const auto& r : rows) {
            for (const auto& [j, w] : r) col[j] += w;
        }
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(col[j] / inflow_target[j] - 1.0));
        if (worst < 1e-12) break;
        for (auto& r : rows) {
            for (auto& [j, w] : r) w *= inflow_target[j] / col[j];
        }
    }

    constexpr double kScale = 1000.0;  // monetary units per unit of node size
    std::vector<Triplet> entries;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& e : rows[i]) s += e.second;
        for (const auto& [j, w] : rows[i]) entries.push_back({i, j, kScale * size[i] * (w / s)});
    }
    table.flows = CsrMatrix::from_triplets(n, std::move(entries));

    table.row_use_total = table.outflows();
    for (std::size_t i = 0; i < n; ++i) {
        // Guard against rounding pushing the ratio above one.
        table.row_use_total[i] = std::max(table.row_use_total[i], table.row_use_total[i] / leak[i]);
    }
    table.validate();
    return table;
}

}  // namespace hallsand

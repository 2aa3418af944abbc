#include "hallsand/report.hpp"

#include "hallsand/csv.hpp"
#include "hallsand/error.hpp"
#include "hallsand/operators.hpp"

#include <algorithm>

namespace hallsand {

PanelRow panel_row(const IOTable& table, const ExposureOptions& exposure, const SpectralOptions& spectral) {
    PanelRow row;
    row.year = table.year;
    row.rho_share = build_operator(table, OperatorKind::RowShare, spectral).spectral_radius;
    row.rho_leak = build_operator(table, OperatorKind::LeakageAdjusted, spectral).spectral_radius;
    row.rho_max = build_operator(table, OperatorKind::MaxRow, spectral).spectral_radius;
    row.mean_leakage = leakage_profile(table).mean_leakage;

    const auto profile = compute_exposure(table, exposure);
    auto rel = hall_stress(1.0, profile).relative;
    double total = 0.0;
    for (double v : rel) total += v;
    row.mean_Hrel = rel.empty() ? 0.0 : total / static_cast<double>(rel.size());
    if (!rel.empty()) {
        std::sort(rel.begin(), rel.end());
        std::size_t rank = (95 * rel.size() + 99) / 100;
        row.p95_Hrel = rel[std::max<std::size_t>(rank, 1) - 1];
    }
    return row;
}

void write_panel_csv(std::span<const PanelRow> rows, std::ostream& out) {
    csv::Writer w(out);
    w.header({"year", "rho_share", "rho_leak", "rho_max", "mean_leakage", "mean_Hrel", "p95_Hrel"});
    for (const auto& r : rows) {
        w.field(r.year).field(r.rho_share).field(r.rho_leak).field(r.rho_max);
        w.field(r.mean_leakage).field(r.mean_Hrel).field(r.p95_Hrel);
        w.end_row();
    }
}

void write_exposure_csv(const IOTable& table, const ExposureProfile& p, const HallStress& hall, std::ostream& out) {
    csv::Writer w(out);
    w.header({"node", "country", "sector", "I", "HHI_out", "HHI_in", "D", "C", "R", "H", "H_rel"});
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& node = table.nodes[i];
        w.field(node_label(node)).field(node.country).field(node.sector);
        w.field(p.flow_share[i]).field(p.hhi_out[i]).field(p.hhi_in[i]);
        w.field(p.redundancy[i]).field(p.capacity[i]).field(p.resistance[i]);
        w.field(hall.stress[i]).field(hall.relative[i]);
        w.end_row();
    }
}

void write_top_nodes_csv(const IOTable& table, std::span<const RankedNode> ranked, std::ostream& out) {
    csv::Writer w(out);
    w.header({"rank", "node", "country", "sector", "flow_share", "resistance", "H_rel"});
    int rank = 1;
    for (const auto& r : ranked) {
        const auto& node = table.nodes[r.index];
        w.field(rank++).field(node_label(node)).field(node.country).field(node.sector);
        w.field(r.flow_share).field(r.resistance).field(r.relative_exposure);
        w.end_row();
    }
}

void write_scenarios_csv(std::span<const NamedStats> rows, std::ostream& out) {
    csv::Writer w(out);
    w.header({"scenario", "B_bar", "sigma_D", "mean_S", "se_mean_S", "pr_nonzero", "pr_ge5", "pr_ge10",
              "pr_ge20", "n_obs", "regime"});
    for (const auto& [name, s] : rows) {
        w.field(name).field(s.B_bar).field(s.sigma_D).field(s.mean_S).field(s.se_mean_S).field(s.pr_nonzero);
        for (double p : s.pr_ge) w.field(p);
        w.field(s.n_obs).field(to_string(s.regime));
        w.end_row();
    }
}

void write_avalanches_csv(std::span<const ReplicationSeries> series, std::ostream& out) {
    csv::Writer w(out);
    w.header({"replication", "period", "S", "B_realised", "relax_rounds"});
    for (std::size_t r = 0; r < series.size(); ++r) {
        const auto& rep = series[r];
        for (std::size_t t = 0; t < rep.S.size(); ++t) {
            w.field(static_cast<std::uint64_t>(r));
            w.field(rep.first_period + static_cast<std::int64_t>(t));
            w.field(rep.S[t]).field(rep.B_realised[t]).field(static_cast<std::uint64_t>(rep.relax_rounds[t]));
            w.end_row();
        }
    }
}

void write_phase_grid_csv(std::span<const CellStats> cells, std::ostream& out) {
    csv::Writer w(out);
    w.header({"B_bar", "sigma_D", "mean_S", "se_mean_S", "pr_nonzero", "pr_ge5", "pr_ge10", "pr_ge20", "p50",
              "p95", "p99", "max", "regime"});
    for (const auto& c : cells) {
        w.field(c.B_bar).field(c.sigma_D).field(c.mean_S).field(c.se_mean_S).field(c.pr_nonzero);
        for (double p : c.pr_ge) w.field(p);
        w.field(c.p50).field(c.p95).field(c.p99).field(c.max).field(to_string(c.regime));
        w.end_row();
    }
}

void write_convergence_csv(std::span<const ConvergenceRow> rows, std::ostream& out) {
    csv::Writer w(out);
    w.header({"B_bar", "sigma_D", "mean_S", "se_mean_S", "se_ratio", "se_pr_nonzero", "se_pr_ge5", "se_pr_ge10",
              "se_pr_ge20", "active", "flagged"});
    for (const auto& r : rows) {
        w.field(r.B_bar).field(r.sigma_D).field(r.mean_S).field(r.se_mean_S);
        if (r.se_ratio) {
            w.field(*r.se_ratio);
        } else {
            w.field(std::string_view("NA"));
        }
        w.field(r.se_pr_nonzero);
        for (double p : r.se_pr_ge) w.field(p);
        w.field(r.active).field(r.flagged);
        w.end_row();
    }
}

void write_tail_fits_csv(std::span<const NamedTailFit> rows, std::ostream& out) {
    csv::Writer w(out);
    w.header({"regime", "x_min", "n_tail", "alpha", "ks", "informative"});
    for (const auto& [regime, f] : rows) {
        w.field(regime).field(f.x_min).field(static_cast<std::uint64_t>(f.n_tail)).field(f.alpha);
        w.field(f.ks_distance).field(f.informative);
        w.end_row();
    }
}

void write_ccdf_csv(std::span<const CcdfPoint> points, std::ostream& out) {
    csv::Writer w(out);
    w.header({"x", "prob"});
    for (const auto& p : points) {
        w.field(p.x).field(p.prob);
        w.end_row();
    }
}

std::vector<std::uint64_t> read_avalanche_sizes(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    std::size_t first = 0;
    std::size_t column = 0;
    bool headed = false;
    while (first < lines.size() && lines[first].find_first_not_of(" \t") == std::string::npos) ++first;
    if (first < lines.size()) {
        const auto fields = csv::split(lines[first]);
        if (!fields.empty() && !csv::parse_int(fields[0])) {
            const auto it = std::find(fields.begin(), fields.end(), "S");
            if (it == fields.end()) {
                throw InputError(path.string() + ": header has no S column");
            }
            column = static_cast<std::size_t>(it - fields.begin());
            headed = true;
        }
    }

    std::vector<std::uint64_t> out;
    for (std::size_t i = first + (headed ? 1 : 0); i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = csv::split(lines[i]);
        const auto where = path.string() + ":" + std::to_string(i + 1);
        if (column >= fields.size()) throw InputError(where + ": missing S value");
        const auto v = csv::parse_int(fields[column]);
        if (!v || *v < 0) throw InputError(where + ": S must be a non-negative integer");
        out.push_back(static_cast<std::uint64_t>(*v));
    }
    if (out.empty()) throw InputError(path.string() + ": no avalanche sizes");
    return out;
}

}  // namespace hallsand

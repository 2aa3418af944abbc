#pragma once

#include "hallsand/experiments.hpp"
#include "hallsand/exposure.hpp"
#include "hallsand/ingest.hpp"
#include "hallsand/tail.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace hallsand {

/// One row of the yearly network panel.
struct PanelRow {
    int year = 0;
    double rho_share = 0.0;
    double rho_leak = 0.0;
    double rho_max = 0.0;
    double mean_leakage = 0.0;
    double mean_Hrel = 0.0;
    double p95_Hrel = 0.0;  ///< nearest-rank 95th percentile over nodes
};

PanelRow panel_row(const IOTable& table, const ExposureOptions& exposure = {}, const SpectralOptions& spectral = {});

void write_panel_csv(std::span<const PanelRow> rows, std::ostream& out);

void write_exposure_csv(const IOTable& table, const ExposureProfile& profile, const HallStress& hall,
                        std::ostream& out);
void write_top_nodes_csv(const IOTable& table, std::span<const RankedNode> ranked, std::ostream& out);

struct NamedStats {
    std::string name;
    CellStats stats;
};
void write_scenarios_csv(std::span<const NamedStats> rows, std::ostream& out);

/// replication,period,S,B_realised,relax_rounds
void write_avalanches_csv(std::span<const ReplicationSeries> series, std::ostream& out);

void write_phase_grid_csv(std::span<const CellStats> cells, std::ostream& out);
void write_convergence_csv(std::span<const ConvergenceRow> rows, std::ostream& out);

struct NamedTailFit {
    std::string regime;
    TailFit fit;
};
void write_tail_fits_csv(std::span<const NamedTailFit> rows, std::ostream& out);
void write_ccdf_csv(std::span<const CcdfPoint> points, std::ostream& out);

/// Reads avalanche sizes from a CSV with an `S` column (e.g. avalanches.csv)
/// or from a headerless single-column file. Throws InputError on empty input
/// or malformed values.
std::vector<std::uint64_t> read_avalanche_sizes(const std::filesystem::path& path);

}  // namespace hallsand

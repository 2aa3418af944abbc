#pragma once

#include "hallsand/dynamics.hpp"
#include "hallsand/exposure.hpp"
#include "hallsand/ingest.hpp"
#include "hallsand/operators.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hallsand {

/// A table with its propagation operator and exposure profile, built once
/// and shared read-only by every replication.
struct Substrate {
    IOTable table;
    PropagationOperator op;
    ExposureProfile exposure;
};

Substrate make_substrate(IOTable table, OperatorKind kind = OperatorKind::LeakageAdjusted,
                         const ExposureOptions& exposure = {});

enum class RegimeLabel { Absorption, LatentFragility, CriticalTransition, Avalanche };

std::string_view to_string(RegimeLabel label);
std::optional<RegimeLabel> parse_regime(std::string_view text);

struct ScenarioSpec {
    std::string name;
    double B_bar = 0.0;
    double sigma_D = 1.0;
    int T_burn = 50;
    int T_stat = 150;
    int replications = 100;
    std::uint64_t master_seed = 20140101;

    void validate() const;
};

/// The four baseline (B_bar, sigma_D) pairs: stable, latent, critical, avalanche.
std::vector<ScenarioSpec> baseline_presets(std::uint64_t master_seed = 20140101, int replications = 100);
std::optional<ScenarioSpec> find_preset(std::string_view name, std::uint64_t master_seed = 20140101,
                                        int replications = 100);

/// Thresholds used for the Pr(S >= k) columns.
inline constexpr std::array<std::uint64_t, 3> kEventSizes{5, 10, 20};

struct CellStats {
    double B_bar = 0.0;
    double sigma_D = 0.0;
    double mean_S = 0.0;
    double se_mean_S = 0.0;  ///< sample std of replication means / sqrt(R); 0 when R = 1
    double pr_nonzero = 0.0;
    std::array<double, 3> pr_ge{};  ///< aligned with kEventSizes
    std::uint64_t p50 = 0;
    std::uint64_t p95 = 0;
    std::uint64_t p99 = 0;
    std::uint64_t max = 0;
    std::uint64_t n_obs = 0;
    int replications = 0;
    RegimeLabel regime = RegimeLabel::Absorption;
};

/// Bands on mean S: [0, 0.30), [0.30, 1.5), [1.5, 5), [5, inf). A value on a
/// boundary belongs to the higher regime.
RegimeLabel classify_regime(double mean_S);
RegimeLabel classify_regime(const CellStats& stats);

/// Statistics from per-replication S series of equal length. Percentiles
/// use the nearest-rank definition.
CellStats summarize(std::span<const std::vector<std::uint64_t>> replication_series, double B_bar,
                    double sigma_D);

/// Per-period records of one replication, stationary window only.
struct ReplicationSeries {
    std::vector<std::uint64_t> S;
    std::vector<double> B_realised;
    std::vector<std::size_t> relax_rounds;
    std::int64_t first_period = 0;
};

struct ScenarioResult {
    CellStats stats;
    std::vector<ReplicationSeries> series;  ///< empty unless requested
};

struct RunOptions {
    std::size_t threads = 1;
    bool keep_series = false;
};

/// Child seed for (cell, replication): a splitmix64-style mix of all three
/// inputs. Order independent, so serial and parallel runs agree.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_index, std::uint64_t replication);

/// Runs spec.replications independent engines of T_burn + T_stat periods.
/// Engine errors are rethrown with cell, replication and period context.
ScenarioResult run_scenario(const ScenarioSpec& spec, const Substrate& substrate, const Params& params,
                            const RunOptions& options = {}, std::uint64_t cell_index = 0);

struct PhaseGridSpec {
    std::vector<double> B_values;
    std::vector<double> sigmaD_values;
    ScenarioSpec cell_template;  ///< B_bar and sigma_D are overwritten per cell

    void validate() const;
};

/// Evenly spaced values from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

/// 10 x 9 grid over [0.25, 2.0] x [0.5, 2.5], 50 replications per cell.
PhaseGridSpec default_phase_grid(std::uint64_t master_seed = 20140101);

/// Cells in row-major order: B outer, sigma_D inner. Cell index
/// b * |sigma_D| + s feeds the seed derivation.
std::vector<CellStats> run_phase_grid(const PhaseGridSpec& spec, const Substrate& substrate,
                                      const Params& params, const RunOptions& options = {});

struct ConvergenceRow {
    double B_bar = 0.0;
    double sigma_D = 0.0;
    double mean_S = 0.0;
    double se_mean_S = 0.0;
    std::optional<double> se_ratio;  ///< se / mean for active cells
    double se_pr_nonzero = 0.0;
    std::array<double, 3> se_pr_ge{};
    bool active = false;
    bool flagged = false;
};

struct ConvergenceLimits {
    double max_relative_se = 0.05;  ///< active cells
    double max_absolute_se = 0.02;  ///< absorbing cells
};

/// A cell is active unless it is labelled Absorption. Active cells are
/// flagged when se/mean >= the relative limit, absorbing cells when
/// se >= the absolute limit. Binomial SEs are sqrt(p (1 - p) / n_obs).
std::vector<ConvergenceRow> convergence_report(std::span<const CellStats> cells,
                                               const ConvergenceLimits& limits = {});

}  // namespace hallsand

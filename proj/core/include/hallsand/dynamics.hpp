#pragma once

#include "hallsand/exposure.hpp"
#include "hallsand/operators.hpp"
#include "hallsand/sparse.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hallsand {

enum class CountMode {
    Events,       ///< every toppling, including repeats across rounds
    UniqueNodes,  ///< distinct nodes that toppled at least once
};

struct Params {
    double delta = 0.20;    ///< dissipation rate
    double alpha = 0.30;    ///< idiosyncratic shock loading
    double beta = 0.40;     ///< propagation coefficient
    double gamma = 0.50;    ///< Hall loading coefficient
    double theta = 1.00;    ///< uniform toppling threshold
    double epsilon = 1e-6;  ///< regulariser in H
    double sigma_x = 0.20;  ///< shock scale (half-normal)
    double redistribution_fraction = 0.5;
    double reset_level = 0.0;  ///< stress left on a node after it topples
    /// 0 means 10 * n.
    std::size_t max_relax_rounds = 0;
    CountMode count_mode = CountMode::Events;
    /// Optional per-node thresholds; empty means `theta` everywhere.
    std::vector<double> thresholds;

    /// Throws InputError on out-of-range values.
    void validate() const;
};

struct FieldModel {
    double B_bar = 0.0;
    double sigma_B = 0.0;

    /// sigma_B = 0.1 * B_bar.
    static FieldModel with_default_noise(double B_bar);
};

struct AvalancheRecord {
    std::int64_t period = 0;
    std::uint64_t S = 0;
    std::vector<std::size_t> toppled_nodes;  ///< ascending, unique
    std::size_t relax_rounds = 0;
    double B_realised = 0.0;
};

struct RelaxResult {
    std::uint64_t events = 0;
    std::vector<std::size_t> toppled_nodes;
    std::size_t rounds = 0;
};

struct ContractionCheck {
    bool pass = true;
    double bound = 0.0;   ///< delta / rho (infinite when rho = 0)
    double margin = 0.0;  ///< bound - beta
};

ContractionCheck contraction_check(const Params& params, double rho_leak);

/// theta - gamma H. May be negative.
double hall_adjusted_threshold(double theta, double gamma, double hall);

/// theta - gamma H - s_tilde; the node topples iff the gap is <= 0.
double activation_gap(double theta, double gamma, double hall_prev, double s_tilde);

/// d gap / d B = -gamma I / (D C + eps).
double gap_sensitivity_field(double gamma, double flow_share, double redundancy, double capacity,
                             double epsilon);

/// d gap / d D = gamma B I C / (D C + eps)^2.
double gap_sensitivity_redundancy(double gamma, double field, double flow_share, double redundancy,
                                  double capacity, double epsilon);

/// Sandpile engine over one substrate. The operator and exposure profile must
/// outlive the engine. Not thread-safe; use one engine per replication.
class Engine {
public:
    Engine(const PropagationOperator& op, const ExposureProfile& exposure, Params params, double sigma_D,
           std::uint64_t seed);

    std::size_t size() const noexcept { return stress_.size(); }
    const Params& params() const noexcept { return params_; }
    double sigma_D() const noexcept { return sigma_D_; }
    std::int64_t period() const noexcept { return period_; }
    std::span<const double> stress() const noexcept { return stress_; }
    std::span<const double> thresholds() const noexcept { return theta_; }
    void set_stress(std::span<const double> s);

    /// Realised field max(0, B_bar + sigma_B z).
    double draw_field(const FieldModel& field);
    /// Half-normal shocks sigma_x |z|, one per node.
    std::vector<double> draw_shocks();

    /// H_i = B I_i / ((D_i / sigma_D) C_i + eps).
    std::vector<double> effective_hall(double field) const;

    /// One period: field draw, shock draw, stress update, relaxation.
    AvalancheRecord step(const FieldModel& field);

    /// Deterministic part of a period with externally supplied draws.
    AvalancheRecord advance(std::span<const double> shocks, double field);

    /// Topple to quiescence. Throws EngineError when the round budget is spent.
    RelaxResult relax();

private:
    const PropagationOperator* op_;
    const ExposureProfile* exposure_;
    CsrMatrix incoming_;  // transpose of the operator, rows gather in-flows
    Params params_;
    double sigma_D_;
    std::size_t max_rounds_;
    std::vector<double> theta_;
    std::vector<double> stress_;
    std::vector<double> scratch_;
    std::int64_t period_ = 0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hallsand

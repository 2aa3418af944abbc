#include "hallsand/dynamics.hpp"

#include "hallsand/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace hallsand {

void Params::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InputError(what);
    };
    require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
    require(alpha >= 0.0, "alpha must be >= 0");
    require(beta >= 0.0, "beta must be >= 0");
    require(gamma >= 0.0, "gamma must be >= 0");
    require(theta > 0.0 && std::isfinite(theta), "theta must be positive");
    require(epsilon > 0.0, "epsilon must be positive");
    require(sigma_x > 0.0, "sigma_x must be positive");
    require(redistribution_fraction >= 0.0 && redistribution_fraction <= 1.0,
            "redistribution_fraction must be in [0, 1]");
    require(reset_level >= 0.0, "reset_level must be >= 0");
    for (double t : thresholds) {
        require(t > 0.0 && std::isfinite(t), "per-node thresholds must be positive");
        require(reset_level < t, "reset_level must lie below every threshold");
    }
    if (thresholds.empty()) require(reset_level < theta, "reset_level must lie below theta");
}

FieldModel FieldModel::with_default_noise(double B_bar) { return {B_bar, 0.1 * B_bar}; }

ContractionCheck contraction_check(const Params& params, double rho_leak) {
    if (!(rho_leak >= 0.0)) throw InputError("spectral radius must be >= 0");
    ContractionCheck c;
    if (rho_leak == 0.0) {
        c.bound = std::numeric_limits<double>::infinity();
        c.margin = c.bound;
        c.pass = true;
        return c;
    }
    c.bound = params.delta / rho_leak;
    c.margin = c.bound - params.beta;
    c.pass = params.beta < c.bound;
    return c;
}

double hall_adjusted_threshold(double theta, double gamma, double hall) { return theta - gamma * hall; }

double activation_gap(double theta, double gamma, double hall_prev, double s_tilde) {
    return theta - gamma * hall_prev - s_tilde;
}

double gap_sensitivity_field(double gamma, double flow_share, double redundancy, double capacity,
                             double epsilon) {
    return -gamma * flow_share / (redundancy * capacity + epsilon);
}

double gap_sensitivity_redundancy(double gamma, double field, double flow_share, double redundancy,
                                  double capacity, double epsilon) {
    const double denom = redundancy * capacity + epsilon;
    return gamma * field * flow_share * capacity / (denom * denom);
}

Engine::Engine(const PropagationOperator& op, const ExposureProfile& exposure, Params params,
               double sigma_D, std::uint64_t seed)
    : op_(&op),
      exposure_(&exposure),
      incoming_(op.matrix.transpose()),
      params_(std::move(params)),
      sigma_D_(sigma_D),
      rng_(seed) {
    params_.validate();
    if (!(sigma_D > 0.0) || !std::isfinite(sigma_D)) throw InputError("sigma_D must be positive");
    const std::size_t n = op.matrix.size();
    if (exposure.size() != n) throw InputError("exposure profile and operator differ in size");
    if (!params_.thresholds.empty() && params_.thresholds.size() != n) {
        throw InputError("per-node thresholds must have one entry per node");
    }
    max_rounds_ = params_.max_relax_rounds > 0 ? params_.max_relax_rounds : 10 * n;
    theta_ = params_.thresholds.empty() ? std::vector<double>(n, params_.theta) : params_.thresholds;
    stress_.assign(n, 0.0);
    scratch_.assign(n, 0.0);
}

void Engine::set_stress(std::span<const double> s) {
    if (s.size() != stress_.size()) throw InputError("stress vector has wrong size");
    for (double v : s) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("stress must be finite and >= 0");
    }
    stress_.assign(s.begin(), s.end());
}

double Engine::draw_field(const FieldModel& field) {
    const double z = normal_(rng_);
    return std::max(0.0, field.B_bar + field.sigma_B * z);
}

std::vector<double> Engine::draw_shocks() {
    std::vector<double> x(stress_.size());
    for (double& v : x) v = params_.sigma_x * std::abs(normal_(rng_));
    return x;
}

std::vector<double> Engine::effective_hall(double field) const {
    const auto& e = *exposure_;
    std::vector<double> h(stress_.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] = field * e.flow_share[i] / ((e.redundancy[i] / sigma_D_) * e.capacity[i] + params_.epsilon);
    }
    return h;
}

AvalancheRecord Engine::step(const FieldModel& field) {
    const double b = draw_field(field);
    const auto x = draw_shocks();
    return advance(x, b);
}

AvalancheRecord Engine::advance(std::span<const double> shocks, double field) {
    const std::size_t n = stress_.size();
    if (shocks.size() != n) throw InputError("shock vector has wrong size");
    const auto h = effective_hall(field);
    incoming_.multiply(stress_, scratch_);

    const double keep = 1.0 - params_.delta;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = keep * stress_[i] + params_.alpha * shocks[i] + params_.beta * scratch_[i] +
                         params_.gamma * h[i];
        stress_[i] = std::max(0.0, s);
    }

    AvalancheRecord rec;
    rec.period = period_;
    rec.B_realised = field;
    auto relaxed = relax();
    for (double s : stress_) {
        if (!std::isfinite(s)) {
            throw EngineError("non-finite stress in period " + std::to_string(period_));
        }
    }
    rec.S = params_.count_mode == CountMode::Events ? relaxed.events : relaxed.toppled_nodes.size();
    rec.toppled_nodes = std::move(relaxed.toppled_nodes);
    rec.relax_rounds = relaxed.rounds;
    ++period_;
    return rec;
}

RelaxResult Engine::relax() {
    const std::size_t n = stress_.size();
    const auto& a = op_->matrix;
    const double frac = params_.redistribution_fraction;
    const double reset = params_.reset_level;

    RelaxResult result;
    std::vector<char> ever(n, 0);
    std::vector<std::size_t> over;
    std::vector<double> excess;
    while (true) {
        over.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (stress_[i] >= theta_[i]) over.push_back(i);
        }
        if (over.empty()) break;
        if (result.rounds == max_rounds_) {
            throw EngineError("relaxation exceeded " + std::to_string(max_rounds_) + " rounds in period " +
                              std::to_string(period_));
        }
        ++result.rounds;
        result.events += over.size();

        excess.resize(over.size());
        for (std::size_t k = 0; k < over.size(); ++k) {
            const std::size_t i = over[k];
            excess[k] = stress_[i] - reset;
            stress_[i] = reset;
            ever[i] = 1;
        }
        for (std::size_t k = 0; k < over.size(); ++k) {
            const std::size_t i = over[k];
            const double share = frac * excess[k];
            const auto cols = a.row_cols(i);
            const auto vals = a.row_values(i);
            for (std::size_t e = 0; e < cols.size(); ++e) stress_[cols[e]] += share * vals[e];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (ever[i]) result.toppled_nodes.push_back(i);
    }
    return result;
}

}  // namespace hallsand

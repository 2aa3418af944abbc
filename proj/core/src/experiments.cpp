#include "hallsand/experiments.hpp"

#include "hallsand/error.hpp"
#include "hallsand/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hallsand {

Substrate make_substrate(IOTable table, OperatorKind kind, const ExposureOptions& exposure) {
    Substrate s;
    s.op = build_operator(table, kind);
    s.exposure = compute_exposure(table, exposure);
    s.table = std::move(table);
    return s;
}

std::string_view to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::Absorption: return "absorption";
        case RegimeLabel::LatentFragility: return "latent_fragility";
        case RegimeLabel::CriticalTransition: return "critical_transition";
        case RegimeLabel::Avalanche: return "avalanche";
    }
    return "unknown";
}

std::optional<RegimeLabel> parse_regime(std::string_view text) {
    for (auto label : {RegimeLabel::Absorption, RegimeLabel::LatentFragility, RegimeLabel::CriticalTransition,
                       RegimeLabel::Avalanche}) {
        if (text == to_string(label)) return label;
    }
    return std::nullopt;
}

void ScenarioSpec::validate() const {
    if (!(B_bar >= 0.0) || !std::isfinite(B_bar)) throw InputError("B_bar must be finite and >= 0");
    if (!(sigma_D > 0.0) || !std::isfinite(sigma_D)) throw InputError("sigma_D must be positive");
    if (T_burn < 0) throw InputError("T_burn must be >= 0");
    if (T_stat < 1) throw InputError("T_stat must be >= 1");
    if (replications < 1) throw InputError("replications must be >= 1");
}

std::vector<ScenarioSpec> baseline_presets(std::uint64_t master_seed, int replications) {
    std::vector<ScenarioSpec> presets = {
        {"stable", 0.45, 0.7},
        {"latent", 0.70, 1.4},
        {"critical", 1.00, 1.8},
        {"avalanche", 1.35, 2.3},
    };
    for (auto& p : presets) {
        p.master_seed = master_seed;
        p.replications = replications;
    }
    return presets;
}

std::optional<ScenarioSpec> find_preset(std::string_view name, std::uint64_t master_seed, int replications) {
    for (auto& p : baseline_presets(master_seed, replications)) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

RegimeLabel classify_regime(double mean_S) {
    if (mean_S >= 5.0) return RegimeLabel::Avalanche;
    if (mean_S >= 1.5) return RegimeLabel::CriticalTransition;
    if (mean_S >= 0.30) return RegimeLabel::LatentFragility;
    return RegimeLabel::Absorption;
}

RegimeLabel classify_regime(const CellStats& stats) { return classify_regime(stats.mean_S); }

namespace {

std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, std::uint64_t percent) {
    const std::uint64_t n = sorted.size();
    std::uint64_t rank = (percent * n + 99) / 100;
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

ReplicationSeries run_replication(const ScenarioSpec& spec, const Substrate& substrate, const Params& params,
                                  std::uint64_t cell_index, std::uint64_t replication) {
    ReplicationSeries out;
    out.first_period = spec.T_burn;
    out.S.reserve(static_cast<std::size_t>(spec.T_stat));
    out.B_realised.reserve(static_cast<std::size_t>(spec.T_stat));
    out.relax_rounds.reserve(static_cast<std::size_t>(spec.T_stat));

    Engine engine(substrate.op, substrate.exposure, params, spec.sigma_D,
                  derive_seed(spec.master_seed, cell_index, replication));
    const auto field = FieldModel::with_default_noise(spec.B_bar);
    const int total = spec.T_burn + spec.T_stat;
    for (int t = 0; t < total; ++t) {
        AvalancheRecord rec;
        try {
            rec = engine.step(field);
        } catch (const EngineError& e) {
            throw EngineError("cell " + std::to_string(cell_index) + ", replication " +
                              std::to_string(replication) + ", period " + std::to_string(t) + ": " + e.what());
        }
        if (t >= spec.T_burn) {
            out.S.push_back(rec.S);
            out.B_realised.push_back(rec.B_realised);
            out.relax_rounds.push_back(rec.relax_rounds);
        }
    }
    return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_index, std::uint64_t replication) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ cell_index);
    return mix64(h ^ replication);
}

CellStats summarize(std::span<const std::vector<std::uint64_t>> replication_series, double B_bar,
                    double sigma_D) {
    if (replication_series.empty()) throw InputError("no replications to summarise");
    CellStats c;
    c.B_bar = B_bar;
    c.sigma_D = sigma_D;
    c.replications = static_cast<int>(replication_series.size());

    std::vector<std::uint64_t> pooled;
    std::vector<double> means;
    std::uint64_t total = 0;
    std::uint64_t nonzero = 0;
    std::array<std::uint64_t, 3> ge{};
    for (const auto& rep : replication_series) {
        if (rep.empty()) throw InputError("empty replication series");
        std::uint64_t rep_total = 0;
        for (std::uint64_t s : rep) {
            rep_total += s;
            if (s > 0) ++nonzero;
            for (std::size_t k = 0; k < kEventSizes.size(); ++k) {
                if (s >= kEventSizes[k]) ++ge[k];
            }
        }
        total += rep_total;
        means.push_back(static_cast<double>(rep_total) / static_cast<double>(rep.size()));
        pooled.insert(pooled.end(), rep.begin(), rep.end());
    }

    c.n_obs = pooled.size();
    const double n = static_cast<double>(c.n_obs);
    c.mean_S = static_cast<double>(total) / n;
    c.pr_nonzero = static_cast<double>(nonzero) / n;
    for (std::size_t k = 0; k < ge.size(); ++k) c.pr_ge[k] = static_cast<double>(ge[k]) / n;

    if (means.size() > 1) {
        double mean_of_means = 0.0;
        for (double m : means) mean_of_means += m;
        mean_of_means /= static_cast<double>(means.size());
        double ss = 0.0;
        for (double m : means) ss += (m - mean_of_means) * (m - mean_of_means);
        const double r = static_cast<double>(means.size());
        c.se_mean_S = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
    }

    std::sort(pooled.begin(), pooled.end());
    c.p50 = nearest_rank(pooled, 50);
    c.p95 = nearest_rank(pooled, 95);
    c.p99 = nearest_rank(pooled, 99);
    c.max = pooled.back();
    c.regime = classify_regime(c.mean_S);
    return c;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const Substrate& substrate, const Params& params,
                            const RunOptions& options, std::uint64_t cell_index) {
    spec.validate();
    params.validate();
    const auto reps = static_cast<std::size_t>(spec.replications);
    std::vector<ReplicationSeries> runs(reps);
    parallel_for(reps, options.threads, [&](std::size_t r) {
        runs[r] = run_replication(spec, substrate, params, cell_index, r);
    });

    std::vector<std::vector<std::uint64_t>> series(reps);
    for (std::size_t r = 0; r < reps; ++r) series[r] = runs[r].S;

    ScenarioResult result;
    result.stats = summarize(series, spec.B_bar, spec.sigma_D);
    if (options.keep_series) result.series = std::move(runs);
    return result;
}

void PhaseGridSpec::validate() const {
    auto ascending = [](const std::vector<double>& v, const char* what) {
        if (v.empty()) throw InputError(std::string(what) + " grid is empty");
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (!(v[i] > v[i - 1])) throw InputError(std::string(what) + " grid must be strictly ascending");
        }
    };
    ascending(B_values, "B_bar");
    ascending(sigmaD_values, "sigma_D");
    if (!(B_values.front() >= 0.0)) throw InputError("B_bar grid must be >= 0");
    if (!(sigmaD_values.front() > 0.0)) throw InputError("sigma_D grid must be positive");
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    if (count == 0) throw InputError("grid needs at least one point");
    if (count == 1) return {lo};
    if (!(hi > lo)) throw InputError("grid upper bound must exceed lower bound");
    std::vector<double> v(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + step * static_cast<double>(i);
    v.back() = hi;
    return v;
}

PhaseGridSpec default_phase_grid(std::uint64_t master_seed) {
    PhaseGridSpec g;
    g.B_values = linear_grid(0.25, 2.0, 10);
    g.sigmaD_values = linear_grid(0.5, 2.5, 9);
    g.cell_template.name = "grid";
    g.cell_template.replications = 50;
    g.cell_template.master_seed = master_seed;
    return g;
}

std::vector<CellStats> run_phase_grid(const PhaseGridSpec& spec, const Substrate& substrate,
                                      const Params& params, const RunOptions& options) {
    spec.validate();
    params.validate();
    const std::size_t nb = spec.B_values.size();
    const std::size_t ns = spec.sigmaD_values.size();
    const std::size_t cells = nb * ns;
    const auto reps = static_cast<std::size_t>(spec.cell_template.replications);

    std::vector<ScenarioSpec> cell_specs(cells, spec.cell_template);
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t s = 0; s < ns; ++s) {
            auto& c = cell_specs[b * ns + s];
            c.B_bar = spec.B_values[b];
            c.sigma_D = spec.sigmaD_values[s];
            c.validate();
        }
    }

    std::vector<std::vector<std::uint64_t>> series(cells * reps);
    parallel_for(cells * reps, options.threads, [&](std::size_t task) {
        const std::size_t cell = task / reps;
        const std::size_t rep = task % reps;
        series[task] = run_replication(cell_specs[cell], substrate, params, cell, rep).S;
    });

    std::vector<CellStats> out;
    out.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::span<const std::vector<std::uint64_t>> block(series.data() + cell * reps, reps);
        out.push_back(summarize(block, cell_specs[cell].B_bar, cell_specs[cell].sigma_D));
    }
    return out;
}

std::vector<ConvergenceRow> convergence_report(std::span<const CellStats> cells, const ConvergenceLimits& limits) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(cells.size());
    for (const auto& c : cells) {
        ConvergenceRow r;
        r.B_bar = c.B_bar;
        r.sigma_D = c.sigma_D;
        r.mean_S = c.mean_S;
        r.se_mean_S = c.se_mean_S;
        const double n = static_cast<double>(c.n_obs);
        auto binomial = [n](double p) { return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; };
        r.se_pr_nonzero = binomial(c.pr_nonzero);
        for (std::size_t k = 0; k < c.pr_ge.size(); ++k) r.se_pr_ge[k] = binomial(c.pr_ge[k]);
        r.active = c.regime != RegimeLabel::Absorption && c.mean_S > 0.0;
        if (r.active) {
            r.se_ratio = c.se_mean_S / c.mean_S;
            r.flagged = *r.se_ratio >= limits.max_relative_se;
        } else {
            r.flagged = c.se_mean_S >= limits.max_absolute_se;
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace hallsand

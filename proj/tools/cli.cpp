#include "cli.hpp"

#include "hallsand/csv.hpp"
#include "hallsand/dynamics.hpp"
#include "hallsand/error.hpp"
#include "hallsand/experiments.hpp"
#include "hallsand/exposure.hpp"
#include "hallsand/ingest.hpp"
#include "hallsand/operators.hpp"
#include "hallsand/parallel.hpp"
#include "hallsand/report.hpp"
#include "hallsand/tail.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hallsand::cli {

namespace fs = std::filesystem;

namespace {

struct Global {
    std::size_t threads = 0;
    bool json = false;
};

struct SubstrateArgs {
    std::string flows;
    std::string row_use;
    std::optional<int> year;
    std::size_t synth_nodes = 200;
    double synth_density = 0.1;
    std::uint64_t synth_seed = 7;
    std::string op = "leak";
    ExposureOptions exposure;
};

// Turns CSV text into a JSON array of row objects; numeric fields become numbers.
nlohmann::ordered_json csv_to_json(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    while (std::getline(in, line)) {
        const auto fields = csv::split(line);
        if (header.empty()) {
            for (auto f : fields) header.emplace_back(f);
            continue;
        }
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (std::size_t k = 0; k < fields.size() && k < header.size(); ++k) {
            if (auto i = csv::parse_int(fields[k])) {
                row[header[k]] = *i;
            } else if (auto d = csv::parse_double(fields[k])) {
                row[header[k]] = *d;
            } else if (fields[k] == "true" || fields[k] == "false") {
                row[header[k]] = fields[k] == "true";
            } else {
                row[header[k]] = std::string(fields[k]);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

class Output {
public:
    Output(fs::path dir, bool json, std::ostream& log) : dir_(std::move(dir)), json_(json), log_(log) {}

    void emit(const std::string& name, const std::function<void(std::ostream&)>& body) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
        std::ostringstream text;
        body(text);
        write(dir_ / (name + ".csv"), text.str());
        if (json_) write(dir_ / (name + ".json"), csv_to_json(text.str()).dump(2) + "\n");
    }

private:
    void write(const fs::path& path, const std::string& bytes) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw InputError("cannot write " + path.string());
        f << bytes;
        if (!f) throw InputError("error writing " + path.string());
        log_ << "wrote " << path.string() << '\n';
    }

    fs::path dir_;
    bool json_;
    std::ostream& log_;
};

IOTable load_table(const std::string& flows, const std::string& row_use, std::optional<int> year) {
    if (!fs::exists(flows)) throw InputError("flows file not found: " + flows);
    if (!row_use.empty() && !fs::exists(row_use)) throw InputError("row-use file not found: " + row_use);
    int y = 0;
    if (year) {
        y = *year;
    } else {
        const auto years = list_years(flows);
        if (years.empty()) throw InputError(flows + ": no data rows");
        y = years.back();
    }
    std::optional<fs::path> ru;
    if (!row_use.empty()) ru = row_use;
    return parse_io_table(flows, y, ru);
}

OperatorKind operator_kind(const std::string& text) {
    auto kind = parse_operator_kind(text);
    if (!kind) throw InputError("unknown operator '" + text + "' (expected share, leak or max)");
    return *kind;
}

Substrate load_substrate(const SubstrateArgs& a, std::ostream& log) {
    IOTable table;
    if (!a.flows.empty()) {
        table = load_table(a.flows, a.row_use, a.year);
        log << "substrate: " << a.flows << " year " << table.year << ", " << table.size() << " nodes\n";
    } else {
        table = synth_substrate(a.synth_nodes, a.synth_density, a.synth_seed, a.year.value_or(2014));
        log << "substrate: synthetic, " << table.size() << " nodes, density " << a.synth_density << ", seed "
            << a.synth_seed << '\n';
    }
    auto s = make_substrate(std::move(table), operator_kind(a.op), a.exposure);
    log << "operator " << to_string(s.op.kind) << ", spectral radius " << csv::format(s.op.spectral_radius)
        << '\n';
    return s;
}

void add_exposure_flags(CLI::App* cmd, ExposureOptions& e) {
    cmd->add_option("--floor-d", e.redundancy_floor, "Lower floor for scaled redundancy D")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--floor-c", e.capacity_floor, "Lower floor for capacity C")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--epsilon", e.epsilon, "Regulariser in H = B I / (D C + epsilon)");
}

void add_substrate_flags(CLI::App* cmd, SubstrateArgs& a) {
    cmd->add_option("--flows", a.flows, "Long-format flows CSV; omit to use a synthetic substrate");
    cmd->add_option("--row-use", a.row_use, "Gross row-use CSV (default: row_use.csv beside --flows)");
    cmd->add_option("--year", a.year, "Table year (default: latest year in --flows)");
    cmd->add_option("--synth-nodes", a.synth_nodes, "Synthetic substrate size")->check(CLI::Range(2, 1000000));
    cmd->add_option("--synth-density", a.synth_density, "Synthetic link density in (0, 1]");
    cmd->add_option("--synth-seed", a.synth_seed, "Synthetic substrate seed");
    cmd->add_option("--operator", a.op, "Propagation operator: share, leak or max");
    add_exposure_flags(cmd, a.exposure);
}

void add_param_flags(CLI::App* cmd, Params& p, std::string& count_mode) {
    cmd->add_option("--delta", p.delta, "Dissipation rate");
    cmd->add_option("--alpha", p.alpha, "Idiosyncratic shock loading");
    cmd->add_option("--beta", p.beta, "Propagation coefficient");
    cmd->add_option("--gamma", p.gamma, "Hall loading coefficient");
    cmd->add_option("--theta", p.theta, "Uniform toppling threshold");
    cmd->add_option("--sigma-x", p.sigma_x, "Half-normal shock scale");
    cmd->add_option("--redistribution", p.redistribution_fraction,
                    "Fraction of a toppled node's excess passed to neighbours");
    cmd->add_option("--reset-level", p.reset_level, "Stress left on a node after it topples");
    cmd->add_option("--max-rounds", p.max_relax_rounds, "Relaxation round budget per period (0 = 10 n)");
    cmd->add_option("--count", count_mode, "Avalanche size counts toppling 'events' or 'unique' nodes")
        ->check(CLI::IsMember({"events", "unique"}));
}

void check_contraction(const Params& p, const Substrate& s, std::ostream& err) {
    const auto c = contraction_check(p, s.op.spectral_radius);
    if (!c.pass) {
        err << "warning: beta = " << csv::format(p.beta) << " is not below delta / rho = " << csv::format(c.bound)
            << "; stress may not settle\n";
    }
}

std::string regime_name_from_path(const fs::path& p) {
    std::string stem = p.stem().string();
    const std::string prefix = "avalanches_";
    if (stem.rfind(prefix, 0) == 0 && stem.size() > prefix.size()) stem = stem.substr(prefix.size());
    return stem;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sandpile avalanche dynamics on input-output production networks"};
    app.name("hallsand");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI or TOML file; [subcommand] sections, command-line flags win");

    Global g;
    app.add_option("--threads", g.threads, "Worker threads (0 = HALLSAND_THREADS or all cores)");
    app.add_flag("--json", g.json, "Also write a .json mirror of every CSV output");

    std::function<void()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate flow tables and write them in canonical form");
    std::string in_flows, in_row_use, in_out = "out";
    std::optional<int> in_year;
    ingest->add_option("--flows", in_flows, "Long-format flows CSV")->required();
    ingest->add_option("--row-use", in_row_use, "Gross row-use CSV (default: row_use.csv beside --flows)");
    ingest->add_option("--year", in_year, "Only this year (default: every year in the file)");
    ingest->add_option("--out", in_out, "Output directory");
    ingest->callback([&] {
        action = [&] {
            std::vector<int> years;
            if (in_year) {
                years.push_back(*in_year);
            } else {
                years = list_years(in_flows);
            }
            if (years.empty()) throw InputError(in_flows + ": no data rows");
            std::vector<IOTable> tables;
            for (int y : years) {
                tables.push_back(load_table(in_flows, in_row_use, y));
                const auto& t = tables.back();
                out << t.year << ": " << t.size() << " nodes, " << t.flows.nonzeros() << " flows, total "
                    << csv::format(t.total_flow()) << '\n';
            }
            Output o(in_out, g.json, out);
            o.emit("flows", [&](std::ostream& s) { write_flows_csv(tables, s); });
            o.emit("row_use", [&](std::ostream& s) { write_row_use_csv(tables, s); });
        };
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic substrate with realistic leakage");
    std::size_t sy_nodes = 200, sy_years = 1;
    double sy_density = 0.1;
    std::uint64_t sy_seed = 7;
    int sy_year = 2014;
    std::string sy_out = "out";
    synth->add_option("--nodes", sy_nodes, "Number of country-sector nodes")->check(CLI::Range(2, 1000000));
    synth->add_option("--density", sy_density, "Link density in (0, 1]");
    synth->add_option("--seed", sy_seed, "Generator seed (year k uses seed + k)");
    synth->add_option("--year", sy_year, "First year stamp");
    synth->add_option("--years", sy_years, "Number of consecutive years")->check(CLI::Range(1, 1000));
    synth->add_option("--out", sy_out, "Output directory");
    synth->callback([&] {
        action = [&] {
            std::vector<IOTable> tables;
            for (std::size_t k = 0; k < sy_years; ++k) {
                tables.push_back(synth_substrate(sy_nodes, sy_density, sy_seed + k, sy_year + static_cast<int>(k)));
            }
            Output o(sy_out, g.json, out);
            o.emit("flows", [&](std::ostream& s) { write_flows_csv(tables, s); });
            o.emit("row_use", [&](std::ostream& s) { write_row_use_csv(tables, s); });
        };
    });

    // network-panel
    auto* panel = app.add_subcommand("network-panel", "Spectral radii, leakage and exposure summary per year");
    std::string np_flows, np_row_use, np_out = "out";
    ExposureOptions np_exposure;
    panel->add_option("--flows", np_flows, "Long-format flows CSV")->required();
    panel->add_option("--row-use", np_row_use, "Gross row-use CSV (default: row_use.csv beside --flows)");
    panel->add_option("--out", np_out, "Output directory");
    add_exposure_flags(panel, np_exposure);
    panel->callback([&] {
        action = [&] {
            if (!fs::exists(np_flows)) throw InputError("flows file not found: " + np_flows);
            std::vector<PanelRow> rows;
            for (int y : list_years(np_flows)) {
                rows.push_back(panel_row(load_table(np_flows, np_row_use, y), np_exposure));
            }
            if (rows.empty()) throw InputError(np_flows + ": no data rows");
            Output o(np_out, g.json, out);
            o.emit("panel", [&](std::ostream& s) { write_panel_csv(rows, s); });
        };
    });

    // exposure
    auto* exposure = app.add_subcommand("exposure", "Per-node Hall-like exposure and the top-ranked nodes");
    SubstrateArgs ex_sub;
    double ex_field = 1.0;
    std::size_t ex_top = 15;
    std::string ex_out = "out";
    add_substrate_flags(exposure, ex_sub);
    exposure->add_option("--field", ex_field, "Field intensity B")->check(CLI::NonNegativeNumber);
    exposure->add_option("--top", ex_top, "Rows in top_nodes.csv")->check(CLI::PositiveNumber);
    exposure->add_option("--out", ex_out, "Output directory");
    exposure->callback([&] {
        action = [&] {
            const auto s = load_substrate(ex_sub, out);
            const auto hall = hall_stress(ex_field, s.exposure);
            const auto top = rank_exposure(s.exposure, hall.relative, ex_top);
            Output o(ex_out, g.json, out);
            o.emit("exposure", [&](std::ostream& os) { write_exposure_csv(s.table, s.exposure, hall, os); });
            o.emit("top_nodes", [&](std::ostream& os) { write_top_nodes_csv(s.table, top, os); });
        };
    });

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run baseline scenarios or a custom (B_bar, sigma_D) cell");
    SubstrateArgs si_sub;
    Params si_params;
    std::string si_count = "events";
    std::vector<std::string> si_scenarios;
    std::optional<double> si_B, si_sigmaD;
    int si_reps = 100, si_burn = 50, si_stat = 150;
    std::uint64_t si_seed = 20140101;
    bool si_series = false;
    std::string si_out = "out";
    add_substrate_flags(simulate, si_sub);
    add_param_flags(simulate, si_params, si_count);
    simulate->add_option("--scenario", si_scenarios, "Preset: stable, latent, critical, avalanche (default: all)")
        ->check(CLI::IsMember({"stable", "latent", "critical", "avalanche"}));
    auto* b_opt = simulate->add_option("--B-bar", si_B, "Custom cell mean field intensity");
    auto* s_opt = simulate->add_option("--sigma-D", si_sigmaD, "Custom cell redundancy stress");
    b_opt->needs(s_opt);
    s_opt->needs(b_opt);
    simulate->add_option("--replications", si_reps, "Independent replications")->check(CLI::PositiveNumber);
    simulate->add_option("--burn", si_burn, "Burn-in periods discarded")->check(CLI::NonNegativeNumber);
    simulate->add_option("--periods", si_stat, "Retained periods per replication")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", si_seed, "Master seed");
    simulate->add_flag("--series", si_series, "Write avalanches_<scenario>.csv with every retained period");
    simulate->add_option("--out", si_out, "Output directory");
    simulate->callback([&] {
        action = [&] {
            si_params.count_mode = si_count == "unique" ? CountMode::UniqueNodes : CountMode::Events;
            si_params.epsilon = si_sub.exposure.epsilon;
            si_params.validate();
            const auto s = load_substrate(si_sub, out);
            check_contraction(si_params, s, err);

            std::vector<std::pair<ScenarioSpec, std::uint64_t>> specs;
            const auto presets = baseline_presets(si_seed, si_reps);
            if (si_B) {
                ScenarioSpec c;
                c.name = "custom";
                c.B_bar = *si_B;
                c.sigma_D = *si_sigmaD;
                c.replications = si_reps;
                c.master_seed = si_seed;
                specs.emplace_back(c, presets.size());
            }
            for (std::size_t k = 0; k < presets.size(); ++k) {
                const bool wanted = si_scenarios.empty() ? !si_B
                                                         : std::find(si_scenarios.begin(), si_scenarios.end(),
                                                                     presets[k].name) != si_scenarios.end();
                if (wanted) specs.emplace_back(presets[k], k);
            }

            const RunOptions run_opts{resolve_threads(g.threads), si_series};
            std::vector<NamedStats> rows;
            Output o(si_out, g.json, out);
            for (auto& [spec, cell] : specs) {
                spec.T_burn = si_burn;
                spec.T_stat = si_stat;
                const auto r = run_scenario(spec, s, si_params, run_opts, cell);
                rows.push_back({spec.name, r.stats});
                out << spec.name << ": mean S " << csv::format(r.stats.mean_S) << ", regime "
                    << to_string(r.stats.regime) << '\n';
                if (si_series) {
                    o.emit("avalanches_" + spec.name, [&](std::ostream& os) { write_avalanches_csv(r.series, os); });
                }
            }
            o.emit("scenarios", [&](std::ostream& os) { write_scenarios_csv(rows, os); });
        };
    });

    // phase-grid
    auto* grid = app.add_subcommand("phase-grid", "Sweep (B_bar, sigma_D) and classify every cell");
    SubstrateArgs pg_sub;
    Params pg_params;
    std::string pg_count = "events";
    double pg_bmin = 0.25, pg_bmax = 2.0, pg_smin = 0.5, pg_smax = 2.5;
    std::size_t pg_bsteps = 10, pg_ssteps = 9;
    int pg_reps = 50, pg_burn = 50, pg_stat = 150;
    std::uint64_t pg_seed = 20140101;
    std::string pg_out = "out";
    add_substrate_flags(grid, pg_sub);
    add_param_flags(grid, pg_params, pg_count);
    grid->add_option("--B-min", pg_bmin, "Smallest B_bar");
    grid->add_option("--B-max", pg_bmax, "Largest B_bar");
    grid->add_option("--B-steps", pg_bsteps, "Number of B_bar values")->check(CLI::PositiveNumber);
    grid->add_option("--sigmaD-min", pg_smin, "Smallest sigma_D");
    grid->add_option("--sigmaD-max", pg_smax, "Largest sigma_D");
    grid->add_option("--sigmaD-steps", pg_ssteps, "Number of sigma_D values")->check(CLI::PositiveNumber);
    grid->add_option("--replications", pg_reps, "Replications per cell")->check(CLI::PositiveNumber);
    grid->add_option("--burn", pg_burn, "Burn-in periods discarded")->check(CLI::NonNegativeNumber);
    grid->add_option("--periods", pg_stat, "Retained periods per replication")->check(CLI::PositiveNumber);
    grid->add_option("--seed", pg_seed, "Master seed");
    grid->add_option("--out", pg_out, "Output directory");
    grid->callback([&] {
        action = [&] {
            pg_params.count_mode = pg_count == "unique" ? CountMode::UniqueNodes : CountMode::Events;
            pg_params.epsilon = pg_sub.exposure.epsilon;
            pg_params.validate();
            PhaseGridSpec spec;
            spec.B_values = linear_grid(pg_bmin, pg_bmax, pg_bsteps);
            spec.sigmaD_values = linear_grid(pg_smin, pg_smax, pg_ssteps);
            spec.cell_template.name = "grid";
            spec.cell_template.replications = pg_reps;
            spec.cell_template.T_burn = pg_burn;
            spec.cell_template.T_stat = pg_stat;
            spec.cell_template.master_seed = pg_seed;
            spec.validate();
            const auto s = load_substrate(pg_sub, out);
            check_contraction(pg_params, s, err);
            const auto cells = run_phase_grid(spec, s, pg_params, {resolve_threads(g.threads), false});
            const auto conv = convergence_report(cells);
            std::size_t flagged = 0;
            for (const auto& r : conv) flagged += r.flagged ? 1 : 0;
            out << cells.size() << " cells, " << flagged << " above the standard-error limits\n";
            Output o(pg_out, g.json, out);
            o.emit("phase_grid", [&](std::ostream& os) { write_phase_grid_csv(cells, os); });
            o.emit("convergence", [&](std::ostream& os) { write_convergence_csv(conv, os); });
        };
    });

    // tail-fit
    auto* tail = app.add_subcommand("tail-fit", "Fit power-law tails to avalanche-size series");
    std::vector<std::string> tf_inputs;
    TailOptions tf_opts;
    bool tf_plain = false;
    std::string tf_out = "out";
    tail->add_option("series", tf_inputs, "Series files (avalanches_<regime>.csv or one integer per line)")
        ->required();
    tail->add_option("--min-tail", tf_opts.min_tail, "Minimum samples above x_min for an informative fit");
    tail->add_flag("--no-correction", tf_plain, "Use the plain continuous Hill estimator (no half-unit shift)");
    tail->add_option("--out", tf_out, "Output directory");
    tail->callback([&] {
        action = [&] {
            tf_opts.discrete_correction = !tf_plain;
            std::vector<NamedTailFit> fits;
            Output o(tf_out, g.json, out);
            for (const auto& path : tf_inputs) {
                if (!fs::exists(path)) throw InputError("series file not found: " + path);
                const auto all = read_avalanche_sizes(path);
                std::vector<std::uint64_t> positive;
                for (auto v : all) {
                    if (v > 0) positive.push_back(v);
                }
                const auto name = regime_name_from_path(path);
                const auto fit = select_xmin(positive, tf_opts);
                fits.push_back({name, fit});
                out << name << ": x_min " << fit.x_min << ", n_tail " << fit.n_tail << ", alpha "
                    << csv::format(fit.alpha) << (fit.informative ? "" : " (uninformative)") << '\n';
                if (!positive.empty()) {
                    const auto points = ccdf(positive);
                    o.emit("ccdf_" + name, [&](std::ostream& os) { write_ccdf_csv(points, os); });
                }
            }
            o.emit("tail_fits", [&](std::ostream& os) { write_tail_fits_csv(fits, os); });
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (action) action();
        return kOk;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kEngineError;
    }
}

}  // namespace hallsand::cli

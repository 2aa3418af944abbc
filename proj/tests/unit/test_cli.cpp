#include <doctest.h>

#include "support.hpp"

#include "cli.hpp"

#include "hallsand/csv.hpp"

#include <sstream>

using namespace hallsand;
using hallsand::test::TempDir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "hallsand");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> rows_of(const std::filesystem::path& p) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : csv::read_lines(p)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        for (auto f : csv::split(line)) fields.emplace_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return k;
    }
    FAIL("missing column " << name);
    return 0;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"simulate", "--help"}).code == cli::kOk);
    CHECK(run({}).code == cli::kInputError);
    CHECK(run({"frobnicate"}).code == cli::kInputError);
    CHECK(run({"simulate", "--scenario", "bogus"}).code == cli::kInputError);
}

TEST_CASE("input errors exit with code one") {
    TempDir dir("cli");
    CHECK(run({"network-panel", "--flows", (dir / "missing.csv").string(), "--out", dir.path().string()}).code ==
          cli::kInputError);
    test::write_file(dir / "empty.csv", "");
    CHECK(run({"tail-fit", (dir / "empty.csv").string(), "--out", dir.path().string()}).code == cli::kInputError);
}

TEST_CASE("synth then network-panel") {
    TempDir dir("cli");
    const auto data = dir / "data";
    REQUIRE(run({"synth", "--nodes", "60", "--density", "0.15", "--seed", "3", "--year", "2012", "--years", "3",
                 "--out", data.string()})
                .code == cli::kOk);
    const auto out = dir / "panel";
    const auto r = run({"network-panel", "--flows", (data / "flows.csv").string(), "--out", out.string()});
    REQUIRE(r.code == cli::kOk);
    const auto rows = rows_of(out / "panel.csv");
    REQUIRE(rows.size() == 4);
    const auto leak = column(rows[0], "rho_leak");
    const auto share = column(rows[0], "rho_share");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(rows[k][0] == std::to_string(2011 + k));
        CHECK(*csv::parse_double(rows[k][leak]) <= *csv::parse_double(rows[k][share]) + 1e-12);
    }
}

TEST_CASE("exposure writes both tables and a json mirror") {
    TempDir dir("cli");
    const auto r = run({"exposure", "--synth-nodes", "40", "--top", "5", "--field", "1.3", "--json", "--out",
                        dir.path().string()});
    REQUIRE(r.code == cli::kOk);
    CHECK(rows_of(dir / "exposure.csv").size() == 41);
    CHECK(rows_of(dir / "top_nodes.csv").size() == 6);
    CHECK(std::filesystem::exists(dir / "exposure.json"));
}

TEST_CASE("simulate is reproducible and thread independent") {
    TempDir dir("cli");
    const std::vector<std::string> common = {"simulate", "--synth-nodes", "40", "--replications", "4", "--burn",
                                             "10", "--periods", "30", "--series", "--seed", "5"};
    auto with = [&](const std::string& out, const std::string& threads) {
        auto args = common;
        args.insert(args.end(), {"--out", out, "--threads", threads});
        return run(args);
    };
    REQUIRE(with((dir / "a").string(), "1").code == cli::kOk);
    REQUIRE(with((dir / "b").string(), "3").code == cli::kOk);
    for (const char* name : {"scenarios.csv", "avalanches_stable.csv", "avalanches_avalanche.csv"}) {
        const auto a = test::read_file(dir / "a" / name);
        CHECK(!a.empty());
        CHECK(a == test::read_file(dir / "b" / name));
    }
    CHECK(rows_of(dir / "a" / "scenarios.csv").size() == 5);
    CHECK(rows_of(dir / "a" / "avalanches_latent.csv").size() == 1 + 4 * 30);

    const auto custom = run({"simulate", "--synth-nodes", "40", "--B-bar", "0.9", "--sigma-D", "1.1",
                             "--replications", "2", "--periods", "20", "--out", (dir / "c").string()});
    REQUIRE(custom.code == cli::kOk);
    const auto rows = rows_of(dir / "c" / "scenarios.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "custom");
    CHECK(run({"simulate", "--B-bar", "0.9", "--out", (dir / "d").string()}).code == cli::kInputError);
}

TEST_CASE("phase-grid and tail-fit") {
    TempDir dir("cli");
    REQUIRE(run({"phase-grid", "--synth-nodes", "30", "--B-steps", "2", "--sigmaD-steps", "3", "--replications",
                 "2", "--burn", "5", "--periods", "20", "--out", dir.path().string()})
                .code == cli::kOk);
    CHECK(rows_of(dir / "phase_grid.csv").size() == 7);
    CHECK(rows_of(dir / "convergence.csv").size() == 7);

    test::write_file(dir / "avalanches_flat.csv", "replication,period,S,B_realised,relax_rounds\n0,0,3,1,1\n0,1,3,1,1\n");
    std::string heavy;
    for (auto v : test::discrete_power_law(3000, 2.5, 1, 4)) heavy += std::to_string(v) + "\n";
    test::write_file(dir / "heavy.txt", heavy);
    const auto r = run({"tail-fit", (dir / "avalanches_flat.csv").string(), (dir / "heavy.txt").string(), "--out",
                        dir.path().string()});
    REQUIRE(r.code == cli::kOk);
    const auto fits = rows_of(dir / "tail_fits.csv");
    REQUIRE(fits.size() == 3);
    CHECK(fits[1][0] == "flat");
    CHECK(fits[1][column(fits[0], "informative")] == "false");
    CHECK(fits[2][column(fits[0], "informative")] == "true");
    CHECK(std::filesystem::exists(dir / "ccdf_flat.csv"));
}

TEST_CASE("config file supplies subcommand options") {
    TempDir dir("cli");
    test::write_file(dir / "run.toml", "[synth]\nnodes = 12\nseed = 8\n");
    REQUIRE(run({"--config", (dir / "run.toml").string(), "synth", "--out", dir.path().string()}).code == cli::kOk);
    // 12 nodes, every one with outflows, so row_use.csv has 12 rows.
    CHECK(rows_of(dir / "row_use.csv").size() == 13);
}

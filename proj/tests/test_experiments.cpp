// SPDX-License-Identifier: Apache-2.0
//
// beamcap: Hermite-Gaussian beamspace capacity of near-field LOS MIMO links
// Copyright (C) 2026 The beamcap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include "beamcap/cli.hpp"
#include "beamcap/experiments.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace beamcap;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace
{
fs::path scratch(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / ("beamcap_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);)
    {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

// 7 x 7 arrays 2 m apart; every dataset is cheap.
ExperimentConfig small_config(const fs::path &out)
{
    auto cfg = parse_config(R"(
link:
  distance_m: 2
array:
  half_index: 3
  spacing_m: 0.02
algorithm:
  estimation: ls
  repetitions: 2
  seed: 11
  hard_cap: 5
datasets:
  capture: {points: 5, max_order: 2}
  project: {l_max: 3, singular_modes: 20}
  beamspace: {l_max: [1, 2], repetitions: [1, 2]}
)");
    cfg.output_directory = out;
    return cfg;
}

int cli(const std::vector<std::string> &args, std::string *err_text = nullptr)
{
    std::vector<const char *> argv{"beamcap"};
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text)
        *err_text = err.str();
    return rc;
}

fs::path write_file(const fs::path &p, const std::string &text)
{
    std::ofstream(p) << text;
    return p;
}
} // namespace

TEST_CASE("sha256_hex - standard test vectors")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("format_number - round trips exactly")
{
    for (double v : {0.0, 1.0, -2.5, 1e-300, 0.1 + 0.2, 5.492515688821336, 2.6525823848649227e-05})
        CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("subcommand names round trip")
{
    for (const auto &[name, cmd] : subcommand_names())
    {
        CHECK(to_string(cmd) == name);
        CHECK(parse_subcommand(name) == cmd);
    }
    CHECK_THROWS_AS(parse_subcommand("plot"), config_error);
}

TEST_CASE("native - single element gives the Friis coefficient")
{
    auto cfg = load_config(BEAMCAP_SOURCE_DIR "/configs/single_element.yaml");
    cfg.output_directory = scratch("single");
    const auto report = run_experiment(Subcommand::native, cfg);
    const auto rows = read_csv(cfg.output_directory / "singular_values.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"k", "sigma_linear", "sigma_db"});
    const double friis = std::abs(friis_coefficient(0.005, 15.0));
    CHECK(std::stod(rows[1][1]) == Approx(friis).epsilon(1e-15));
    CHECK(friis == Approx(0.005 / (4 * pi * 15)).epsilon(1e-15));
    CHECK(report.summary["native"]["elements"] == 1);
    CHECK(report.summary["native"]["effective_rank"] == 1);
}

TEST_CASE("all - reruns are byte identical and the manifest covers every file")
{
    const auto a = run_experiment(Subcommand::all, small_config(scratch("rerun_a")));
    const auto b = run_experiment(Subcommand::all, small_config(scratch("rerun_b")));
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t f = 0; f < a.files.size(); ++f)
    {
        CHECK(a.files[f].name == b.files[f].name);
        CHECK(a.files[f].sha256 == b.files[f].sha256);
        CHECK(slurp(a.directory / a.files[f].name) == slurp(b.directory / b.files[f].name));
    }

    std::set<std::string> listed, on_disk;
    for (const auto &f : a.manifest["files"])
    {
        listed.insert(f["name"].get<std::string>());
        const auto content = slurp(a.directory / f["name"].get<std::string>());
        CHECK(f["sha256"] == sha256_hex(content));
        CHECK(f["bytes"] == content.size());
    }
    for (const auto &entry : fs::directory_iterator(a.directory))
        if (entry.path().filename() != "manifest.json")
            on_disk.insert(entry.path().filename().string());
    CHECK(listed == on_disk);
    for (const char *name : {"link_budget.csv", "singular_values.csv", "captured_power.csv", "residuals.csv",
                             "beamspace_sv.csv", "estimation_error.csv", "capacity_trace.csv", "allocation.csv",
                             "summary.json"})
        CHECK(listed.contains(name));

    const auto manifest = nlohmann::json::parse(slurp(a.directory / "manifest.json"));
    CHECK(manifest["config"]["algorithm"]["seed"] == 11);
    CHECK(manifest["versions"].contains("eigen"));
    CHECK(manifest["subcommand"] == "all");
}

TEST_CASE("all - every dataset has a header row and rectangular rows")
{
    const auto report = run_experiment(Subcommand::all, small_config(scratch("headers")));
    for (const auto &f : report.files)
    {
        if (fs::path(f.name).extension() != ".csv")
            continue;
        INFO(f.name);
        const auto rows = read_csv(report.directory / f.name);
        REQUIRE(rows.size() >= 2);
        for (const auto &h : rows[0])
            CHECK(std::isalpha(static_cast<unsigned char>(h.front())));
        for (const auto &r : rows)
            CHECK(r.size() == rows[0].size());
    }
}

TEST_CASE("all - stage timings account for the wall clock")
{
    const auto report = run_experiment(Subcommand::all, small_config(scratch("timings")));
    double sum = 0.0;
    for (const auto &t : report.timings)
    {
        CHECK(t.seconds >= 0.0);
        sum += t.seconds;
    }
    CHECK(sum == Approx(report.wall_seconds).epsilon(0.10));
    CHECK(report.manifest["timings"].size() == report.timings.size());
}

TEST_CASE("capacity - reference link overhead accounting")
{
    auto cfg = load_config(BEAMCAP_SOURCE_DIR "/configs/reference_link.yaml");
    cfg.output_directory = scratch("reference_capacity");
    const auto report = run_experiment(Subcommand::capacity, cfg);
    const auto &c = report.summary["capacity"];
    CHECK(c["antenna_reference_signals"] == 729);
    CHECK(c["hg_reference_signals"].get<int>() >= 81);
    CHECK(c["hg_reference_signals"].get<int>() <= 169);
    CHECK(c["converged"] == true);
    bool found = false;
    for (const auto &row : c["overhead_by_l_max"])
        if (row["l_max"] == 8)
        {
            found = true;
            CHECK(row["hg_reference_signals"] == 81);
            CHECK(row["antenna_reference_signals"] == 729);
            CHECK(row["overhead_reduction"].get<double>() == Approx(0.889).margin(0.001));
        }
    CHECK(found);
    const auto trace = read_csv(cfg.output_directory / "capacity_trace.csv");
    CHECK(std::stoi(trace.back()[1]) == c["l_max"].get<int>());
    const auto alloc = read_csv(cfg.output_directory / "allocation.csv");
    double power = 0.0;
    for (std::size_t r = 1; r < alloc.size(); ++r)
        power += std::stod(alloc[r][2]);
    CHECK(power == Approx(dbm_to_watts(-20.0)).epsilon(1e-10));
}

TEST_CASE("run_cli - exit codes")
{
    const auto dir = scratch("cli");
    const auto small = write_file(dir / "small.yaml", "array:\n  half_index: 1\nlink:\n  distance_m: 1\n");
    const auto unknown = write_file(dir / "unknown.yaml", "link:\n  distance_m: 15\n  distanse_m: 16\n");
    const auto overflow = write_file(dir / "overflow.yaml", "array:\n  half_index: 0\nlink:\n  tx_power_dbm: 4000\n");
    std::string err;

    CHECK(cli({"native", "--config", small.string(), "--out", (dir / "ok").string()}) == 0);
    CHECK(fs::exists(dir / "ok" / "manifest.json"));
    CHECK(cli({"capacity", "--config", small.string(), "--out", (dir / "ok2").string(), "--seed", "3", "--epsilon",
               "1e-4", "--lmax-cap", "3", "--estimation", "ls", "--pattern", "directional", "--mcs-cap", "5.5547"}) == 0);
    const auto manifest = nlohmann::json::parse(slurp(dir / "ok2" / "manifest.json"));
    CHECK(manifest["config"]["algorithm"]["seed"] == 3);
    CHECK(manifest["config"]["algorithm"]["hard_cap"] == 3);
    CHECK(manifest["config"]["algorithm"]["pattern"] == "directional");

    CHECK(cli({"native", "--config", unknown.string(), "--out", (dir / "x").string()}, &err) == exit_config);
    CHECK_THAT(err, ContainsSubstring("unknown.yaml:3: unknown key 'link.distanse_m'"));
    CHECK(cli({"native"}) == exit_config);
    CHECK(cli({"plot", "--config", small.string()}) == exit_config);
    CHECK(cli({"native", "--config", small.string(), "--estimation", "guess"}) == exit_config);
    CHECK(cli({"native", "--config", small.string(), "--lmax-cap", "many"}) == exit_config);

    CHECK(cli({"native", "--config", overflow.string(), "--out", (dir / "y").string()}, &err) == exit_numerical);
    CHECK_THAT(err, ContainsSubstring("stage 'native.spectrum'"));

    write_file(dir / "blocker", "");
    CHECK(cli({"native", "--config", small.string(), "--out", (dir / "blocker").string()}) == exit_io);
    CHECK(cli({"--help"}) == exit_ok);
}

TEST_CASE("beamcap binary - exit status seen by the shell")
{
    const auto dir = scratch("binary");
    const auto overflow = write_file(dir / "overflow.yaml", "array:\n  half_index: 0\nlink:\n  tx_power_dbm: 4000\n");
    const auto run = [&](const std::string &args) {
        const int status = std::system((std::string(BEAMCAP_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(run("capacity --config " + overflow.string() + " --out " + (dir / "a").string()) == 3);
    CHECK(run("native --config " + (dir / "missing.yaml").string()) == 2);
    CHECK(run("native --config " BEAMCAP_SOURCE_DIR "/configs/single_element.yaml --out " + (dir / "b").string()) == 0);
}

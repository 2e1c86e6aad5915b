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

#ifndef BEAMCAP_CLI_HPP
#define BEAMCAP_CLI_HPP

#include "beamcap/config.hpp"
#include "beamcap/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace beamcap
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_io = 1,
    exit_config = 2,
    exit_numerical = 3
};

// beamcap <subcommand> --config <path> [overrides]
// Precedence: built-in defaults < config file < command-line flags.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"Hermite-Gaussian beamspace capacity of near-field LOS MIMO links", "beamcap"};
    app.set_version_flag("--version", BEAMCAP_VERSION);

    std::string command;
    std::string config_path;
    ConfigOverrides o;
    std::string out_dir;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    int lmax_cap = 0;
    std::string estimation, pattern, mcs_cap;

    std::vector<std::string> names;
    for (const auto &[name, cmd] : subcommand_names())
        names.push_back(name);
    app.add_option("subcommand", command, "link-budget | native | capture | project | beamspace | capacity | all")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config_path, "YAML config file")->required();
    auto *o_out = app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    auto *o_seed = app.add_option("--seed", seed, "sounding noise seed");
    auto *o_eps = app.add_option("--epsilon", epsilon, "relative stopping tolerance");
    auto *o_cap = app.add_option("--lmax-cap", lmax_cap, "largest frontier index the iteration may reach");
    auto *o_est = app.add_option("--estimation", estimation, "noiseless | ls");
    auto *o_pat = app.add_option("--pattern", pattern, "isotropic | directional");
    auto *o_mcs = app.add_option("--mcs-cap", mcs_cap, "per-mode rate cap in bits/s/Hz, or 'none'");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        out << app.help();
        return exit_ok;
    }
    catch (const CLI::CallForVersion &)
    {
        out << BEAMCAP_VERSION << "\n";
        return exit_ok;
    }
    catch (const CLI::ParseError &e)
    {
        err << "beamcap: " << e.what() << "\n";
        return exit_config;
    }

    if (*o_out)
        o.output_directory = out_dir;
    if (*o_seed)
        o.seed = seed;
    if (*o_eps)
        o.epsilon = epsilon;
    if (*o_cap)
        o.lmax_cap = lmax_cap;
    if (*o_est)
        o.estimation = estimation;
    if (*o_pat)
        o.pattern = pattern;
    if (*o_mcs)
        o.mcs_cap = mcs_cap;

    ExperimentConfig cfg;
    try
    {
        cfg = load_config(config_path);
        apply_overrides(cfg, o);
        // build every derived object once so invalid combinations fail before any stage runs
        (void)cfg.link_budget();
        (void)cfg.tx_array();
        (void)cfg.beam_parameters();
    }
    catch (const std::exception &e)
    {
        err << "beamcap: config error: " << e.what() << "\n";
        return exit_config;
    }

    try
    {
        const auto report = run_experiment(parse_subcommand(command), cfg);
        out << "beamcap " << command << ": wrote " << report.files.size() + 1 << " files to " << report.directory.string()
            << " in " << report.wall_seconds << " s\n";
        if (report.summary.contains("capacity"))
        {
            const auto &c = report.summary["capacity"];
            out << "  SE " << c["se_bits_per_hz"].get<double>() << " bits/s/Hz at L_max " << c["l_max"].get<int>() << " ("
                << c["hg_reference_signals"].get<std::size_t>() << " HG reference signals vs "
                << c["antenna_reference_signals"].get<std::size_t>() << ")\n";
        }
        return exit_ok;
    }
    catch (const stage_error &e)
    {
        err << "beamcap: numerical error: " << e.what() << "\n";
        return exit_numerical;
    }
    catch (const std::exception &e)
    {
        err << "beamcap: " << e.what() << "\n";
        return exit_io;
    }
}

} // namespace beamcap

#endif

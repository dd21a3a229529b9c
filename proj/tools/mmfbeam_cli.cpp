// SPDX-License-Identifier: Apache-2.0
//
// mmfbeam: max-min fair multigroup multicast beamforming
// Copyright (C) 2026 the mmfbeam authors
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
//
// Command-line experiment runner: seeded Monte-Carlo sweeps (sweep,
// contributions), slope-vs-theory checks (dof-check) and the closed-form
// DoF table (dof). Configuration comes from a JSON file and/or flags; the
// flags win.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmfbeam/dof.hpp"
#include "mmfbeam/harness.hpp"

namespace {

using mmfbeam::GroupLayout;
namespace harness = mmfbeam::harness;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::vector<int> groups;
    std::optional<int> antennas;
    std::vector<double> snr_db;
    std::optional<int> realizations;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> strategies;
    std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags)
{
    cmd->add_option("--config", flags.config_path, "JSON experiment config");
    cmd->add_option("--out", flags.out_path, "CSV output path (default: stdout)");
    cmd->add_option("--groups", flags.groups, "group sizes, e.g. --groups 1 2 3")
        ->delimiter(',');
    cmd->add_option("--antennas", flags.antennas, "number of transmit antennas");
    cmd->add_option("--snr", flags.snr_db, "SNR grid in dB")->delimiter(',');
    cmd->add_option("--realizations", flags.realizations, "Monte-Carlo realizations");
    cmd->add_option("--seed", flags.seed, "base seed");
    cmd->add_option("--strategy", flags.strategies,
                    "strategies: designated degraded_ss rs zf_full zf_partial "
                    "degraded_superposition rs_partitioned")
        ->delimiter(',');
    cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
}

harness::ExperimentConfig build_config(const CommonFlags& flags)
{
    harness::ExperimentConfig config;
    if (!flags.config_path.empty())
        config = harness::load_config_file(flags.config_path);
    else
        config.realizations = 20; // desk-scale default when configured from flags

    if (!flags.groups.empty() || flags.antennas)
    {
        if (flags.groups.empty() || !flags.antennas)
            throw CLI::ValidationError("--groups and --antennas must be given together");
        config.layout = GroupLayout(*flags.antennas, flags.groups);
    }
    else if (flags.config_path.empty())
        throw CLI::ValidationError("need --config or --groups/--antennas");

    if (!flags.snr_db.empty())
        config.snr_db = flags.snr_db;
    if (flags.realizations)
        config.realizations = *flags.realizations;
    if (flags.seed)
        config.base_seed = *flags.seed;
    if (!flags.strategies.empty())
    {
        config.strategies.clear();
        for (const auto& name : flags.strategies)
            config.strategies.push_back(harness::strategy_from_string(name));
    }
    if (flags.threads)
        config.threads = *flags.threads;
    if (!flags.out_path.empty())
        config.output_path = flags.out_path;
    return config;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty())
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

int report_failures(const harness::SweepResult& result)
{
    const int failures = result.total_failures();
    if (failures == 0)
        return 0;
    for (const auto& cell : result.cells)
        if (cell.failures > 0)
            std::cerr << "failure: strategy=" << harness::to_string(cell.strategy)
                      << " snr_db=" << cell.snr_db << " failed_realizations=" << cell.failures
                      << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"max-min fair multigroup multicast beamforming experiments"};
    app.require_subcommand(1);

    CommonFlags sweep_flags, contrib_flags, dofcheck_flags, dof_flags;

    CLI::App* sweep = app.add_subcommand("sweep", "MMF rate vs SNR for selected strategies");
    add_common_flags(sweep, sweep_flags);

    CLI::App* contributions = app.add_subcommand(
        "contributions", "per-group common/designated rate split of the RS solution");
    add_common_flags(contributions, contrib_flags);

    CLI::App* dof_check = app.add_subcommand(
        "dof-check", "measured MMF slope of each constructive scheme vs closed-form DoF");
    add_common_flags(dof_check, dofcheck_flags);

    CLI::App* dof_cmd = app.add_subcommand("dof", "closed-form DoF table for a layout");
    std::vector<int> dof_groups;
    std::vector<int> dof_antennas;
    std::string dof_out;
    dof_cmd->add_option("--groups", dof_groups, "group sizes")->delimiter(',')->required();
    dof_cmd->add_option("--antennas", dof_antennas, "antenna counts (one row each)")
        ->delimiter(',')
        ->required();
    dof_cmd->add_option("--out", dof_out, "CSV output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (sweep->parsed())
        {
            const auto config = build_config(sweep_flags);
            const auto result = harness::run_sweep(config);
            if (config.output_path.empty())
                std::cout << result.to_csv();
            return report_failures(result);
        }
        if (contributions->parsed())
        {
            const auto config = build_config(contrib_flags);
            const auto result = harness::run_contributions(config);
            if (config.output_path.empty())
                std::cout << result.to_csv();
            return report_failures(result);
        }
        if (dof_check->parsed())
        {
            const auto config = build_config(dofcheck_flags);
            const auto rows = harness::run_dof_check(
                {config.layout}, config.strategies,
                config.realizations, config.base_seed);
            emit(harness::dof_check_csv(rows), config.output_path);
            int flagged = 0;
            for (const auto& row : rows)
                if (row.flagged)
                {
                    std::cerr << "flagged: " << row.layout.describe() << " "
                              << harness::to_string(row.strategy) << " theory=" << row.theory
                              << " measured=" << row.measured << "\n";
                    flagged++;
                }
            return flagged == 0 ? 0 : 1;
        }
        if (dof_cmd->parsed())
        {
            std::string csv = "groups,antennas,designated,degraded,rs,m_d_star,regime\n";
            for (int n : dof_antennas)
            {
                const GroupLayout layout(n, dof_groups);
                const auto rep = mmfbeam::dof::analyze(layout);
                csv += '"';
                for (std::size_t m = 0; m < dof_groups.size(); m++)
                    csv += (m ? "," : "") + std::to_string(dof_groups[m]);
                csv += "\"," + std::to_string(n) + ',' + mmfbeam::dof::to_string(rep.designated) +
                       ',' + mmfbeam::dof::to_string(rep.degraded) + ',' +
                       mmfbeam::dof::to_string(rep.rs) + ',' + std::to_string(rep.m_d_star) + ',' +
                       mmfbeam::dof::to_string(rep.regime) + '\n';
            }
            emit(csv, dof_out);
            return 0;
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

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

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <nlohmann/json.hpp>

#include "mmfbeam/harness.hpp"

using namespace mmfbeam;
using Catch::Approx;
namespace hn = mmfbeam::harness;

namespace {

hn::ExperimentConfig small_config()
{
    hn::ExperimentConfig config;
    config.layout = GroupLayout(4, {1, 2, 3});
    config.snr_db = {10.0, 15.0};
    config.realizations = 2;
    config.base_seed = 3;
    config.strategies = {hn::Strategy::Designated, hn::Strategy::Rs};
    config.solver.restarts = 1;
    config.threads = 1;
    return config;
}

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("config validation")
{
    hn::ExperimentConfig config = small_config();
    config.strategies.clear();
    REQUIRE_THROWS_AS(hn::run_sweep(config), std::invalid_argument);

    config = small_config();
    config.snr_db.clear();
    REQUIRE_THROWS_AS(hn::run_sweep(config), std::invalid_argument);

    config = small_config();
    config.realizations = 0;
    REQUIRE_THROWS_AS(hn::run_sweep(config), std::invalid_argument);
}

TEST_CASE("strategy names round-trip")
{
    for (hn::Strategy s :
         {hn::Strategy::Designated, hn::Strategy::DegradedSingleStream, hn::Strategy::Rs,
          hn::Strategy::ZfFull, hn::Strategy::ZfPartial, hn::Strategy::DegradedSuperposition,
          hn::Strategy::RsPartitioned})
        REQUIRE(hn::strategy_from_string(hn::to_string(s)) == s);
    REQUIRE_THROWS_AS(hn::strategy_from_string("sdr"), std::invalid_argument);
}

TEST_CASE("config parses from JSON")
{
    const nlohmann::json j = {
        {"groups", {1, 2, 3}},
        {"antennas", 4},
        {"snr_db", {10.0, 20.0}},
        {"realizations", 7},
        {"base_seed", 99},
        {"strategies", {"rs", "zf_full"}},
        {"solver", {{"max_ao_iters", 50}, {"ao_tol", 1e-3}, {"restarts", 2}}},
        {"output", "out.csv"},
    };
    const hn::ExperimentConfig config = hn::parse_config(j);
    REQUIRE(config.layout.antennas() == 4);
    REQUIRE(config.layout.groups() == 3);
    REQUIRE(config.snr_db.size() == 2);
    REQUIRE(config.realizations == 7);
    REQUIRE(config.base_seed == 99);
    REQUIRE(config.strategies ==
            std::vector<hn::Strategy>{hn::Strategy::Rs, hn::Strategy::ZfFull});
    REQUIRE(config.solver.max_iters == 50);
    REQUIRE(config.solver.tolerance == 1e-3);
    REQUIRE(config.solver.restarts == 2);
    REQUIRE(config.output_path == "out.csv");
}

TEST_CASE("identical configs produce byte-identical CSV")
{
    hn::ExperimentConfig config = small_config();
    config.strategies = {hn::Strategy::ZfPartial, hn::Strategy::RsPartitioned};
    const std::string a = hn::run_sweep(config).to_csv();
    const std::string b = hn::run_sweep(config).to_csv();
    REQUIRE(a == b);

    // parallel execution reduces in realization order, so the bytes match too
    config.threads = 2;
    config.realizations = 4;
    const std::string c = hn::run_sweep(config).to_csv();
    config.threads = 1;
    const std::string d = hn::run_sweep(config).to_csv();
    REQUIRE(c == d);
}

TEST_CASE("CSV geometry matches the config cardinalities")
{
    hn::ExperimentConfig config = small_config();
    config.strategies = {hn::Strategy::ZfPartial, hn::Strategy::RsPartitioned,
                         hn::Strategy::DegradedSuperposition};
    const hn::SweepResult result = hn::run_sweep(config);
    REQUIRE(result.cells.size() == config.strategies.size() * config.snr_db.size());
    const std::string csv = result.to_csv();
    REQUIRE(count_lines(csv) ==
            1 + static_cast<int>(result.cells.size()) * config.layout.groups());
    const std::string header = csv.substr(0, csv.find('\n'));
    REQUIRE(header ==
            "strategy,snr_db,mean_mmf_bps_hz,stderr,group_index,mean_group_rate,"
            "mean_common_share,mean_designated_part,failures");
}

TEST_CASE("strategies are paired: each realization reuses the same channel")
{
    hn::ExperimentConfig config = small_config();
    config.snr_db = {15.0};
    config.realizations = 1;
    config.base_seed = 12;
    config.strategies = {hn::Strategy::Designated};
    const double sweep_mmf = hn::run_sweep(config).cells[0].mean_mmf;

    const ChannelSet ch = sample_channel(config.layout, 12);
    wmmse::AoOptions opts = config.solver;
    opts.seed = 12;
    const auto direct = wmmse::ao_solve(config.layout, ch, std::pow(10.0, 1.5),
                                        wmmse::SolveMode::Designated, opts);
    REQUIRE(sweep_mmf == direct.report.mmf);
}

TEST_CASE("rate-splitting dominates the baselines per paired realization")
{
    for (std::uint64_t seed : {1, 2, 3})
    {
        hn::ExperimentConfig config = small_config();
        config.snr_db = {15.0};
        config.realizations = 1;
        config.base_seed = seed;
        config.strategies = {hn::Strategy::Designated, hn::Strategy::DegradedSingleStream,
                             hn::Strategy::Rs};
        const hn::SweepResult result = hn::run_sweep(config);
        REQUIRE(result.total_failures() == 0);
        const double designated = result.cells[0].mean_mmf;
        const double degraded = result.cells[1].mean_mmf;
        const double rs = result.cells[2].mean_mmf;
        REQUIRE(rs >= designated - 1e-6);
        REQUIRE(rs >= degraded - 1e-6);
    }
}

TEST_CASE("contribution accounting: shares plus designated parts equal group rates")
{
    hn::ExperimentConfig config = small_config();
    config.snr_db = {20.0};
    config.realizations = 2;
    config.strategies = {hn::Strategy::Rs, hn::Strategy::DegradedSingleStream};
    const hn::SweepResult result = hn::run_contributions(config);
    for (const auto& cell : result.cells)
    {
        for (int m = 0; m < config.layout.groups(); m++)
            REQUIRE(cell.mean_common_share[m] + cell.mean_designated_part[m] ==
                    Approx(cell.mean_group_rate[m]).margin(1e-9));
        if (cell.strategy == hn::Strategy::DegradedSingleStream)
            REQUIRE(cell.mean_designated_part.isZero(0.0));
    }
}

TEST_CASE("contributions require the rate-splitting strategy")
{
    hn::ExperimentConfig config = small_config();
    config.strategies = {hn::Strategy::Designated};
    REQUIRE_THROWS_AS(hn::run_contributions(config), std::invalid_argument);
}

TEST_CASE("solver failures are recorded per cell and the sweep continues")
{
    hn::ExperimentConfig config = small_config();
    config.layout = GroupLayout(5, {1, 2, 3});  // zf_full infeasible: N_M = 6
    config.snr_db = {10.0};
    config.realizations = 2;
    config.strategies = {hn::Strategy::ZfFull, hn::Strategy::ZfPartial};
    const hn::SweepResult result = hn::run_sweep(config);
    REQUIRE(result.cells[0].failures == 2);
    REQUIRE(result.cells[0].mean_mmf == 0.0);
    REQUIRE(result.cells[1].failures == 0);
    REQUIRE(result.cells[1].mean_mmf > 0.0);
    REQUIRE(result.total_failures() == 2);
    REQUIRE(result.to_csv().find("zf_full,10,0,0,1,0,0,0,2") != std::string::npos);
}

TEST_CASE("dof-check compares theory with measured slopes")
{
    const std::vector<GroupLayout> layouts = {GroupLayout(6, {1, 2, 3})};
    const auto rows = hn::run_dof_check(layouts, {hn::Strategy::ZfFull}, 5, 1);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].theory == 1.0);
    REQUIRE(rows[0].theory_exact == "1");
    REQUIRE(rows[0].measured == Approx(1.0).margin(0.1));
    REQUIRE_FALSE(rows[0].flagged);

    const auto deg = hn::run_dof_check({GroupLayout(4, {2, 2, 2})},
                                       {hn::Strategy::DegradedSuperposition,
                                        hn::Strategy::RsPartitioned},
                                       5, 1);
    REQUIRE(deg[0].theory == Approx(1.0 / 3.0));
    REQUIRE(deg[1].theory == 0.5);
    REQUIRE(deg[1].theory_exact == "1/2");

    const std::string csv = hn::dof_check_csv(deg);
    REQUIRE(csv.find("groups,antennas,strategy,theory,theory_exact,measured_slope,flag") == 0);
    REQUIRE(count_lines(csv) == 3);
}

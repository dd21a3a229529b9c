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
// Seeded Monte-Carlo sweeps over SNR, strategies and layouts. Realization r
// always uses seed base_seed + r, so every strategy in a sweep sees the same
// channels (paired comparison) and repeated runs produce byte-identical CSV.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "channel.hpp"
#include "dof.hpp"
#include "group_layout.hpp"
#include "rates.hpp"
#include "schemes.hpp"
#include "wmmse.hpp"

namespace mmfbeam::harness {

enum class Strategy {
    Designated,
    DegradedSingleStream,
    Rs,
    ZfFull,
    ZfPartial,
    DegradedSuperposition,
    RsPartitioned,
};

inline std::string to_string(Strategy s)
{
    switch (s)
    {
    case Strategy::Designated: return "designated";
    case Strategy::DegradedSingleStream: return "degraded_ss";
    case Strategy::Rs: return "rs";
    case Strategy::ZfFull: return "zf_full";
    case Strategy::ZfPartial: return "zf_partial";
    case Strategy::DegradedSuperposition: return "degraded_superposition";
    case Strategy::RsPartitioned: return "rs_partitioned";
    }
    return "?";
}

inline Strategy strategy_from_string(const std::string& name)
{
    for (Strategy s : {Strategy::Designated, Strategy::DegradedSingleStream, Strategy::Rs,
                       Strategy::ZfFull, Strategy::ZfPartial, Strategy::DegradedSuperposition,
                       Strategy::RsPartitioned})
        if (to_string(s) == name)
            return s;
    throw std::invalid_argument("unknown strategy: " + name);
}

struct ExperimentConfig {
    GroupLayout layout{1, {1}};
    std::vector<double> snr_db;
    int realizations = 100;
    std::uint64_t base_seed = 0;
    std::vector<Strategy> strategies;
    wmmse::AoOptions solver;
    std::string output_path;
    int threads = 0;  // 0 = hardware concurrency
};

inline void validate(const ExperimentConfig& config)
{
    if (config.snr_db.empty())
        throw std::invalid_argument("config: snr_db list must not be empty");
    if (config.strategies.empty())
        throw std::invalid_argument("config: strategy list must not be empty");
    if (config.realizations < 1)
        throw std::invalid_argument("config: need at least one realization");
}

inline ExperimentConfig parse_config(const nlohmann::json& j)
{
    ExperimentConfig config;
    config.layout = GroupLayout(j.at("antennas").get<int>(),
                                j.at("groups").get<std::vector<int>>());
    config.snr_db = j.at("snr_db").get<std::vector<double>>();
    config.realizations = j.value("realizations", 100);
    config.base_seed = j.value("base_seed", std::uint64_t{0});
    for (const auto& name : j.at("strategies"))
        config.strategies.push_back(strategy_from_string(name.get<std::string>()));
    if (j.contains("solver"))
    {
        const auto& s = j["solver"];
        config.solver.max_iters = s.value("max_ao_iters", config.solver.max_iters);
        config.solver.tolerance = s.value("ao_tol", config.solver.tolerance);
        config.solver.restarts = s.value("restarts", config.solver.restarts);
    }
    config.output_path = j.value("output", std::string{});
    config.threads = j.value("threads", 0);
    return config;
}

inline ExperimentConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return parse_config(j);
}

namespace detail {

// one strategy evaluated on one channel at one power level
struct CellSample {
    bool failed = true;
    double mmf = 0.0;
    Eigen::VectorXd group_rates;
    Eigen::VectorXd common_share;
    Eigen::VectorXd designated_part;
    int iterations = 0;
};

inline Eigen::VectorXd per_group_min(const GroupLayout& layout, const Eigen::VectorXd& user_rates)
{
    Eigen::VectorXd v(layout.groups());
    for (int m = 0; m < layout.groups(); m++)
        v[m] = user_rates.segment(layout.group_begin(m), layout.group_size(m)).minCoeff();
    return v;
}

inline CellSample sample_from_precoder(const GroupLayout& layout, const ChannelSet& channel,
                                       const RsPrecoder& precoder, const RateReport& report,
                                       int iterations)
{
    CellSample s;
    s.failed = false;
    s.mmf = report.mmf;
    s.group_rates = report.group_rates;
    s.common_share = precoder.common_shares;
    s.designated_part = per_group_min(layout, report.user_rates);
    s.iterations = iterations;
    (void)channel;
    return s;
}

template <typename F>
inline void parallel_for_ordered(int count, int threads, F&& body)
{
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1)
    {
        for (int i = 0; i < count; i++)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; t++)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                body(i);
        });
    for (auto& th : pool)
        th.join();
}

inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

struct SweepCell {
    Strategy strategy = Strategy::Designated;
    double snr_db = 0.0;
    double mean_mmf = 0.0;
    double stderr_mmf = 0.0;
    Eigen::VectorXd mean_group_rate;
    Eigen::VectorXd mean_common_share;
    Eigen::VectorXd mean_designated_part;
    double mean_iterations = 0.0;
    int failures = 0;
};

struct SweepResult {
    GroupLayout layout{1, {1}};
    std::vector<SweepCell> cells;  // |strategies| x |snr_db|, strategy-major

    int total_failures() const
    {
        int n = 0;
        for (const auto& c : cells)
            n += c.failures;
        return n;
    }

    std::string to_csv() const
    {
        std::ostringstream out;
        out << "strategy,snr_db,mean_mmf_bps_hz,stderr,group_index,mean_group_rate,"
               "mean_common_share,mean_designated_part,failures\n";
        for (const auto& c : cells)
            for (int m = 0; m < layout.groups(); m++)
                out << to_string(c.strategy) << ',' << detail::format_number(c.snr_db) << ','
                    << detail::format_number(c.mean_mmf) << ','
                    << detail::format_number(c.stderr_mmf) << ',' << (m + 1) << ','
                    << detail::format_number(c.mean_group_rate[m]) << ','
                    << detail::format_number(c.mean_common_share[m]) << ','
                    << detail::format_number(c.mean_designated_part[m]) << ',' << c.failures
                    << '\n';
        return out.str();
    }

    void write_csv(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot open output file: " + path);
        out << to_csv();
    }
};

/// Runs every configured strategy over the seeded channel ensemble. Solver
/// strategies are evaluated designated / degraded first so the rate-splitting
/// solve can warm-start from their solutions on the same channel. Per-cell
/// solver errors are recorded as failures; the sweep continues.
inline SweepResult run_sweep(const ExperimentConfig& config)
{
    validate(config);
    const GroupLayout& layout = config.layout;
    const int n_snr = static_cast<int>(config.snr_db.size());
    const int n_strat = static_cast<int>(config.strategies.size());
    const int n_real = config.realizations;

    // samples[r][s * n_snr + p]
    std::vector<std::vector<detail::CellSample>> samples(
        n_real, std::vector<detail::CellSample>(n_strat * n_snr));

    // evaluate designated and degraded before rs so rs can warm-start from
    // their solutions on the same channel
    std::vector<int> eval_order(n_strat);
    for (int s = 0; s < n_strat; s++)
        eval_order[s] = s;
    auto rank = [&](int s) {
        switch (config.strategies[s])
        {
        case Strategy::Designated: return 0;
        case Strategy::DegradedSingleStream: return 1;
        case Strategy::Rs: return 2;
        default: return 3;
        }
    };
    std::stable_sort(eval_order.begin(), eval_order.end(),
                     [&](int a, int b) { return rank(a) < rank(b); });

    detail::parallel_for_ordered(n_real, config.threads, [&](int r) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
        const ChannelSet channel = sample_channel(layout, seed);
        for (int p = 0; p < n_snr; p++)
        {
            const double power = std::pow(10.0, config.snr_db[p] / 10.0);

            // solver strategies share warm starts within one (channel, power) cell
            std::vector<RsPrecoder> warm;
            auto solve_mode = [&](wmmse::SolveMode mode) {
                wmmse::AoOptions opts = config.solver;
                opts.seed = seed;
                if (mode == wmmse::SolveMode::Rs)
                    opts.warm_starts = warm;
                return ao_solve(layout, channel, power, mode, opts);
            };

            for (const int s : eval_order)
            {
                detail::CellSample& slot = samples[r][s * n_snr + p];
                try
                {
                    switch (config.strategies[s])
                    {
                    case Strategy::Designated:
                    {
                        const auto res = solve_mode(wmmse::SolveMode::Designated);
                        warm.push_back(res.precoder);
                        slot = detail::sample_from_precoder(layout, channel, res.precoder,
                                                            res.report, res.total_iterations);
                        break;
                    }
                    case Strategy::DegradedSingleStream:
                    {
                        const auto res = solve_mode(wmmse::SolveMode::DegradedSingleStream);
                        warm.push_back(res.precoder);
                        slot = detail::sample_from_precoder(layout, channel, res.precoder,
                                                            res.report, res.total_iterations);
                        break;
                    }
                    case Strategy::Rs:
                    {
                        const auto res = solve_mode(wmmse::SolveMode::Rs);
                        slot = detail::sample_from_precoder(layout, channel, res.precoder,
                                                            res.report, res.total_iterations);
                        break;
                    }
                    case Strategy::ZfFull:
                    {
                        const RsPrecoder pre = schemes::build_zf_full(layout, channel, power);
                        slot = detail::sample_from_precoder(layout, channel, pre,
                                                            rates_designated(layout, channel, pre), 0);
                        break;
                    }
                    case Strategy::ZfPartial:
                    {
                        const RsPrecoder pre = schemes::build_zf_partial(layout, channel, power);
                        slot = detail::sample_from_precoder(layout, channel, pre,
                                                            rates_designated(layout, channel, pre), 0);
                        break;
                    }
                    case Strategy::DegradedSuperposition:
                    {
                        const auto design =
                            schemes::build_degraded_superposition(layout, channel, power, seed);
                        const RateReport rep =
                            rates_degraded_sic(layout, channel, design.beams, design.order);
                        slot.failed = false;
                        slot.mmf = rep.mmf;
                        slot.group_rates = rep.group_rates;
                        slot.common_share = Eigen::VectorXd::Zero(layout.groups());
                        slot.designated_part = rep.group_rates;
                        slot.iterations = 0;
                        break;
                    }
                    case Strategy::RsPartitioned:
                    {
                        const RsPrecoder pre =
                            schemes::build_rs_partitioned(layout, channel, power, -1.0, seed);
                        slot = detail::sample_from_precoder(layout, channel, pre,
                                                            rates_rs(layout, channel, pre), 0);
                        break;
                    }
                    }
                }
                catch (const std::exception&)
                {
                    slot = detail::CellSample{};
                    slot.group_rates = Eigen::VectorXd::Zero(layout.groups());
                    slot.common_share = Eigen::VectorXd::Zero(layout.groups());
                    slot.designated_part = Eigen::VectorXd::Zero(layout.groups());
                }
            }
        }
    });

    SweepResult result;
    result.layout = layout;
    for (int s = 0; s < n_strat; s++)
        for (int p = 0; p < n_snr; p++)
        {
            SweepCell cell;
            cell.strategy = config.strategies[s];
            cell.snr_db = config.snr_db[p];
            cell.mean_group_rate = Eigen::VectorXd::Zero(layout.groups());
            cell.mean_common_share = Eigen::VectorXd::Zero(layout.groups());
            cell.mean_designated_part = Eigen::VectorXd::Zero(layout.groups());

            int ok = 0;
            double sum = 0.0, sum_sq = 0.0, iters = 0.0;
            for (int r = 0; r < n_real; r++)
            {
                const detail::CellSample& sample = samples[r][s * n_snr + p];
                if (sample.failed)
                {
                    cell.failures++;
                    continue;
                }
                ok++;
                sum += sample.mmf;
                sum_sq += sample.mmf * sample.mmf;
                iters += sample.iterations;
                cell.mean_group_rate += sample.group_rates;
                cell.mean_common_share += sample.common_share;
                cell.mean_designated_part += sample.designated_part;
            }
            if (ok > 0)
            {
                cell.mean_mmf = sum / ok;
                cell.mean_iterations = iters / ok;
                cell.mean_group_rate /= ok;
                cell.mean_common_share /= ok;
                cell.mean_designated_part /= ok;
                if (ok > 1)
                {
                    const double var = std::max(0.0, (sum_sq - sum * sum / ok) / (ok - 1));
                    cell.stderr_mmf = std::sqrt(var / ok);
                }
            }
            result.cells.push_back(std::move(cell));
        }

    if (!config.output_path.empty())
        result.write_csv(config.output_path);
    return result;
}

/// Per-group split of the group rate into common share and designated part.
/// Same sweep machinery; rate-splitting must be among the strategies.
inline SweepResult run_contributions(const ExperimentConfig& config)
{
    validate(config);
    bool has_rs = false;
    for (Strategy s : config.strategies)
        has_rs = has_rs || s == Strategy::Rs;
    if (!has_rs)
        throw std::invalid_argument("run_contributions: strategy list must include rs");
    return run_sweep(config);
}

struct DofCheckRow {
    GroupLayout layout{1, {1}};
    Strategy strategy = Strategy::Designated;
    double theory = 0.0;
    std::string theory_exact;
    double measured = 0.0;
    bool flagged = false;  // |theory - measured| > 0.1
};

/// Compares the closed-form DoF of each strategy against the measured MMF
/// slope of its constructive scheme at 30/40/50 dB.
inline std::vector<DofCheckRow> run_dof_check(const std::vector<GroupLayout>& layouts,
                                              const std::vector<Strategy>& strategies,
                                              int realizations = 20, std::uint64_t base_seed = 0,
                                              const std::vector<double>& power_db = {30.0, 40.0,
                                                                                     50.0})
{
    using schemes::SchemeKind;
    using schemes::SchemeSpec;

    std::vector<DofCheckRow> rows;
    for (const auto& layout : layouts)
        for (Strategy strategy : strategies)
        {
            DofCheckRow row;
            row.layout = layout;
            row.strategy = strategy;

            dof::Rational theory{0, 1};
            schemes::SchemeEvaluator evaluate;
            switch (strategy)
            {
            case Strategy::ZfFull:
                theory = {1, 1};
                evaluate = schemes::make_scheme_evaluator({SchemeKind::ZfFull});
                break;
            case Strategy::ZfPartial:
                theory = {1, 2};
                evaluate = schemes::make_scheme_evaluator({SchemeKind::ZfPartial});
                break;
            case Strategy::DegradedSuperposition:
                theory = dof::dof_degraded(layout);
                evaluate = schemes::make_scheme_evaluator({SchemeKind::DegradedSuperposition});
                break;
            case Strategy::DegradedSingleStream:
                theory = dof::dof_degraded(layout);
                evaluate = schemes::make_scheme_evaluator({SchemeKind::SingleStream});
                break;
            case Strategy::Rs:
            case Strategy::RsPartitioned:
                theory = dof::dof_rs(layout);
                evaluate = schemes::make_scheme_evaluator({SchemeKind::RsPartitioned});
                break;
            case Strategy::Designated:
                theory = dof::dof_designated(layout);
                switch (dof::classify_regime(layout))
                {
                case dof::Regime::InterferenceFree:
                    evaluate = schemes::make_scheme_evaluator({SchemeKind::ZfFull});
                    break;
                case dof::Regime::PartiallyOverloaded:
                    evaluate = schemes::make_scheme_evaluator({SchemeKind::ZfPartial});
                    break;
                case dof::Regime::FullyOverloaded:
                    // saturating reference: fixed matched-filter beams, equal power
                    evaluate = [](const GroupLayout& l, const ChannelSet& c, double p,
                                  std::uint64_t) {
                        RsPrecoder pre = RsPrecoder::zero(l);
                        for (int m = 0; m < l.groups(); m++)
                        {
                            Eigen::VectorXcd f = Eigen::VectorXcd::Zero(l.antennas());
                            for (int k = l.group_begin(m); k < l.group_end(m); k++)
                                f += c.H.col(k);
                            const double norm = f.norm();
                            if (norm > 0.0)
                                pre.designated[m] = std::sqrt(p / l.groups()) * f / norm;
                        }
                        return rates_designated(l, c, pre);
                    };
                    break;
                }
                break;
            }

            row.theory = boost::rational_cast<double>(theory);
            row.theory_exact = dof::to_string(theory);
            try
            {
                row.measured =
                    schemes::empirical_dof_slope(evaluate, layout, base_seed, realizations, power_db);
                row.flagged = std::abs(row.theory - row.measured) > 0.1;
            }
            catch (const std::exception&)
            {
                row.measured = std::numeric_limits<double>::quiet_NaN();
                row.flagged = true;
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

inline std::string dof_check_csv(const std::vector<DofCheckRow>& rows)
{
    std::ostringstream out;
    out << "groups,antennas,strategy,theory,theory_exact,measured_slope,flag\n";
    for (const auto& r : rows)
    {
        out << '"';
        for (int m = 0; m < r.layout.groups(); m++)
            out << (m ? "," : "") << r.layout.group_size(m);
        out << "\"," << r.layout.antennas() << ',' << to_string(r.strategy) << ','
            << detail::format_number(r.theory) << ',' << r.theory_exact << ','
            << detail::format_number(r.measured) << ',' << (r.flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace mmfbeam::harness

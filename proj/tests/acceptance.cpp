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
// Acceptance suite: every release gate in one binary, one pass/fail line per
// criterion. Each check pins its tolerances in code; a nonzero exit code
// means at least one criterion failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmfbeam/channel.hpp"
#include "mmfbeam/dof.hpp"
#include "mmfbeam/group_layout.hpp"
#include "mmfbeam/null_space.hpp"
#include "mmfbeam/rates.hpp"
#include "mmfbeam/schemes.hpp"
#include "mmfbeam/wmmse.hpp"

using namespace mmfbeam;
using dof::Rational;

namespace {

int failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<bool(std::string&)>& check)
{
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try
    {
        ok = check(detail);
    }
    catch (const std::exception& e)
    {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number,
                title.c_str(), seconds, detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok)
        failures++;
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ladder form of the rate-splitting DoF, derived independently from n_l
Rational ladder_dof_rs(const GroupLayout& layout)
{
    const int m = layout.groups();
    if (layout.antennas() >= dof::n_l(layout, m))
        return {1, 1};
    for (int l = m - 1; l >= 1; l--)
        if (dof::n_l(layout, l) <= layout.antennas() &&
            layout.antennas() < dof::n_l(layout, l + 1))
            return {1, 1 + m - l};
    return {1, m};
}

void enumerate_layouts(int max_users, const std::function<void(const std::vector<int>&)>& visit)
{
    std::vector<int> sizes;
    std::function<void(int, int)> recurse = [&](int remaining, int min_size) {
        if (!sizes.empty())
            visit(sizes);
        for (int g = min_size; g <= remaining; g++)
        {
            sizes.push_back(g);
            recurse(remaining - g, g);
            sizes.pop_back();
        }
    };
    recurse(max_users, 1);
}

struct PairedSolves {
    double designated;
    double degraded;
    double rs;
};

// one paired-seed realization: designated and degraded solves feed the
// rate-splitting solve as warm starts, all on the same channel
PairedSolves solve_paired(const GroupLayout& layout, std::uint64_t seed, double power)
{
    const ChannelSet channel = sample_channel(layout, seed);
    wmmse::AoOptions opts;
    opts.restarts = 1;
    opts.seed = seed;
    const auto des = wmmse::ao_solve(layout, channel, power, wmmse::SolveMode::Designated, opts);
    const auto deg =
        wmmse::ao_solve(layout, channel, power, wmmse::SolveMode::DegradedSingleStream, opts);
    wmmse::AoOptions rs_opts = opts;
    rs_opts.warm_starts = {des.precoder, deg.precoder};
    const auto rs = wmmse::ao_solve(layout, channel, power, wmmse::SolveMode::Rs, rs_opts);
    return {des.report.mmf, deg.report.mmf, rs.report.mmf};
}

bool criterion_dof_table(std::string& detail)
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    auto expect = [&](const GroupLayout& layout, Rational designated, Rational degraded,
                      Rational rs) {
        ok = ok && dof::dof_designated(layout) == designated &&
             dof::dof_degraded(layout) == degraded && dof::dof_rs(layout) == rs;
    };
    expect(GroupLayout(2, {1, 2, 3}), {0, 1}, {1, 3}, {1, 3});
    expect(GroupLayout(4, {1, 2, 3}), {1, 2}, {1, 3}, {1, 2});
    expect(GroupLayout(6, {1, 2, 3}), {1, 1}, {1, 3}, {1, 1});
    expect(GroupLayout(4, {2, 2, 2}), {0, 1}, {1, 3}, {1, 2});
    expect(GroupLayout(4, {2, 2, 2, 2}), {0, 1}, {1, 4}, {1, 3});
    const double seconds = elapsed_since(t0);
    if (seconds >= 1.0)
    {
        detail = "runtime " + std::to_string(seconds) + "s exceeds 1s";
        return false;
    }
    if (!ok)
        detail = "closed-form value mismatch";
    return ok;
}

bool criterion_dof_exhaustive(std::string& detail)
{
    const auto t0 = std::chrono::steady_clock::now();
    int checked = 0;
    bool ok = true;
    enumerate_layouts(8, [&](const std::vector<int>& sizes) {
        int users = 0;
        for (int g : sizes)
            users += g;
        for (int n = 1; n <= users + 2 && ok; n++)
        {
            const GroupLayout layout(n, sizes);
            const Rational designated = dof::dof_designated(layout);
            const Rational rs = dof::dof_rs(layout);
            ok = ok && rs == ladder_dof_rs(layout);
            ok = ok && rs >= designated && rs >= dof::dof_degraded(layout);
            switch (dof::classify_regime(layout))
            {
            case dof::Regime::InterferenceFree: ok = ok && designated == Rational(1, 1); break;
            case dof::Regime::PartiallyOverloaded: ok = ok && designated == Rational(1, 2); break;
            case dof::Regime::FullyOverloaded: ok = ok && designated == Rational(0, 1); break;
            }
            if (n >= dof::n_l(layout, layout.groups()))
                ok = ok && rs == designated;
            checked++;
        }
    });
    const double seconds = elapsed_since(t0);
    std::ostringstream msg;
    msg << checked << " layout/antenna pairs";
    if (seconds >= 5.0)
    {
        detail = "runtime exceeds 5s";
        return false;
    }
    if (!ok)
        detail = "property violated";
    else
        detail = msg.str();
    return ok;
}

bool criterion_slopes(std::string& detail)
{
    const auto t0 = std::chrono::steady_clock::now();
    using schemes::SchemeKind;
    const std::vector<double> powers_db = {30.0, 40.0, 50.0};
    const int seeds = 20;

    struct Row {
        SchemeKind kind;
        int antennas;
        double theory;
    };
    const std::vector<Row> grid = {
        {SchemeKind::ZfFull, 6, 1.0},
        {SchemeKind::ZfPartial, 4, 0.5},
        {SchemeKind::DegradedSuperposition, 2, 1.0 / 3.0},
        {SchemeKind::RsPartitioned, 2, 1.0 / 3.0},
        {SchemeKind::RsPartitioned, 4, 0.5},
    };

    std::ostringstream msg;
    bool ok = true;
    for (const auto& row : grid)
    {
        const GroupLayout layout(row.antennas, {1, 2, 3});
        const auto evaluate = schemes::make_scheme_evaluator({row.kind});
        const double measured =
            schemes::empirical_dof_slope(evaluate, layout, 1, seeds, powers_db);
        const bool row_ok = std::abs(measured - row.theory) <= 0.1;
        ok = ok && row_ok;
        if (!row_ok)
            msg << " [N=" << row.antennas << " theory=" << row.theory
                << " measured=" << measured << "]";
    }
    if (elapsed_since(t0) >= 60.0)
    {
        detail = "runtime exceeds 60s";
        return false;
    }
    detail = msg.str();
    return ok;
}

bool criterion_rate_wmmse_identity(std::string& detail)
{
    const auto t0 = std::chrono::steady_clock::now();
    const GroupLayout layout(4, {1, 2, 3});
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 100; trial++)
    {
        const ChannelSet channel = sample_channel(layout, 500 + trial);
        ComplexGaussian gen(9000 + trial);
        RsPrecoder p = RsPrecoder::zero(layout);
        p.common = gen.vector(layout.antennas());
        for (auto& beam : p.designated)
            beam = gen.vector(layout.antennas());
        const double power = 1.0 + (trial % 10) * 20.0;
        const double scale = std::sqrt(power / p.total_power());
        p.common *= scale;
        for (auto& beam : p.designated)
            beam *= scale;

        const auto filters = wmmse::mmse_update(layout, channel, p);
        const RateReport rep = rates_rs(layout, channel, p);
        for (int k = 0; k < layout.users(); k++)
        {
            const auto w = wmmse::wmse(layout, channel, p, filters, k);
            worst = std::max(worst, std::abs(w.common - (1.0 - rep.common_user_rates[k])));
            worst = std::max(worst, std::abs(w.designated - (1.0 - rep.user_rates[k])));
        }
    }
    std::ostringstream msg;
    msg << "max |xi - (1-R)| = " << worst;
    detail = msg.str();
    if (elapsed_since(t0) >= 5.0)
    {
        detail += "; runtime exceeds 5s";
        return false;
    }
    return worst <= 1e-9;
}

bool criterion_ao_correctness(std::string& detail)
{
    int runs = 0;
    bool ok = true;
    std::ostringstream msg;

    for (int antennas : {2, 4, 6})
        for (auto mode : {wmmse::SolveMode::Designated, wmmse::SolveMode::Rs,
                          wmmse::SolveMode::DegradedSingleStream})
            for (double snr_db : {10.0, 25.0})
                for (std::uint64_t seed : {1, 2, 3})
                {
                    const GroupLayout layout(antennas, {1, 2, 3});
                    const ChannelSet channel = sample_channel(layout, seed);
                    wmmse::AoOptions opts;
                    opts.restarts = 1;
                    opts.seed = seed;
                    const auto res = wmmse::ao_solve(layout, channel,
                                                     std::pow(10.0, snr_db / 10.0), mode, opts);
                    runs++;
                    for (std::size_t i = 1; i < res.trace.size() && ok; i++)
                        if (res.trace[i] < res.trace[i - 1] - 1e-8)
                        {
                            ok = false;
                            msg << "trace dip at run " << runs;
                        }
                    const RateReport recheck = mode == wmmse::SolveMode::Designated
                                                   ? rates_designated(layout, channel, res.precoder)
                                                   : rates_rs(layout, channel, res.precoder);
                    if (std::abs(recheck.mmf - res.report.mmf) > 1e-6)
                    {
                        ok = false;
                        msg << " model recheck mismatch";
                    }
                }

    // closed-form AWGN recovery
    const GroupLayout single(3, {1});
    const ChannelSet channel = sample_channel(single, 77);
    const double power = 250.0;
    const auto res = wmmse::ao_solve(single, channel, power, wmmse::SolveMode::Designated, {});
    const double closed_form = std::log2(1.0 + power * channel.H.col(0).squaredNorm());
    if (std::abs(res.report.mmf - closed_form) > 1e-4)
    {
        ok = false;
        msg << " AWGN gap " << std::abs(res.report.mmf - closed_form);
    }
    std::ostringstream head;
    head << runs << " grid runs + AWGN";
    detail = head.str() + msg.str();
    return ok;
}

bool criterion_dominance(std::string& detail)
{
    int violations = 0;
    double worst = 0.0;
    for (int antennas : {2, 4})
        for (double snr_db : {10.0, 20.0, 30.0})
            for (std::uint64_t r = 0; r < 20; r++)
            {
                const GroupLayout layout(antennas, {1, 2, 3});
                const auto run = solve_paired(layout, 3000 + r, std::pow(10.0, snr_db / 10.0));
                const double gap =
                    std::min(run.rs - run.designated, run.rs - run.degraded);
                worst = std::min(worst, gap);
                if (run.rs < run.designated - 1e-6 || run.rs < run.degraded - 1e-6)
                    violations++;
            }
    std::ostringstream msg;
    msg << "120 paired realizations, worst margin " << worst;
    detail = msg.str();
    return violations == 0;
}

bool criterion_saturation(std::string& detail)
{
    const GroupLayout layout(2, {1, 2, 3});
    double designated_30 = 0.0, designated_40 = 0.0, rs_30 = 0.0, rs_40 = 0.0;
    const int n_real = 20;
    for (std::uint64_t r = 0; r < n_real; r++)
    {
        const auto at30 = solve_paired(layout, 4000 + r, std::pow(10.0, 3.0));
        const auto at40 = solve_paired(layout, 4000 + r, std::pow(10.0, 4.0));
        designated_30 += at30.designated / n_real;
        designated_40 += at40.designated / n_real;
        rs_30 += at30.rs / n_real;
        rs_40 += at40.rs / n_real;
    }
    const double designated_gain = designated_40 - designated_30;
    const double rs_gain = rs_40 - rs_30;
    std::ostringstream msg;
    msg << "designated 30->40dB gain " << designated_gain << " (<0.25), rs gain " << rs_gain
        << " (>1.0)";
    detail = msg.str();
    return designated_gain < 0.25 && rs_gain > 1.0;
}

bool criterion_contributions(std::string& detail)
{
    const GroupLayout layout(4, {1, 2, 3});
    const double power = 100.0;  // 20 dB
    int group3_active = 0;
    bool exact = true;
    for (std::uint64_t r = 0; r < 20; r++)
    {
        const ChannelSet channel = sample_channel(layout, 5000 + r);
        wmmse::AoOptions opts;
        opts.restarts = 1;
        opts.seed = r;
        const auto des =
            wmmse::ao_solve(layout, channel, power, wmmse::SolveMode::Designated, opts);
        wmmse::AoOptions rs_opts = opts;
        rs_opts.warm_starts = {des.precoder};
        const auto rs = wmmse::ao_solve(layout, channel, power, wmmse::SolveMode::Rs, rs_opts);

        for (int m = 0; m < layout.groups(); m++)
        {
            const double designated_part =
                rs.report.user_rates.segment(layout.group_begin(m), layout.group_size(m))
                    .minCoeff();
            // the group rate is the exact sum of its two parts
            if (rs.precoder.common_shares[m] + designated_part != rs.report.group_rates[m])
                exact = false;
        }
        const double group3 =
            rs.report.user_rates.segment(layout.group_begin(2), layout.group_size(2)).minCoeff();
        if (group3 > 1e-9)
            group3_active++;
    }
    std::ostringstream msg;
    msg << "group-3 designated part positive in " << group3_active << "/20 (need >= 15)"
        << (exact ? "" : "; accounting identity violated");
    detail = msg.str();
    return exact && group3_active >= 15;
}

bool criterion_null_space(std::string& detail)
{
    std::mt19937_64 rng(2026);
    double worst_residual = 0.0;
    for (int trial = 0; trial < 1000; trial++)
    {
        const int n = 1 + static_cast<int>(rng() % 10);
        const int c = 1 + static_cast<int>(rng() % 10);
        ComplexGaussian gen(rng());
        Eigen::MatrixXcd a(n, c);
        for (int j = 0; j < c; j++)
            a.col(j) = gen.vector(n);
        const Eigen::MatrixXcd basis = null_space_basis(a, 1e-10);
        if (basis.cols() != std::max(n - c, 0))
        {
            detail = "dimension mismatch";
            return false;
        }
        if (basis.cols() > 0)
        {
            worst_residual = std::max(worst_residual, (a.adjoint() * basis).norm() / a.norm());
            const double ortho =
                (basis.adjoint() * basis -
                 Eigen::MatrixXcd::Identity(basis.cols(), basis.cols()))
                    .norm();
            worst_residual = std::max(worst_residual, ortho);
        }
    }
    std::ostringstream msg;
    msg << "1000 draws, worst residual " << worst_residual;
    detail = msg.str();
    return worst_residual <= 1e-10;
}

} // namespace

int main()
{
    run_criterion(1, "closed-form DoF table for the reference layouts", criterion_dof_table);
    run_criterion(2, "exhaustive DoF properties for all layouts with K <= 8",
                  criterion_dof_exhaustive);
    run_criterion(3, "constructive schemes achieve their DoF slopes (30-50 dB, 20 seeds)",
                  criterion_slopes);
    run_criterion(4, "rate-WMMSE identity on 100 random instances", criterion_rate_wmmse_identity);
    run_criterion(5, "alternating optimization: monotone trace, verified rates, AWGN recovery",
                  criterion_ao_correctness);
    run_criterion(6, "warm-started rate-splitting dominates both baselines per realization",
                  criterion_dominance);
    run_criterion(7, "designated rates saturate at N=2 while rate-splitting keeps growing",
                  criterion_saturation);
    run_criterion(8, "per-group rate splits add up exactly and group 3 keeps a designated part",
                  criterion_contributions);
    run_criterion(9, "null-space bases: dimension count and orthogonality residuals",
                  criterion_null_space);

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                failures);
    return failures == 0 ? 0 : 1;
}

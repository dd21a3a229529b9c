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
// Achievable-rate evaluation for the three transmission strategies:
// designated (one private beam per group, interference treated as noise),
// degraded (streams decoded successively by shared SIC order), and
// rate-splitting (a common stream decoded by everyone and cancelled before
// the designated streams). Gaussian codebooks, log base 2 throughout.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "channel.hpp"
#include "group_layout.hpp"
#include "precoder.hpp"

namespace mmfbeam {

/// Per-user and per-group rates for one strategy/precoder pair.
struct RateReport {
    Eigen::VectorXd user_rates;         // R_k (designated stream, after any SIC)
    Eigen::VectorXd common_user_rates;  // R_k^c (zero when no common stream)
    Eigen::VectorXd group_rates;        // r_m
    double mmf = 0.0;                   // min_m r_m
    double common_slack = 0.0;          // min_k R_k^c - sum_m C_m

    /// The common-share allocation is decodable by every user.
    bool common_feasible() const { return common_slack >= 0.0; }
};

namespace detail {

inline double rate_bps(double sinr) { return std::log2(1.0 + sinr); }

inline Eigen::MatrixXd beam_gains(const ChannelSet& channel,
                                  const std::vector<Eigen::VectorXcd>& beams)
{
    const int n_users = channel.users();
    Eigen::MatrixXd g(n_users, beams.size());
    for (std::size_t m = 0; m < beams.size(); m++)
        for (int k = 0; k < n_users; k++)
            g(k, m) = std::norm(channel.H.col(k).dot(beams[m]));
    return g;
}

} // namespace detail

/// Rates under classical designated beamforming. The precoder must carry no
/// common stream.
inline RateReport rates_designated(const GroupLayout& layout, const ChannelSet& channel,
                                   const RsPrecoder& precoder)
{
    check_channel(layout, channel);
    check_precoder(layout, precoder);
    if (!precoder.is_designated_only())
        throw std::invalid_argument("rates_designated: precoder carries a common stream");

    const int n_users = layout.users();
    const int n_groups = layout.groups();
    const Eigen::MatrixXd gains = detail::beam_gains(channel, precoder.designated);

    RateReport rep;
    rep.user_rates.resize(n_users);
    rep.common_user_rates = Eigen::VectorXd::Zero(n_users);
    for (int k = 0; k < n_users; k++)
    {
        const int own = layout.group_of(k);
        double interference = 0.0;
        for (int m = 0; m < n_groups; m++)
            if (m != own)
                interference += gains(k, m);
        rep.user_rates[k] = detail::rate_bps(gains(k, own) / (interference + channel.noise_variance));
    }
    rep.group_rates.resize(n_groups);
    for (int m = 0; m < n_groups; m++)
        rep.group_rates[m] =
            rep.user_rates.segment(layout.group_begin(m), layout.group_size(m)).minCoeff();
    rep.mmf = rep.group_rates.minCoeff();
    return rep;
}

/// Rates under degraded beamforming with successive decoding. Stream
/// order[0] is decoded (and cancelled) first by everyone who reaches it; the
/// stream at position j sees interference only from positions j+1..M-1. The
/// group rate of stream order[j] is limited by the weakest user among groups
/// order[j..M-1], the users that must decode it.
inline RateReport rates_degraded_sic(const GroupLayout& layout, const ChannelSet& channel,
                                     const std::vector<Eigen::VectorXcd>& beams,
                                     const std::vector<int>& order)
{
    check_channel(layout, channel);
    const int n_groups = layout.groups();
    const int n_users = layout.users();
    if (static_cast<int>(beams.size()) != n_groups)
        throw std::invalid_argument("rates_degraded_sic: need one beam per group");
    for (const auto& b : beams)
        if (b.size() != layout.antennas())
            throw std::invalid_argument("rates_degraded_sic: beam dimension mismatch");
    if (static_cast<int>(order.size()) != n_groups)
        throw std::invalid_argument("rates_degraded_sic: order must permute the groups");
    std::vector<bool> seen(n_groups, false);
    for (int m : order)
    {
        if (m < 0 || m >= n_groups || seen[m])
            throw std::invalid_argument("rates_degraded_sic: invalid permutation");
        seen[m] = true;
    }

    const Eigen::MatrixXd gains = detail::beam_gains(channel, beams);

    // decode position of each group
    std::vector<int> position(n_groups);
    for (int j = 0; j < n_groups; j++)
        position[order[j]] = j;

    // stream_rate(k, j): rate at which user k can decode the stream at decode
    // position j, interference from positions j+1.. only. Accumulated from
    // the last stream backwards so the final stream sees exactly sigma_n^2.
    Eigen::MatrixXd stream_rate(n_users, n_groups);
    for (int k = 0; k < n_users; k++)
    {
        double residual = channel.noise_variance;
        for (int j = n_groups - 1; j >= 0; j--)
        {
            stream_rate(k, j) = detail::rate_bps(gains(k, order[j]) / residual);
            residual += gains(k, order[j]);
        }
    }

    RateReport rep;
    rep.user_rates.resize(n_users);
    rep.common_user_rates = Eigen::VectorXd::Zero(n_users);
    for (int k = 0; k < n_users; k++)
        rep.user_rates[k] = stream_rate(k, position[layout.group_of(k)]);

    rep.group_rates.resize(n_groups);
    for (int j = 0; j < n_groups; j++)
    {
        double r = std::numeric_limits<double>::infinity();
        for (int jj = j; jj < n_groups; jj++)
        {
            const int g = order[jj];
            for (int k = layout.group_begin(g); k < layout.group_end(g); k++)
                r = std::min(r, stream_rate(k, j));
        }
        rep.group_rates[order[j]] = r;
    }
    rep.mmf = rep.group_rates.minCoeff();
    return rep;
}

/// MMF rate of the degraded single-stream strategy: the single-group
/// multicast rate of p_common split equally over n_groups messages.
inline double rate_single_stream(const ChannelSet& channel, const Eigen::VectorXcd& p_common,
                                 int n_groups)
{
    if (p_common.size() != channel.antennas())
        throw std::invalid_argument("rate_single_stream: beam dimension mismatch");
    if (n_groups < 1)
        throw std::invalid_argument("rate_single_stream: need at least one group");
    double min_rate = std::numeric_limits<double>::infinity();
    for (int k = 0; k < channel.users(); k++)
    {
        const double sinr = std::norm(channel.H.col(k).dot(p_common)) / channel.noise_variance;
        min_rate = std::min(min_rate, detail::rate_bps(sinr));
    }
    return min_rate / n_groups;
}

/// Rates under rate-splitting: the common stream is decoded first with all
/// designated beams as interference, then removed by SIC before designated
/// decoding. Infeasible share allocations (sum C_m above the common rate) are
/// reported through common_slack < 0, never clamped.
inline RateReport rates_rs(const GroupLayout& layout, const ChannelSet& channel,
                           const RsPrecoder& precoder)
{
    check_channel(layout, channel);
    check_precoder(layout, precoder);

    const int n_users = layout.users();
    const int n_groups = layout.groups();
    const Eigen::MatrixXd gains = detail::beam_gains(channel, precoder.designated);

    RateReport rep;
    rep.user_rates.resize(n_users);
    rep.common_user_rates.resize(n_users);
    for (int k = 0; k < n_users; k++)
    {
        const int own = layout.group_of(k);
        double interference = 0.0;
        for (int m = 0; m < n_groups; m++)
            if (m != own)
                interference += gains(k, m);
        const double common_gain = std::norm(channel.H.col(k).dot(precoder.common));
        rep.common_user_rates[k] = detail::rate_bps(
            common_gain / (gains(k, own) + interference + channel.noise_variance));
        rep.user_rates[k] = detail::rate_bps(gains(k, own) / (interference + channel.noise_variance));
    }

    rep.group_rates.resize(n_groups);
    for (int m = 0; m < n_groups; m++)
        rep.group_rates[m] =
            precoder.common_shares[m] +
            rep.user_rates.segment(layout.group_begin(m), layout.group_size(m)).minCoeff();
    rep.mmf = rep.group_rates.minCoeff();
    rep.common_slack = rep.common_user_rates.minCoeff() - precoder.common_shares.sum();
    return rep;
}

} // namespace mmfbeam

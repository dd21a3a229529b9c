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
// Constructive schemes that attain the closed-form DoF values: full and
// partial zero-forcing, degraded superposition with power-scaled streams,
// and partitioned rate-splitting. Directions are fixed per channel while the
// power allocation scales with P, which is what the slope estimator needs.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "channel.hpp"
#include "dof.hpp"
#include "group_layout.hpp"
#include "null_space.hpp"
#include "precoder.hpp"
#include "rates.hpp"

namespace mmfbeam::schemes {

/// Raised when a scheme's antenna-count precondition fails.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SchemeKind { ZfFull, ZfPartial, DegradedSuperposition, SingleStream, RsPartitioned };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::ZfFull;
    double alpha = -1.0;         // RsPartitioned power-partition exponent; <0 = default
    std::vector<int> order;      // DegradedSuperposition decode order; empty = identity
};

namespace detail {

constexpr double kNullSpaceTol = 1e-10;

/// Channel columns of every user whose group satisfies keep_group.
inline Eigen::MatrixXcd stack_group_channels(const GroupLayout& layout, const ChannelSet& channel,
                                             const std::function<bool(int)>& keep_group)
{
    std::vector<int> cols;
    for (int k = 0; k < layout.users(); k++)
        if (keep_group(layout.group_of(k)))
            cols.push_back(k);
    Eigen::MatrixXcd a(layout.antennas(), cols.size());
    for (std::size_t j = 0; j < cols.size(); j++)
        a.col(j) = channel.H.col(cols[j]);
    return a;
}

/// Unit direction inside span(basis) closest to the group's matched filter
/// (sum of member channels). Any null-space member achieves the DoF; this
/// choice improves finite-SNR rates.
inline Eigen::VectorXcd zf_direction(const GroupLayout& layout, const ChannelSet& channel, int m,
                                     const Eigen::MatrixXcd& basis)
{
    Eigen::VectorXcd filter = Eigen::VectorXcd::Zero(layout.antennas());
    for (int k = layout.group_begin(m); k < layout.group_end(m); k++)
        filter += channel.H.col(k);
    Eigen::VectorXcd dir = basis * (basis.adjoint() * filter);
    const double norm = dir.norm();
    if (norm <= 1e-12 * filter.norm() || norm == 0.0)
        dir = basis.col(0); // matched filter orthogonal to the null space
    else
        dir /= norm;
    return dir;
}

/// Unit direction drawn from span(H): H times a seeded standard-Gaussian
/// vector, normalized.
inline Eigen::VectorXcd random_span_direction(const ChannelSet& channel, std::uint64_t seed)
{
    ComplexGaussian gen(seed);
    Eigen::VectorXcd dir = channel.H * gen.vector(channel.users());
    const double norm = dir.norm();
    if (norm == 0.0)
        throw std::invalid_argument("random_span_direction: zero channel matrix");
    return dir / norm;
}

} // namespace detail

/// Full zero-forcing: every beam lies in the null space of all other groups'
/// channels, equal power split. Needs N >= N_M = 1 + K - G_1.
inline RsPrecoder build_zf_full(const GroupLayout& layout, const ChannelSet& channel, double power)
{
    check_channel(layout, channel);
    const int n_groups = layout.groups();
    if (layout.antennas() < dof::n_l(layout, n_groups))
        throw InfeasibleError("build_zf_full: N < N_M, cannot null all inter-group interference");

    RsPrecoder p = RsPrecoder::zero(layout);
    for (int m = 0; m < n_groups; m++)
    {
        Eigen::MatrixXcd basis;
        if (n_groups == 1)
            basis = Eigen::MatrixXcd::Identity(layout.antennas(), layout.antennas());
        else
        {
            const Eigen::MatrixXcd others = detail::stack_group_channels(
                layout, channel, [m](int g) { return g != m; });
            basis = null_space_basis(others, detail::kNullSpaceTol);
        }
        p.designated[m] = std::sqrt(power / n_groups) * detail::zf_direction(layout, channel, m, basis);
    }
    return p;
}

/// Partial zero-forcing for the partially-overloaded regime: each of the
/// first M-1 beams nulls every group except its own and the largest one, the
/// largest group's beam nulls everyone else. Groups 1..M-1 end up
/// interference-free; group M absorbs the sqrt(P)-scaled interference while
/// its own beam takes the O(P) power. Needs N >= N_{M-1} + G_1 and P >= 1.
inline RsPrecoder build_zf_partial(const GroupLayout& layout, const ChannelSet& channel,
                                   double power)
{
    check_channel(layout, channel);
    const int n_groups = layout.groups();
    if (n_groups < 2)
        throw std::invalid_argument("build_zf_partial: needs at least two groups");
    if (layout.antennas() < dof::n_l(layout, n_groups - 1) + layout.group_size(0))
        throw InfeasibleError("build_zf_partial: N < N_{M-1} + G_1");
    if (power < 1.0)
        throw std::invalid_argument("build_zf_partial: power budget must be >= 1");

    const int last = n_groups - 1;
    RsPrecoder p = RsPrecoder::zero(layout);
    for (int m = 0; m < n_groups; m++)
    {
        const Eigen::MatrixXcd others = detail::stack_group_channels(
            layout, channel, [m, last](int g) { return g != m && g != last; });
        Eigen::MatrixXcd basis;
        if (others.cols() == 0)
            basis = Eigen::MatrixXcd::Identity(layout.antennas(), layout.antennas());
        else
            basis = null_space_basis(others, detail::kNullSpaceTol);
        const double q = (m == last) ? power - std::sqrt(power) : std::sqrt(power) / (n_groups - 1);
        p.designated[m] = std::sqrt(q) * detail::zf_direction(layout, channel, m, basis);
    }
    return p;
}

/// Degraded superposition design: beams plus the decode order they were
/// built for.
struct DegradedDesign {
    std::vector<Eigen::VectorXcd> beams;
    std::vector<int> order;
};

/// Superposed degraded streams on random span(H) directions. The stream at
/// decode position j gets power proportional to P^{(M-j)/M} (1-based
/// exponent (1+M-j)/M), normalized so the budget is met with equality.
inline DegradedDesign build_degraded_superposition(const GroupLayout& layout,
                                                   const ChannelSet& channel, double power,
                                                   std::uint64_t seed,
                                                   std::vector<int> order = {})
{
    check_channel(layout, channel);
    const int n_groups = layout.groups();
    if (order.empty())
    {
        order.resize(n_groups);
        std::iota(order.begin(), order.end(), 0);
    }
    if (static_cast<int>(order.size()) != n_groups)
        throw std::invalid_argument("build_degraded_superposition: bad order length");

    std::vector<double> exponent(n_groups);
    double scale_sum = 0.0;
    for (int j = 0; j < n_groups; j++)
    {
        exponent[j] = static_cast<double>(n_groups - j) / n_groups;
        scale_sum += std::pow(power, exponent[j]);
    }
    const double c = power / scale_sum;

    DegradedDesign design;
    design.order = order;
    design.beams.assign(n_groups, Eigen::VectorXcd());
    for (int j = 0; j < n_groups; j++)
    {
        const Eigen::VectorXcd dir =
            detail::random_span_direction(channel, seed * 0x9e3779b97f4a7c15ULL + j + 1);
        design.beams[order[j]] = std::sqrt(c * std::pow(power, exponent[j])) * dir;
    }
    return design;
}

/// Full-power single common stream on a random span(H) direction.
inline Eigen::VectorXcd build_single_stream(const GroupLayout& layout, const ChannelSet& channel,
                                            double power, std::uint64_t seed)
{
    check_channel(layout, channel);
    return std::sqrt(power) * detail::random_span_direction(channel, seed * 0x9e3779b97f4a7c15ULL + 1);
}

/// Partitioned rate-splitting: the M_D* smallest groups get zero-forced
/// designated beams at P^alpha power, the rest share a random-direction
/// common stream that takes the power remainder; its rate is split equally
/// among them. alpha < 0 selects the DoF-optimal 1/(1 + M - M_D*). With no
/// degraded groups this degenerates to full zero-forcing.
inline RsPrecoder build_rs_partitioned(const GroupLayout& layout, const ChannelSet& channel,
                                       double power, double alpha, std::uint64_t seed)
{
    check_channel(layout, channel);
    const int n_groups = layout.groups();
    const int n_des = dof::m_d_star(layout);
    if (alpha < 0.0)
        alpha = 1.0 / (1 + n_groups - n_des);
    if (alpha > 1.0)
        throw std::invalid_argument("build_rs_partitioned: alpha must be in [0,1]");
    if (n_des == n_groups)
        return build_zf_full(layout, channel, power);
    if (power < 1.0)
        throw std::invalid_argument("build_rs_partitioned: power budget must be >= 1");

    RsPrecoder p = RsPrecoder::zero(layout);
    const double q_des = std::pow(power, alpha) / n_des;
    for (int m = 0; m < n_des; m++)
    {
        // null space of the other designated groups; degraded groups rely on
        // SIC of the common stream, not on spatial nulling
        const Eigen::MatrixXcd others = detail::stack_group_channels(
            layout, channel, [m, n_des](int g) { return g != m && g < n_des; });
        Eigen::MatrixXcd basis;
        if (others.cols() == 0)
            basis = Eigen::MatrixXcd::Identity(layout.antennas(), layout.antennas());
        else
            basis = null_space_basis(others, detail::kNullSpaceTol);
        p.designated[m] = std::sqrt(q_des) * detail::zf_direction(layout, channel, m, basis);
    }

    const double q_common = power - std::pow(power, alpha);
    p.common = std::sqrt(q_common) *
               detail::random_span_direction(channel, seed * 0x9e3779b97f4a7c15ULL + 1);

    // share the common rate equally over the degraded groups
    double common_rate = std::numeric_limits<double>::infinity();
    for (int k = 0; k < layout.users(); k++)
    {
        double denom = channel.noise_variance;
        for (int m = 0; m < n_groups; m++)
            denom += std::norm(channel.H.col(k).dot(p.designated[m]));
        const double sinr = std::norm(channel.H.col(k).dot(p.common)) / denom;
        common_rate = std::min(common_rate, std::log2(1.0 + sinr));
    }
    for (int m = n_des; m < n_groups; m++)
        p.common_shares[m] = common_rate / (n_groups - n_des);
    return p;
}

/// Evaluates one constructive scheme on a channel at a power budget.
using SchemeEvaluator = std::function<RateReport(const GroupLayout&, const ChannelSet&, double,
                                                 std::uint64_t)>;

inline SchemeEvaluator make_scheme_evaluator(const SchemeSpec& spec)
{
    switch (spec.kind)
    {
    case SchemeKind::ZfFull:
        return [](const GroupLayout& l, const ChannelSet& c, double p, std::uint64_t) {
            return rates_designated(l, c, build_zf_full(l, c, p));
        };
    case SchemeKind::ZfPartial:
        return [](const GroupLayout& l, const ChannelSet& c, double p, std::uint64_t) {
            return rates_designated(l, c, build_zf_partial(l, c, p));
        };
    case SchemeKind::DegradedSuperposition:
        return [order = spec.order](const GroupLayout& l, const ChannelSet& c, double p,
                                    std::uint64_t seed) {
            const DegradedDesign d = build_degraded_superposition(l, c, p, seed, order);
            return rates_degraded_sic(l, c, d.beams, d.order);
        };
    case SchemeKind::SingleStream:
        return [](const GroupLayout& l, const ChannelSet& c, double p, std::uint64_t seed) {
            RsPrecoder pre = RsPrecoder::zero(l);
            pre.common = build_single_stream(l, c, p, seed);
            pre.common_shares.setConstant(rate_single_stream(c, pre.common, l.groups()));
            return rates_rs(l, c, pre);
        };
    case SchemeKind::RsPartitioned:
        return [alpha = spec.alpha](const GroupLayout& l, const ChannelSet& c, double p,
                                    std::uint64_t seed) {
            return rates_rs(l, c, build_rs_partitioned(l, c, p, alpha, seed));
        };
    }
    throw std::logic_error("make_scheme_evaluator: unknown scheme kind");
}

/// Least-squares slope of the mean MMF rate against log2(P) over the given
/// power levels (dB), averaged over num_realizations seeded channels. This
/// is the empirical counterpart of the closed-form DoF.
inline double empirical_dof_slope(const SchemeEvaluator& evaluate, const GroupLayout& layout,
                                  std::uint64_t base_seed, int num_realizations,
                                  const std::vector<double>& power_db)
{
    if (power_db.size() < 2)
        throw std::invalid_argument("empirical_dof_slope: need at least two power levels");
    for (std::size_t i = 1; i < power_db.size(); i++)
        if (!(power_db[i] > power_db[i - 1]))
            throw std::invalid_argument("empirical_dof_slope: power levels must increase");
    if (num_realizations < 1)
        throw std::invalid_argument("empirical_dof_slope: need at least one realization");

    const int n_levels = static_cast<int>(power_db.size());
    std::vector<double> mean_rate(n_levels, 0.0);
    for (int r = 0; r < num_realizations; r++)
    {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
        const ChannelSet channel = sample_channel(layout, seed);
        for (int i = 0; i < n_levels; i++)
        {
            const double power = std::pow(10.0, power_db[i] / 10.0);
            mean_rate[i] += evaluate(layout, channel, power, seed).mmf / num_realizations;
        }
    }

    double x_mean = 0.0, y_mean = 0.0;
    std::vector<double> x(n_levels);
    for (int i = 0; i < n_levels; i++)
    {
        x[i] = std::log2(std::pow(10.0, power_db[i] / 10.0));
        x_mean += x[i] / n_levels;
        y_mean += mean_rate[i] / n_levels;
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n_levels; i++)
    {
        num += (x[i] - x_mean) * (mean_rate[i] - y_mean);
        den += (x[i] - x_mean) * (x[i] - x_mean);
    }
    return num / den;
}

} // namespace mmfbeam::schemes

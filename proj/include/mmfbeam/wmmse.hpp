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
// Rate-WMMSE solver for the max-min fair beamforming problems. Alternates
// closed-form MMSE equalizer/weight updates with a convex precoder
// subproblem: for fixed equalizers and weights every augmented WMSE is a
// convex quadratic in the stacked precoder, and 1 - wmse lower-bounds the
// achievable rate with equality at the MMSE point, so maximizing the common
// objective r_g under the WMSE constraints monotonically drives the true MMF
// rate upwards.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "channel.hpp"
#include "detail/qcqp.hpp"
#include "group_layout.hpp"
#include "precoder.hpp"
#include "rates.hpp"

namespace mmfbeam::wmmse {

/// Average received powers seen by one user (common stream still present /
/// after common-stream SIC).
struct ReceivedPowers {
    double common_total;            // T_c,k: all streams plus noise
    double designated_total;        // T_k: designated streams plus noise
    double common_interference;     // I_c,k = T_k
    double designated_interference; // I_k: other groups' streams plus noise
};

inline ReceivedPowers received_powers(const GroupLayout& layout, const ChannelSet& channel,
                                      const RsPrecoder& precoder, int user)
{
    check_channel(layout, channel);
    check_precoder(layout, precoder);
    if (user < 0 || user >= layout.users())
        throw std::out_of_range("received_powers: user index out of range");

    const auto h = channel.H.col(user);
    const int own = layout.group_of(user);
    double interference = channel.noise_variance;
    for (int m = 0; m < layout.groups(); m++)
        if (m != own)
            interference += std::norm(h.dot(precoder.designated[m]));
    const double designated_total = std::norm(h.dot(precoder.designated[own])) + interference;
    const double common_total = std::norm(h.dot(precoder.common)) + designated_total;
    return {common_total, designated_total, designated_total, interference};
}

/// MMSE equalizers and the matching optimal WMSE weights, one pair per user.
struct UserFilters {
    Eigen::VectorXcd common_equalizer;      // g_c,k
    Eigen::VectorXcd designated_equalizer;  // g_k
    Eigen::VectorXd common_weight;          // u_c,k
    Eigen::VectorXd designated_weight;      // u_k
};

inline UserFilters mmse_update(const GroupLayout& layout, const ChannelSet& channel,
                               const RsPrecoder& precoder)
{
    const int n_users = layout.users();
    UserFilters f;
    f.common_equalizer.resize(n_users);
    f.designated_equalizer.resize(n_users);
    f.common_weight.resize(n_users);
    f.designated_weight.resize(n_users);
    for (int k = 0; k < n_users; k++)
    {
        const ReceivedPowers rp = received_powers(layout, channel, precoder, k);
        const auto h = channel.H.col(k);
        f.common_equalizer[k] = std::conj(h.dot(precoder.common)) / rp.common_total;
        f.designated_equalizer[k] =
            std::conj(h.dot(precoder.designated[layout.group_of(k)])) / rp.designated_total;
        f.common_weight[k] = rp.common_total / rp.common_interference;
        f.designated_weight[k] = rp.designated_total / rp.designated_interference;
    }
    return f;
}

/// Augmented WMSEs (xi_c,k, xi_k) of one user under given filters.
struct WmsePair {
    double common;
    double designated;
};

inline WmsePair wmse(const GroupLayout& layout, const ChannelSet& channel,
                     const RsPrecoder& precoder, const UserFilters& filters, int user)
{
    if (user < 0 || user >= layout.users())
        throw std::out_of_range("wmse: user index out of range");
    const double u_c = filters.common_weight[user];
    const double u_d = filters.designated_weight[user];
    if (!(u_c > 0.0) || !(u_d > 0.0))
        throw std::invalid_argument("wmse: weights must be strictly positive");

    const ReceivedPowers rp = received_powers(layout, channel, precoder, user);
    const auto h = channel.H.col(user);
    const std::complex<double> g_c = filters.common_equalizer[user];
    const std::complex<double> g_d = filters.designated_equalizer[user];

    const double mse_c = std::norm(g_c) * rp.common_total -
                         2.0 * std::real(g_c * h.dot(precoder.common)) + 1.0;
    const double mse_d = std::norm(g_d) * rp.designated_total -
                         2.0 * std::real(g_d * h.dot(precoder.designated[layout.group_of(user)])) +
                         1.0;
    return {u_c * mse_c - std::log2(u_c), u_d * mse_d - std::log2(u_d)};
}

enum class SolveMode { Rs, Designated, DegradedSingleStream };

inline std::string to_string(SolveMode m)
{
    switch (m)
    {
    case SolveMode::Rs: return "rs";
    case SolveMode::Designated: return "designated";
    case SolveMode::DegradedSingleStream: return "degraded_ss";
    }
    return "?";
}

/// Auxiliary variables of the WMSE reformulation at a subproblem solution.
struct AuxRates {
    double objective = 0.0;  // r_g
    Eigen::VectorXd group;   // r_m
    Eigen::VectorXd shares;  // C_m
};

struct SubproblemOptions {
    int max_iters = 200;
    double accept_kkt = 1e-7;  // scaled residual above which the solve is an error
    detail::IpmOptions ipm;    // internal targets (tighter than accept_kkt)
};

struct SubproblemResult {
    RsPrecoder precoder;
    AuxRates aux;
    double gap = 0.0;              // certified suboptimality of r_g
    double dual_residual = 0.0;    // scaled stationarity residual
    double power_multiplier = 0.0; // dual of the power constraint
    int iterations = 0;
};

class SubproblemError : public std::runtime_error {
  public:
    SubproblemError(const std::string& what, SubproblemResult best)
        : std::runtime_error(what), best_iterate(std::move(best))
    {
    }
    SubproblemResult best_iterate;
};

namespace internal {

// [Re v; Im v]
inline Eigen::VectorXd realify(const Eigen::VectorXcd& v)
{
    Eigen::VectorXd r(2 * v.size());
    r.head(v.size()) = v.real();
    r.tail(v.size()) = v.imag();
    return r;
}

inline Eigen::VectorXcd complexify(const Eigen::Ref<const Eigen::VectorXd>& r)
{
    const auto n = r.size() / 2;
    Eigen::VectorXcd v(n);
    v.real() = r.head(n);
    v.imag() = r.tail(n);
    return v;
}

// 2N x 2N real Gram matrix G with z^T G z = |h^H p|^2 for z = [Re p; Im p]
inline Eigen::MatrixXd realified_gram(const Eigen::VectorXcd& h)
{
    const auto n = h.size();
    Eigen::MatrixXd s(2, 2 * n);
    s.row(0).head(n) = h.real().transpose();
    s.row(0).tail(n) = h.imag().transpose();
    s.row(1).head(n) = -h.imag().transpose();
    s.row(1).tail(n) = h.real().transpose();
    return s.transpose() * s;
}

/// Variable layout of one subproblem instance. Blocks of 2N reals hold the
/// precoder (common first when active), then shares, group rates, objective.
struct Assembly {
    SolveMode mode;
    bool common_active = false;
    int n_antennas = 0;
    int n_groups = 0;
    int n_vars = 0;
    int blocks = 0;

    int block_offset(int b) const { return 2 * n_antennas * b; }
    int designated_block(int m) const { return common_active ? m + 1 : m; }
    int z_size() const { return 2 * n_antennas * blocks; }
    // Rs: C_0..C_{M-1}; DegradedSingleStream: the single total share s
    int share_index(int m) const { return z_size() + m; }
    int group_rate_index(int m) const
    {
        return z_size() + (mode == SolveMode::Rs && common_active ? n_groups : 0) + m;
    }
    int objective_index() const { return n_vars - 1; }

    static Assembly make(SolveMode mode, bool common_active, const GroupLayout& layout)
    {
        Assembly a;
        a.mode = mode;
        a.common_active = common_active;
        a.n_antennas = layout.antennas();
        a.n_groups = layout.groups();
        switch (mode)
        {
        case SolveMode::Rs:
            a.blocks = common_active ? layout.groups() + 1 : layout.groups();
            a.n_vars = a.z_size() + (common_active ? 2 : 1) * layout.groups() + 1;
            break;
        case SolveMode::Designated:
            a.blocks = layout.groups();
            a.n_vars = a.z_size() + layout.groups() + 1;
            break;
        case SolveMode::DegradedSingleStream:
            a.blocks = 1;
            a.n_vars = a.z_size() + 1; // [z_c | s]
            break;
        }
        return a;
    }
};

inline std::vector<detail::QuadraticConstraint> build_constraints(
    const Assembly& a, const GroupLayout& layout, const ChannelSet& channel, double power,
    const UserFilters& filters)
{
    const int n_users = layout.users();
    const int nz = a.z_size();
    std::vector<detail::QuadraticConstraint> cons;

    std::vector<Eigen::MatrixXd> gram(n_users);
    for (int k = 0; k < n_users; k++)
        gram[k] = realified_gram(channel.H.col(k));

    const bool has_designated = a.mode != SolveMode::DegradedSingleStream;
    const double sigma2 = channel.noise_variance;

    if (has_designated)
    {
        // 1 - xi_i >= r_{mu(i)}
        for (int i = 0; i < n_users; i++)
        {
            const double u = filters.designated_weight[i];
            const std::complex<double> g = filters.designated_equalizer[i];
            detail::QuadraticConstraint c;
            c.hessian = Eigen::MatrixXd::Zero(a.n_vars, a.n_vars);
            c.linear = Eigen::VectorXd::Zero(a.n_vars);
            const double w = 2.0 * u * std::norm(g);
            for (int m = 0; m < a.n_groups; m++)
            {
                const int off = a.block_offset(a.designated_block(m));
                c.hessian.block(off, off, 2 * a.n_antennas, 2 * a.n_antennas) = w * gram[i];
            }
            const int own_off = a.block_offset(a.designated_block(layout.group_of(i)));
            c.linear.segment(own_off, 2 * a.n_antennas) =
                -2.0 * u * realify(std::conj(g) * channel.H.col(i));
            c.linear[a.group_rate_index(layout.group_of(i))] = 1.0;
            c.offset = u * (std::norm(g) * sigma2 + 1.0) - std::log2(u) - 1.0;
            cons.push_back(std::move(c));
        }
    }

    if (a.common_active || a.mode == SolveMode::DegradedSingleStream)
    {
        // 1 - xi_c,k >= sum_m C_m
        for (int k = 0; k < n_users; k++)
        {
            const double u = filters.common_weight[k];
            const std::complex<double> g = filters.common_equalizer[k];
            detail::QuadraticConstraint c;
            c.hessian = Eigen::MatrixXd::Zero(a.n_vars, a.n_vars);
            c.linear = Eigen::VectorXd::Zero(a.n_vars);
            const double w = 2.0 * u * std::norm(g);
            for (int b = 0; b < a.blocks; b++)
            {
                const int off = a.block_offset(b);
                c.hessian.block(off, off, 2 * a.n_antennas, 2 * a.n_antennas) = w * gram[k];
            }
            c.linear.segment(a.block_offset(0), 2 * a.n_antennas) =
                -2.0 * u * realify(std::conj(g) * channel.H.col(k));
            if (a.mode == SolveMode::Rs)
                for (int m = 0; m < a.n_groups; m++)
                    c.linear[a.share_index(m)] = 1.0;
            else
                c.linear[a.share_index(0)] = 1.0;
            c.offset = u * (std::norm(g) * sigma2 + 1.0) - std::log2(u) - 1.0;
            cons.push_back(std::move(c));
        }
    }

    if (has_designated)
    {
        // r_g <= C_m + r_m
        for (int m = 0; m < a.n_groups; m++)
        {
            detail::QuadraticConstraint c;
            c.linear = Eigen::VectorXd::Zero(a.n_vars);
            c.linear[a.objective_index()] = 1.0;
            c.linear[a.group_rate_index(m)] = -1.0;
            if (a.mode == SolveMode::Rs && a.common_active)
                c.linear[a.share_index(m)] = -1.0;
            cons.push_back(std::move(c));
        }
    }

    // C >= 0 (or s >= 0)
    const int n_shares =
        a.mode == SolveMode::Rs && a.common_active ? a.n_groups
        : a.mode == SolveMode::DegradedSingleStream ? 1
                                                    : 0;
    for (int m = 0; m < n_shares; m++)
    {
        detail::QuadraticConstraint c;
        c.linear = Eigen::VectorXd::Zero(a.n_vars);
        c.linear[a.share_index(m)] = -1.0;
        cons.push_back(std::move(c));
    }

    // total power
    {
        detail::QuadraticConstraint c;
        c.hessian = Eigen::MatrixXd::Zero(a.n_vars, a.n_vars);
        c.hessian.diagonal().head(nz).setConstant(2.0);
        c.linear = Eigen::VectorXd::Zero(a.n_vars);
        c.offset = -power;
        cons.push_back(std::move(c));
    }
    return cons;
}

inline Eigen::VectorXd encode_precoder(const Assembly& a, const RsPrecoder& p)
{
    Eigen::VectorXd z = Eigen::VectorXd::Zero(a.z_size());
    int b = 0;
    if (a.common_active || a.mode == SolveMode::DegradedSingleStream)
        z.segment(a.block_offset(b++), 2 * a.n_antennas) = realify(p.common);
    if (a.mode != SolveMode::DegradedSingleStream)
        for (int m = 0; m < a.n_groups; m++)
            z.segment(a.block_offset(b++), 2 * a.n_antennas) = realify(p.designated[m]);
    return z;
}

inline RsPrecoder decode_precoder(const Assembly& a, const GroupLayout& layout,
                                  const Eigen::VectorXd& y)
{
    RsPrecoder p = RsPrecoder::zero(layout);
    int b = 0;
    if (a.common_active || a.mode == SolveMode::DegradedSingleStream)
        p.common = complexify(y.segment(a.block_offset(b++), 2 * a.n_antennas));
    if (a.mode != SolveMode::DegradedSingleStream)
        for (int m = 0; m < a.n_groups; m++)
            p.designated[m] = complexify(y.segment(a.block_offset(b++), 2 * a.n_antennas));
    return p;
}

} // namespace internal

/// Solves the WMSE subproblem (precoder and auxiliary rates for fixed
/// equalizers/weights) by a primal-dual interior-point method, warm-started
/// from the previous iterate. The returned point is feasible; its objective
/// never falls below what the warm precoder itself supports under the given
/// filters, so alternating optimization is monotone by construction.
inline SubproblemResult solve_subproblem(const GroupLayout& layout, const ChannelSet& channel,
                                         double power, const UserFilters& filters, SolveMode mode,
                                         const RsPrecoder& warm,
                                         const SubproblemOptions& opts = {})
{
    check_channel(layout, channel);
    check_precoder(layout, warm);
    if (!(power > 0.0))
        throw std::invalid_argument("solve_subproblem: power budget must be positive");

    const int n_groups = layout.groups();
    const int n_users = layout.users();

    if (filters.common_equalizer.size() != n_users ||
        filters.designated_equalizer.size() != n_users ||
        filters.common_weight.size() != n_users || filters.designated_weight.size() != n_users)
        throw std::invalid_argument("solve_subproblem: filter count does not match user count");

    // A common stream whose equalizers are all exactly zero cannot re-enter
    // the problem (its WMSE is constant in the precoder), so drop it and
    // solve the designated-only form.
    bool common_active = mode == SolveMode::Rs &&
                         filters.common_equalizer.cwiseAbs().maxCoeff() > 0.0;

    // start from the warm precoder pulled strictly inside the power ball
    RsPrecoder start = warm;
    if (mode == SolveMode::Designated)
    {
        start.common.setZero();
        start.common_shares.setZero();
    }
    if (mode == SolveMode::DegradedSingleStream)
        for (auto& beam : start.designated)
            beam.setZero();
    const double start_power = start.total_power();
    if (start_power > 0.998 * power)
    {
        const double scale = std::sqrt(0.998 * power / start_power);
        start.common *= scale;
        for (auto& beam : start.designated)
            beam *= scale;
    }

    // WMSEs of the start precoder under the fixed filters
    Eigen::VectorXd xi_c(n_users), xi_d(n_users);
    for (int k = 0; k < n_users; k++)
    {
        const WmsePair w = wmse(layout, channel, start, filters, k);
        xi_c[k] = w.common;
        xi_d[k] = w.designated;
    }

    // min_k (1 - xi_c,k) at the start point; without room for a positive
    // common share there is no strict interior, so fall back to the
    // designated-only form (the common rate cannot help this iteration).
    double common_slack = 0.0;
    if (common_active || mode == SolveMode::DegradedSingleStream)
        common_slack = (1.0 - xi_c.array()).minCoeff();
    if (mode == SolveMode::Rs && common_active && common_slack <= 1e-8)
        common_active = false;
    if (mode == SolveMode::DegradedSingleStream && common_slack <= 1e-8)
    {
        SubproblemResult res;
        res.precoder = RsPrecoder::zero(layout);
        res.aux.group = Eigen::VectorXd::Zero(n_groups);
        res.aux.shares = Eigen::VectorXd::Zero(n_groups);
        res.aux.objective = 0.0;
        return res;
    }
    if (mode == SolveMode::Rs && !common_active)
    {
        start.common.setZero();
        start.common_shares.setZero();
    }

    const internal::Assembly a = internal::Assembly::make(mode, common_active, layout);

    auto margin = [](double v) { return 1e-2 * (1.0 + std::abs(v)); };

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(a.n_vars);
    y0.head(a.z_size()) = internal::encode_precoder(a, start);

    Eigen::VectorXd r_start(n_groups);
    if (mode != SolveMode::DegradedSingleStream)
    {
        for (int m = 0; m < n_groups; m++)
        {
            double v = std::numeric_limits<double>::infinity();
            for (int i = layout.group_begin(m); i < layout.group_end(m); i++)
                v = std::min(v, 1.0 - xi_d[i]);
            r_start[m] = v;
            y0[a.group_rate_index(m)] = v - margin(v);
        }
    }

    if (mode == SolveMode::Rs && common_active)
    {
        // centered interior start: a flat floor worth 0.1 of the common-rate
        // room plus the warm shares capped at half of it, so no coordinate
        // begins glued to the C >= 0 corner
        Eigen::VectorXd warm_shares = start.common_shares;
        const double warm_total = warm_shares.sum();
        if (warm_total > 0.5 * common_slack)
            warm_shares *= 0.5 * common_slack / warm_total;
        for (int m = 0; m < n_groups; m++)
            y0[a.share_index(m)] = 0.1 * common_slack / n_groups + warm_shares[m];
    }
    else if (mode == SolveMode::DegradedSingleStream)
    {
        y0[a.share_index(0)] = 0.5 * common_slack;
    }

    if (mode != SolveMode::DegradedSingleStream)
    {
        double rg = std::numeric_limits<double>::infinity();
        for (int m = 0; m < n_groups; m++)
        {
            const double share = (mode == SolveMode::Rs && common_active) ? y0[a.share_index(m)] : 0.0;
            rg = std::min(rg, share + y0[a.group_rate_index(m)]);
        }
        y0[a.objective_index()] = rg - margin(rg);
    }

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(a.n_vars);
    cost[a.objective_index()] = -1.0;

    const auto constraints = internal::build_constraints(a, layout, channel, power, filters);
    const detail::IpmResult ipm = detail::solve_qcqp(cost, constraints, y0, opts.ipm);

    const double kkt = std::max(ipm.dual_residual, ipm.gap / (1.0 + std::abs(cost.dot(ipm.y))));

    SubproblemResult res;
    res.precoder = internal::decode_precoder(a, layout, ipm.y);
    res.gap = ipm.gap;
    res.dual_residual = ipm.dual_residual;
    res.power_multiplier = ipm.multipliers[ipm.multipliers.size() - 1];
    res.iterations = ipm.iterations;
    res.aux.group = Eigen::VectorXd::Zero(n_groups);
    res.aux.shares = Eigen::VectorXd::Zero(n_groups);
    if (mode == SolveMode::DegradedSingleStream)
    {
        const double s = ipm.y[a.share_index(0)];
        res.aux.shares.setConstant(s / n_groups);
        res.aux.objective = s / n_groups;
    }
    else
    {
        for (int m = 0; m < n_groups; m++)
        {
            res.aux.group[m] = ipm.y[a.group_rate_index(m)];
            if (mode == SolveMode::Rs && common_active)
                res.aux.shares[m] = ipm.y[a.share_index(m)];
        }
        res.aux.objective = ipm.y[a.objective_index()];
    }
    res.precoder.common_shares = res.aux.shares;

    // Monotone safeguard: the warm precoder with re-tightened auxiliaries is
    // feasible here; keep it if the solver's point is (marginally) worse.
    {
        double cand_obj;
        AuxRates cand;
        cand.group = Eigen::VectorXd::Zero(n_groups);
        cand.shares = Eigen::VectorXd::Zero(n_groups);
        if (mode == SolveMode::DegradedSingleStream)
        {
            const double s = std::max(0.0, common_slack);
            cand.shares.setConstant(s / n_groups);
            cand_obj = s / n_groups;
        }
        else
        {
            Eigen::VectorXd shares = Eigen::VectorXd::Zero(n_groups);
            if (mode == SolveMode::Rs && common_active)
            {
                shares = start.common_shares;
                const double total = shares.sum();
                if (total > common_slack)
                    shares *= std::max(0.0, common_slack) / total;
            }
            cand_obj = std::numeric_limits<double>::infinity();
            for (int m = 0; m < n_groups; m++)
            {
                cand.group[m] = r_start[m];
                cand.shares[m] = shares[m];
                cand_obj = std::min(cand_obj, shares[m] + r_start[m]);
            }
        }
        cand.objective = cand_obj;
        if (cand_obj > res.aux.objective)
        {
            res.aux = cand;
            res.precoder = start;
            res.precoder.common_shares = cand.shares;
        }
    }

    if (!ipm.converged && kkt > opts.accept_kkt)
        throw SubproblemError("solve_subproblem: interior-point method stalled at scaled KKT "
                              "residual " + std::to_string(kkt),
                              res);
    return res;
}

struct AoOptions {
    int max_iters = 200;
    double tolerance = 1e-4;  // stop when r_g improves by less than this (bits)
    int restarts = 3;
    std::uint64_t seed = 0;
    SubproblemOptions subproblem;
    std::vector<RsPrecoder> warm_starts;  // extra starting points (other modes' solutions)
};

struct AoResult {
    RsPrecoder precoder;
    RateReport report;          // ground truth, recomputed through the rate model
    std::vector<double> trace;  // subproblem objective per iteration (winning start)
    int iterations = 0;         // iterations of the winning start
    int total_iterations = 0;   // across all starts
};

class AoError : public std::runtime_error {
  public:
    AoError(const std::string& what, std::vector<double> trace_)
        : std::runtime_error(what), trace(std::move(trace_))
    {
    }
    std::vector<double> trace;
};

namespace internal {

inline Eigen::VectorXcd dominant_left_singular_vector(const Eigen::MatrixXcd& h)
{
    if (h.norm() == 0.0)
    {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(h.rows());
        e[0] = 1.0;
        return e;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeThinU);
    return svd.matrixU().col(0);
}

inline Eigen::VectorXcd matched_filter_direction(const GroupLayout& layout,
                                                 const ChannelSet& channel, int m)
{
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(layout.antennas());
    for (int k = layout.group_begin(m); k < layout.group_end(m); k++)
        f += channel.H.col(k);
    const double n = f.norm();
    if (n == 0.0)
    {
        f.setZero();
        f[0] = 1.0;
        return f;
    }
    return f / n;
}

inline Eigen::VectorXcd jitter(const Eigen::VectorXcd& dir, ComplexGaussian& gen, double amount)
{
    Eigen::VectorXcd d = dir + amount * gen.vector(static_cast<int>(dir.size()));
    const double n = d.norm();
    return n > 0.0 ? Eigen::VectorXcd(d / n) : dir;
}

inline RsPrecoder initial_precoder(SolveMode mode, const GroupLayout& layout,
                                   const ChannelSet& channel, double power, std::uint64_t seed,
                                   int restart)
{
    RsPrecoder p = RsPrecoder::zero(layout);
    ComplexGaussian gen(seed * 0x9e3779b97f4a7c15ULL + 0x51ed2701 + restart);
    const double amount = restart == 0 ? 0.0 : 0.5;

    Eigen::VectorXcd common_dir = dominant_left_singular_vector(channel.H);
    if (restart > 0)
        common_dir = jitter(common_dir, gen, amount);

    std::vector<Eigen::VectorXcd> des_dir(layout.groups());
    for (int m = 0; m < layout.groups(); m++)
    {
        des_dir[m] = matched_filter_direction(layout, channel, m);
        if (restart > 0)
            des_dir[m] = jitter(des_dir[m], gen, amount);
    }

    switch (mode)
    {
    case SolveMode::Designated:
        for (int m = 0; m < layout.groups(); m++)
            p.designated[m] = std::sqrt(power / layout.groups()) * des_dir[m];
        break;
    case SolveMode::DegradedSingleStream:
        p.common = std::sqrt(power) * common_dir;
        break;
    case SolveMode::Rs:
    {
        static constexpr double kBeta[] = {0.5, 0.25, 0.75};
        const double beta = kBeta[restart % 3];
        p.common = std::sqrt(beta * power) * common_dir;
        for (int m = 0; m < layout.groups(); m++)
            p.designated[m] = std::sqrt((1.0 - beta) * power / layout.groups()) * des_dir[m];
        break;
    }
    }
    return p;
}

/// Adapts an arbitrary feasible precoder to serve as a start for the given
/// mode: beams outside the mode are zeroed, dead in-mode beams get a small
/// power floor so their equalizers come alive, and the budget is restored.
inline RsPrecoder revive_precoder(SolveMode mode, const GroupLayout& layout,
                                  const ChannelSet& channel, double power, const RsPrecoder& warm)
{
    RsPrecoder p = warm;
    if (mode == SolveMode::Designated)
    {
        p.common.setZero();
        p.common_shares.setZero();
    }
    if (mode == SolveMode::DegradedSingleStream)
        for (auto& beam : p.designated)
            beam.setZero();

    const double floor = 1e-4 * power / (layout.groups() + 1);
    auto lift = [floor](Eigen::VectorXcd& beam, const Eigen::VectorXcd& fallback_dir) {
        const double q = beam.squaredNorm();
        if (q >= floor)
            return;
        beam = q > 0.0 ? Eigen::VectorXcd(std::sqrt(floor / q) * beam)
                       : Eigen::VectorXcd(std::sqrt(floor) * fallback_dir);
    };
    if (mode != SolveMode::Designated)
        lift(p.common, dominant_left_singular_vector(channel.H));
    if (mode != SolveMode::DegradedSingleStream)
        for (int m = 0; m < layout.groups(); m++)
            lift(p.designated[m], matched_filter_direction(layout, channel, m));

    const double total = p.total_power();
    if (total > power)
    {
        const double scale = std::sqrt(power / total);
        p.common *= scale;
        for (auto& beam : p.designated)
            beam *= scale;
    }
    return p;
}

/// Largest t with sum_m (t - floor_m)^+ <= budget, i.e. the optimal equal
/// fill level for splitting the common rate across groups.
inline double water_fill_level(const Eigen::VectorXd& floors, double budget)
{
    double lo = floors.minCoeff();
    double hi = lo + budget;
    for (int it = 0; it < 100; it++)
    {
        const double mid = 0.5 * (lo + hi);
        const double used = (mid - floors.array()).max(0.0).sum();
        if (used <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace internal

/// Alternating optimization for the MMF problem in the requested mode.
/// Designated pins the common stream to zero, DegradedSingleStream pins all
/// designated beams to zero with equal common shares. Multiple seeded starts
/// (plus any provided warm starts) are run to convergence and the best
/// model-verified MMF wins. The reported rates are recomputed from the
/// returned precoder through the rate model, never taken from the auxiliary
/// variables.
inline AoResult ao_solve(const GroupLayout& layout, const ChannelSet& channel, double power,
                         SolveMode mode, const AoOptions& opts = {})
{
    check_channel(layout, channel);
    if (!(power > 0.0))
        throw std::invalid_argument("ao_solve: power budget must be positive");

    std::vector<RsPrecoder> starts;
    for (int r = 0; r < std::max(1, opts.restarts); r++)
        starts.push_back(internal::initial_precoder(mode, layout, channel, power, opts.seed, r));
    for (const auto& warm : opts.warm_starts)
        starts.push_back(internal::revive_precoder(mode, layout, channel, power, warm));

    std::optional<AoResult> best;
    int total_iterations = 0;
    std::string first_error;
    std::vector<double> error_trace;

    for (const auto& start : starts)
    {
        RsPrecoder pre = start;
        std::vector<double> trace;
        bool failed = false;
        try
        {
            for (int it = 0; it < opts.max_iters; it++)
            {
                const UserFilters filters = mmse_update(layout, channel, pre);
                SubproblemResult sub =
                    solve_subproblem(layout, channel, power, filters, mode, pre, opts.subproblem);
                pre = std::move(sub.precoder);
                trace.push_back(sub.aux.objective);
                const std::size_t t = trace.size();
                if (t >= 2 && std::abs(trace[t - 1] - trace[t - 2]) < opts.tolerance)
                    break;
            }
        }
        catch (const SubproblemError& e)
        {
            failed = true;
            if (first_error.empty())
            {
                first_error = e.what();
                error_trace = trace;
            }
        }
        total_iterations += static_cast<int>(trace.size());
        if (failed)
            continue;

        // Final share split: with the beams fixed, the optimal C is the
        // water-fill of the common rate over the groups' designated rates.
        if (mode != SolveMode::Designated)
        {
            RateReport rep = rates_rs(layout, channel, pre);
            const double budget = rep.common_user_rates.minCoeff() * (1.0 - 1e-12);
            if (budget > 0.0)
            {
                Eigen::VectorXd floors(layout.groups());
                for (int m = 0; m < layout.groups(); m++)
                    floors[m] = rep.user_rates
                                    .segment(layout.group_begin(m), layout.group_size(m))
                                    .minCoeff();
                const double level = internal::water_fill_level(floors, budget);
                const Eigen::VectorXd shares = (level - floors.array()).max(0.0).matrix();
                const double old_mmf = (pre.common_shares + floors).minCoeff();
                const double new_mmf = (shares + floors).minCoeff();
                if (new_mmf > old_mmf)
                    pre.common_shares = shares;
            }
        }

        AoResult candidate;
        candidate.report = mode == SolveMode::Designated ? rates_designated(layout, channel, pre)
                                                         : rates_rs(layout, channel, pre);
        candidate.precoder = std::move(pre);
        candidate.trace = std::move(trace);
        candidate.iterations = static_cast<int>(candidate.trace.size());
        if (!best || candidate.report.mmf > best->report.mmf)
            best = std::move(candidate);
    }

    if (!best)
        throw AoError("ao_solve: every start failed: " + first_error, error_trace);
    best->total_iterations = total_iterations;
    return *best;
}

} // namespace mmfbeam::wmmse

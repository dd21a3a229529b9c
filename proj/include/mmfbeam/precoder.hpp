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

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "group_layout.hpp"

namespace mmfbeam {

/// Rate-splitting precoder: one common beam p_c, one designated beam p_m per
/// group, and the per-group shares C_m of the common rate (bits/s/Hz).
/// Classical designated precoders have p_c = 0 and C = 0; the degraded
/// single-stream precoder has all p_m = 0.
struct RsPrecoder {
    Eigen::VectorXcd common;                   // p_c, length N (may be all-zero)
    std::vector<Eigen::VectorXcd> designated;  // p_m, each length N
    Eigen::VectorXd common_shares;             // C_m >= 0

    static RsPrecoder zero(const GroupLayout& layout)
    {
        RsPrecoder p;
        p.common = Eigen::VectorXcd::Zero(layout.antennas());
        p.designated.assign(layout.groups(), Eigen::VectorXcd::Zero(layout.antennas()));
        p.common_shares = Eigen::VectorXd::Zero(layout.groups());
        return p;
    }

    double total_power() const
    {
        double q = common.squaredNorm();
        for (const auto& p : designated)
            q += p.squaredNorm();
        return q;
    }

    bool is_designated_only(double tol = 0.0) const
    {
        return common.squaredNorm() <= tol && common_shares.lpNorm<Eigen::Infinity>() <= tol;
    }

    bool is_degraded_only(double tol = 0.0) const
    {
        for (const auto& p : designated)
            if (p.squaredNorm() > tol)
                return false;
        return true;
    }
};

inline void check_precoder(const GroupLayout& layout, const RsPrecoder& p)
{
    if (p.common.size() != layout.antennas())
        throw std::invalid_argument("precoder common beam has wrong dimension");
    if (static_cast<int>(p.designated.size()) != layout.groups())
        throw std::invalid_argument("precoder beam count does not match group count");
    for (const auto& beam : p.designated)
        if (beam.size() != layout.antennas())
            throw std::invalid_argument("precoder designated beam has wrong dimension");
    if (p.common_shares.size() != layout.groups())
        throw std::invalid_argument("precoder share count does not match group count");
    if ((p.common_shares.array() < 0.0).any())
        throw std::invalid_argument("common rate shares must be non-negative");
}

} // namespace mmfbeam

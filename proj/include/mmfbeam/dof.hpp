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
// Closed-form MMF-DoF of the three strategies, in exact rational arithmetic.
// The DoF is the high-SNR slope of the MMF rate against log2(P); it depends
// only on the layout (N, M, G_1..G_M), never on the channel realization.

#pragma once

#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

#include "group_layout.hpp"

namespace mmfbeam::dof {

using Rational = boost::rational<long>;

enum class Regime { InterferenceFree, PartiallyOverloaded, FullyOverloaded };

inline std::string to_string(Regime r)
{
    switch (r)
    {
    case Regime::InterferenceFree: return "interference_free";
    case Regime::PartiallyOverloaded: return "partially_overloaded";
    case Regime::FullyOverloaded: return "fully_overloaded";
    }
    return "?";
}

/// N_L: minimum antenna count to serve the L smallest groups with
/// interference-free designated beams while silencing the rest
/// (1 + G_2 + ... + G_L; N_1 = 1). L is 1-based.
inline int n_l(const GroupLayout& layout, int L)
{
    if (L < 1 || L > layout.groups())
        throw std::out_of_range("n_l: L must be in 1..M");
    int n = 1;
    for (int m = 2; m <= L; m++)
        n += layout.group_size(m - 1);
    return n;
}

/// MMF-DoF of classical designated beamforming: 1 when every beam can be
/// zero-forced (N >= N_M), 1/2 in the partially-overloaded regime
/// (N_{M-1} + G_1 <= N < N_M), 0 once mutual interference is unavoidable.
inline Rational dof_designated(const GroupLayout& layout)
{
    const int n = layout.antennas();
    const int m = layout.groups();
    if (n >= n_l(layout, m))
        return {1, 1};
    if (m >= 2 && n >= n_l(layout, m - 1) + layout.group_size(0))
        return {1, 2};
    return {0, 1};
}

/// MMF-DoF of degraded beamforming: the single decoded DoF split equally,
/// 1/M for any antenna count.
inline Rational dof_degraded(const GroupLayout& layout)
{
    return {1, layout.groups()};
}

/// Largest number of groups servable with interference-free designated beams
/// (the unique L with N_L <= N < N_{L+1}, or M when N >= N_M).
inline int m_d_star(const GroupLayout& layout)
{
    const int n = layout.antennas();
    const int m = layout.groups();
    if (n >= n_l(layout, m))
        return m;
    for (int l = m - 1; l >= 1; l--)
        if (n >= n_l(layout, l))
            return l;
    return 1; // unreachable: N_1 = 1 <= N
}

/// MMF-DoF of rate-splitting beamforming: 1 / (1 + M - M_D*).
inline Rational dof_rs(const GroupLayout& layout)
{
    return {1, 1 + layout.groups() - m_d_star(layout)};
}

/// Guaranteed minimum number of groups the m-th designated beam interferes
/// with under any feasible design: M_c* for the smallest group, M_c* - 1
/// (floored at 0) for the others. m is 1-based.
inline int min_interfered_groups(const GroupLayout& layout, int m)
{
    if (m < 1 || m > layout.groups())
        throw std::out_of_range("min_interfered_groups: m must be in 1..M");
    const int m_c_star = layout.groups() - m_d_star(layout);
    if (m == 1)
        return m_c_star;
    return m_c_star > 0 ? m_c_star - 1 : 0;
}

/// Overload classification implied by the designated-beamforming DoF.
inline Regime classify_regime(const GroupLayout& layout)
{
    const Rational d = dof_designated(layout);
    if (d == Rational(1, 1))
        return Regime::InterferenceFree;
    if (d == Rational(1, 2))
        return Regime::PartiallyOverloaded;
    return Regime::FullyOverloaded;
}

/// Summary of the closed forms for one layout.
struct DofReport {
    Rational designated;
    Rational degraded;
    Rational rs;
    int m_d_star = 0;
    Regime regime = Regime::FullyOverloaded;
};

inline DofReport analyze(const GroupLayout& layout)
{
    DofReport rep;
    rep.designated = dof_designated(layout);
    rep.degraded = dof_degraded(layout);
    rep.rs = dof_rs(layout);
    rep.m_d_star = m_d_star(layout);
    rep.regime = classify_regime(layout);
    return rep;
}

inline std::string to_string(const Rational& r)
{
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

} // namespace mmfbeam::dof

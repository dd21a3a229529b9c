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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "group_layout.hpp"

namespace mmfbeam {

/// One fading realization: N x K channel matrix (column k = h_k) plus the
/// receiver noise variance shared by all users.
struct ChannelSet {
    Eigen::MatrixXcd H;
    double noise_variance = 1.0;

    int antennas() const { return static_cast<int>(H.rows()); }
    int users() const { return static_cast<int>(H.cols()); }
};

/// Seeded stream of circularly-symmetric complex Gaussian CN(0,1) samples.
/// Box-Muller on top of mt19937_64 keeps the stream fully reproducible.
class ComplexGaussian {
  public:
    explicit ComplexGaussian(std::uint64_t seed) : rng_(seed) {}

    std::complex<double> operator()()
    {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log1p(-u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        // real/imag parts are N(0, 1/2) so that E|z|^2 = 1
        const double scale = radius / std::numbers::sqrt2;
        return {scale * std::cos(angle), scale * std::sin(angle)};
    }

    Eigen::VectorXcd vector(int n)
    {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; i++)
            v[i] = (*this)();
        return v;
    }

  private:
    double uniform01() { return std::ldexp(static_cast<double>(rng_() >> 11), -53); } // [0,1)

    std::mt19937_64 rng_;
};

/// Draws an i.i.d. CN(0,1) channel for the given layout. Deterministic per
/// seed; noise variance defaults to 1 so transmit SNR equals the power budget.
inline ChannelSet sample_channel(const GroupLayout& layout, std::uint64_t seed)
{
    ComplexGaussian gen(seed);
    ChannelSet ch;
    ch.H.resize(layout.antennas(), layout.users());
    for (int k = 0; k < layout.users(); k++)
        for (int i = 0; i < layout.antennas(); i++)
            ch.H(i, k) = gen();
    ch.noise_variance = 1.0;
    return ch;
}

inline void check_channel(const GroupLayout& layout, const ChannelSet& channel)
{
    if (channel.antennas() != layout.antennas() || channel.users() != layout.users())
        throw std::invalid_argument("channel dimensions do not match layout");
    if (!(channel.noise_variance > 0.0))
        throw std::invalid_argument("noise variance must be positive");
}

} // namespace mmfbeam

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

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace mmfbeam {

/// Orthonormal basis of null(A^H) for an N x c matrix A, i.e. the transmit
/// directions orthogonal to every column of A. Rank is decided by singular
/// values relative to tolerance * sigma_max; for generic channels the basis
/// has exactly max(N - c, 0) columns.
inline Eigen::MatrixXcd null_space_basis(const Eigen::MatrixXcd& a, double tolerance = 1e-10)
{
    if (a.rows() == 0 || a.cols() == 0)
        throw std::invalid_argument("null_space_basis: empty matrix");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("null_space_basis: tolerance must be positive");

    const auto n = a.rows();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double cutoff = tolerance * (sv.size() > 0 ? sv[0] : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > cutoff)
        rank++;
    return svd.matrixU().rightCols(n - rank);
}

} // namespace mmfbeam

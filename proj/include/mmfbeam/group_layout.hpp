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

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmfbeam {

/// Combinatorial skeleton of a multigroup multicast system: N transmit
/// antennas and M multicast groups of sizes G_1 <= ... <= G_M. Users are
/// indexed 0..K-1 contiguously by group (group 0 first).
class GroupLayout {
  public:
    GroupLayout(int n_antennas, std::vector<int> group_sizes)
        : n_antennas_(n_antennas), group_sizes_(std::move(group_sizes))
    {
        if (n_antennas_ < 1)
            throw std::invalid_argument("GroupLayout: need at least one antenna");
        if (group_sizes_.empty())
            throw std::invalid_argument("GroupLayout: need at least one group");
        for (std::size_t m = 0; m < group_sizes_.size(); m++)
        {
            if (group_sizes_[m] < 1)
                throw std::invalid_argument("GroupLayout: group sizes must be positive");
            if (m > 0 && group_sizes_[m] < group_sizes_[m - 1])
                throw std::invalid_argument("GroupLayout: group sizes must be non-decreasing");
        }
        group_start_.resize(group_sizes_.size() + 1, 0);
        for (std::size_t m = 0; m < group_sizes_.size(); m++)
            group_start_[m + 1] = group_start_[m] + group_sizes_[m];
        user_to_group_.reserve(users());
        for (std::size_t m = 0; m < group_sizes_.size(); m++)
            user_to_group_.insert(user_to_group_.end(), group_sizes_[m], static_cast<int>(m));
    }

    int antennas() const { return n_antennas_; }
    int groups() const { return static_cast<int>(group_sizes_.size()); }
    int users() const { return group_start_.back(); }

    int group_size(int m) const { return group_sizes_.at(m); }
    const std::vector<int>& group_sizes() const { return group_sizes_; }

    /// mu(k): the group user k belongs to.
    int group_of(int k) const { return user_to_group_.at(k); }

    /// First user index of group m; members of m are [group_begin(m), group_end(m)).
    int group_begin(int m) const { return group_start_.at(m); }
    int group_end(int m) const { return group_start_.at(m + 1); }

    std::string describe() const
    {
        std::string s = "G=(";
        for (int m = 0; m < groups(); m++)
            s += (m ? "," : "") + std::to_string(group_sizes_[m]);
        s += ") N=" + std::to_string(n_antennas_);
        return s;
    }

    friend bool operator==(const GroupLayout& a, const GroupLayout& b)
    {
        return a.n_antennas_ == b.n_antennas_ && a.group_sizes_ == b.group_sizes_;
    }

  private:
    int n_antennas_;
    std::vector<int> group_sizes_;
    std::vector<int> group_start_;
    std::vector<int> user_to_group_;
};

} // namespace mmfbeam

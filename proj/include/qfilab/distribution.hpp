// Copyright 2026 The qfilab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qfilab/errors.hpp"
#include "qfilab/fock.hpp"

namespace qfilab {

/// A moment of a (possibly truncated) photon-number distribution.
///
/// `value` is always the moment of the retained, renormalized support and is
/// finite. `divergent` records that the untruncated family moment is
/// infinite; `limit` holds the untruncated value when it is finite and known
/// in closed form. For divergent moments `trend` lists (cutoff, value) pairs
/// of the retained moment at increasing cutoffs.
struct Moment {
    double value = 0.0;
    bool divergent = false;
    std::optional<double> limit;
    std::vector<std::pair<std::int64_t, double>> trend;
};

/// Closed-form knowledge about the untruncated family a distribution was cut from.
struct FamilyMoments {
    bool mean_divergent = false;
    std::optional<double> mean_limit;
    bool second_divergent = false;
    std::optional<double> second_limit;
    std::vector<std::pair<std::int64_t, double>> mean_trend;
    std::vector<std::pair<std::int64_t, double>> second_trend;
};

/// Probability weights P(N) over total photon number.
///
/// `weights` are the family probabilities on the retained support, so
/// sum(weights) + tail_mass = 1. States built from a truncated family are
/// renormalized on the retained support; `retained_probability` gives the
/// matching renormalized weight.
class PhotonDistribution {
   public:
    PhotonDistribution() = default;

    PhotonDistribution(std::vector<std::pair<int, double>> weights, double tail_mass,
                       const FamilyMoments &family = {})
        : weights_(std::move(weights)), tail_mass_(tail_mass) {
        std::sort(weights_.begin(), weights_.end());
        double total = 0.0;
        for (const auto &[n, w] : weights_) {
            if (n < 0 || !(w >= 0.0)) {
                throw ValidationError("photon distribution weights must be nonnegative");
            }
            total += w;
        }
        if (!(total > 0.0)) {
            throw ValidationError("photon distribution has no retained mass");
        }
        retained_mass_ = total;
        // Reverse order adds the small tail terms of heavy-tailed families first.
        double m1 = 0.0;
        double m2 = 0.0;
        for (auto it = weights_.rbegin(); it != weights_.rend(); ++it) {
            const double n = it->first;
            m1 += n * it->second;
            m2 += n * n * it->second;
        }
        mean_.value = m1 / total;
        second_.value = m2 / total;
        mean_.divergent = family.mean_divergent;
        mean_.limit = family.mean_limit;
        mean_.trend = family.mean_trend;
        second_.divergent = family.second_divergent;
        second_.limit = family.second_limit;
        second_.trend = family.second_trend;
    }

    /// Distribution of a state's total photon number (no truncation tail).
    static PhotonDistribution of_state(const TwoModeState &state) {
        std::vector<std::pair<int, double>> weights;
        for (const auto &c : sector_decompose(state)) {
            weights.emplace_back(c.total, c.probability);
        }
        return PhotonDistribution(std::move(weights), 0.0);
    }

    const std::vector<std::pair<int, double>> &weights() const { return weights_; }
    double tail_mass() const { return tail_mass_; }
    double retained_mass() const { return retained_mass_; }

    /// Renormalized weight of sector N on the retained support.
    double retained_probability(int total) const {
        auto it = std::lower_bound(weights_.begin(), weights_.end(), total,
                                   [](const auto &w, int n) { return w.first < n; });
        return (it != weights_.end() && it->first == total) ? it->second / retained_mass_ : 0.0;
    }

    const Moment &mean() const { return mean_; }
    const Moment &second_moment() const { return second_; }
    double variance() const { return second_.value - mean_.value * mean_.value; }

   private:
    std::vector<std::pair<int, double>> weights_;
    double tail_mass_ = 0.0;
    double retained_mass_ = 1.0;
    Moment mean_;
    Moment second_;
};

}  // namespace qfilab

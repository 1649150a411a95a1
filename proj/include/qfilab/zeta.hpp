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

// Riemann zeta on real arguments x > 1 and the truncated power sums that
// the zeta-weighted state families need.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>

#include "qfilab/errors.hpp"

namespace qfilab {

/// Arguments with x <= 1 + kZetaPoleGuard are rejected.
inline constexpr double kZetaPoleGuard = 1e-6;

/// sum_{n=1}^{count} n^{-s}, accumulated from the smallest term up.
inline double partial_zeta(double s, std::int64_t count) {
    double sum = 0.0;
    for (std::int64_t n = count; n >= 1; --n) {
        sum += std::pow(double(n), -s);
    }
    return sum;
}

/// H_K = sum_{n=1}^{K} 1/n.
inline double harmonic(std::int64_t count) { return partial_zeta(1.0, count); }

namespace detail {

/// Magnitude of the first omitted Euler-Maclaurin term (B6) at split point K.
inline double zeta_remainder_bound(double x, double k) {
    return x * (x + 1) * (x + 2) * (x + 3) * (x + 4) * std::pow(k, -x - 5) / 30240.0;
}

/// Partial sum to K - 1 plus the Euler-Maclaurin tail from K through the B4 term.
inline double zeta_uncached(double x, double tol) {
    std::int64_t k = 8;
    while (zeta_remainder_bound(x, double(k)) > tol && k < (std::int64_t{1} << 40)) {
        k *= 2;
    }
    const double kd = double(k);
    const double fk = std::pow(kd, -x);
    double tail = kd * fk / (x - 1.0)         // integral from K
                  + 0.5 * fk                  // f(K) / 2
                  + x * fk / (12.0 * kd)      // -B2/2! f'(K)
                  - x * (x + 1) * (x + 2) * fk / (720.0 * kd * kd * kd);  // -B4/4! f'''(K)
    return tail + partial_zeta(x, k - 1);
}

class ZetaMemo {
   public:
    double get(double x, double tol) {
        const auto key = std::make_pair(std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(tol));
        {
            std::shared_lock lock(mutex_);
            if (auto it = table_.find(key); it != table_.end()) {
                return it->second;
            }
        }
        const double value = zeta_uncached(x, tol);
        std::unique_lock lock(mutex_);
        table_.emplace(key, value);
        return value;
    }

   private:
    std::shared_mutex mutex_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> table_;
};

inline ZetaMemo &zeta_memo() {
    static ZetaMemo memo;
    return memo;
}

}  // namespace detail

/// Riemann zeta(x) for real x > 1, accurate to `tol` (absolute).
/// Throws PoleProximity for x <= 1 + kZetaPoleGuard.
inline double zeta(double x, double tol = 1e-14) {
    if (!(x > 1.0 + kZetaPoleGuard)) {
        throw PoleProximity("zeta argument " + std::to_string(x) + " is at or too close to the pole at 1");
    }
    if (!(tol > 0.0)) {
        throw ValidationError("zeta tolerance must be positive");
    }
    return detail::zeta_memo().get(x, tol);
}

/// zeta(x) for any x > 1. Inside the pole guard the Laurent expansion
/// 1/(x-1) + gamma - gamma_1 (x-1) is used; its error there is below 1e-12.
inline double zeta_extended(double x, double tol = 1e-14) {
    if (!(x > 1.0)) {
        throw PoleProximity("zeta argument must exceed 1");
    }
    if (x > 1.0 + kZetaPoleGuard) {
        return zeta(x, tol);
    }
    constexpr double euler_gamma = 0.57721566490153286;
    constexpr double stieltjes_1 = -0.07281584548367672;
    const double eps = x - 1.0;
    return 1.0 / eps + euler_gamma - stieltjes_1 * eps;
}

}  // namespace qfilab

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

// Constructors for the interferometric input-state families, each returned
// with its photon-number distribution and the closed-form QFI of the
// phase-encoded state in the untruncated limit.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qfilab/distribution.hpp"
#include "qfilab/errors.hpp"
#include "qfilab/fock.hpp"
#include "qfilab/zeta.hpp"

namespace qfilab {

struct FamilyState {
    std::string family;
    TwoModeState state;
    PhotonDistribution distribution;
    /// Pipeline the family is meant for: MZI for dual-Fock inputs, MMZI for
    /// states produced by an entangled source.
    Pipeline pipeline = Pipeline::MMZI;
    /// QFI of the phase-encoded state. `value` is the truncated closed form;
    /// `divergent` / `limit` describe the untruncated family.
    Moment qfi;
};

inline TwoModeState noon(int n) {
    if (n < 1) {
        throw InvalidN("NOON states need N >= 1, got " + std::to_string(n));
    }
    const double a = 1.0 / std::numbers::sqrt2;
    return make_state({{n, 0, a}, {0, n, a}}, n);
}

inline TwoModeState dual_fock(int n) {
    if (n < 0) {
        throw InvalidN("dual Fock states need N >= 0, got " + std::to_string(n));
    }
    return make_state({{n, n, 1.0}}, 2 * n);
}

/// Closed form of B|N,N>, without the global factor i^N:
///   sum_k C(N,k) sqrt((2N-2k)! (2k)!) / (N! 2^N) |2N-2k, 2k>.
/// Coefficients are evaluated through log-gamma.
inline TwoModeState dual_fock_after_bs_closed_form(int n) {
    if (n < 1) {
        throw InvalidN("closed form needs N >= 1, got " + std::to_string(n));
    }
    std::vector<Amplitude> entries;
    entries.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double log_c = 0.5 * (std::lgamma(2.0 * (n - k) + 1) + std::lgamma(2.0 * k + 1)) -
                             std::lgamma(k + 1.0) - std::lgamma(double(n - k) + 1) -
                             n * std::numbers::ln2;
        entries.push_back({FockKey{2 * (n - k), 2 * k}, cplx{std::exp(log_c), 0.0}});
    }
    return TwoModeState::from_entries(std::move(entries), 2 * n, {}, false);
}

namespace detail {

/// Cutoffs 10, 100, ... below `cutoff`, then `cutoff` itself.
inline std::vector<std::int64_t> decade_cutoffs(std::int64_t cutoff) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 10; k < cutoff; k *= 10) {
        out.push_back(k);
    }
    out.push_back(cutoff);
    return out;
}

/// Retained moment scale^p * sum n^{p-x} / sum n^{-x} over n = 1..K at decade cutoffs.
inline std::vector<std::pair<std::int64_t, double>> power_law_trend(double x, int power, double scale,
                                                                    std::int64_t cutoff) {
    std::vector<std::pair<std::int64_t, double>> out;
    for (auto k : decade_cutoffs(cutoff)) {
        out.emplace_back(k, std::pow(scale, power) * partial_zeta(x - power, k) / partial_zeta(x, k));
    }
    return out;
}

/// Weights n^{-x} / zeta(x) for n = 1..K, placed at total photon number scale * n.
inline FamilyMoments power_law_moments(double x, double scale, std::int64_t cutoff) {
    FamilyMoments m;
    const double zx = zeta(x);
    if (x > 2.0) {
        m.mean_limit = scale * zeta_extended(x - 1.0) / zx;
    } else {
        m.mean_divergent = true;
        m.mean_trend = power_law_trend(x, 1, scale, cutoff);
    }
    if (x > 3.0) {
        m.second_limit = scale * scale * zeta_extended(x - 2.0) / zx;
    } else {
        m.second_divergent = true;
        m.second_trend = power_law_trend(x, 2, scale, cutoff);
    }
    return m;
}

inline void check_power_law(double x, int cutoff) {
    if (!(x > 1.0)) {
        throw ValidationError("zeta family exponent must exceed 1");
    }
    if (cutoff < 1) {
        throw CutoffViolation("zeta family cutoff must be >= 1");
    }
}

/// Family weights w_n = n^{-x} / zeta(x) and the discarded tail mass.
inline std::pair<std::vector<double>, double> power_law_weights(double x, int cutoff) {
    const double zx = zeta(x);
    std::vector<double> w(cutoff + 1, 0.0);
    for (int n = 1; n <= cutoff; ++n) {
        w[n] = std::pow(double(n), -x) / zx;
    }
    const double tail = (zx - partial_zeta(x, cutoff)) / zx;
    return {std::move(w), tail};
}

/// Superposition of NOON(scale * n) components with probabilities w_n.
/// A component at total 0 is the vacuum.
inline TwoModeState noon_superposition(const std::vector<double> &w, int scale) {
    std::vector<Amplitude> entries;
    entries.reserve(2 * w.size());
    const int top = scale * (int(w.size()) - 1);
    for (std::size_t n = 0; n < w.size(); ++n) {
        if (w[n] <= 0.0) {
            continue;
        }
        const int total = scale * int(n);
        if (total == 0) {
            entries.push_back({FockKey{0, 0}, cplx{std::sqrt(w[n]), 0.0}});
        } else {
            const double a = std::sqrt(0.5 * w[n]);
            entries.push_back({FockKey{total, 0}, cplx{a, 0.0}});
            entries.push_back({FockKey{0, total}, cplx{a, 0.0}});
        }
    }
    return TwoModeState::from_entries(std::move(entries), top);
}

inline TwoModeState dual_fock_superposition(const std::vector<double> &w) {
    std::vector<Amplitude> entries;
    entries.reserve(w.size());
    for (std::size_t n = 0; n < w.size(); ++n) {
        if (w[n] > 0.0) {
            entries.push_back({FockKey{int(n), int(n)}, cplx{std::sqrt(w[n]), 0.0}});
        }
    }
    return TwoModeState::from_entries(std::move(entries), 2 * (int(w.size()) - 1));
}

inline std::vector<std::pair<int, double>> scaled_weights(const std::vector<double> &w, int scale) {
    std::vector<std::pair<int, double>> out;
    for (std::size_t n = 0; n < w.size(); ++n) {
        if (w[n] > 0.0) {
            out.emplace_back(scale * int(n), w[n]);
        }
    }
    return out;
}

/// sum_n w_n f(n) / sum_n w_n.
template <typename F>
double retained_average(const std::vector<double> &w, F f) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t n = w.size(); n-- > 0;) {
        num += w[n] * f(double(n));
        den += w[n];
    }
    return num / den;
}

}  // namespace detail

/// (1/sqrt(zeta(x))) sum_{N=1}^{K} N^{-x/2} NOON(N), renormalized on N <= K.
inline FamilyState zeta_noon(double x, int cutoff) {
    detail::check_power_law(x, cutoff);
    auto [w, tail] = detail::power_law_weights(x, cutoff);
    FamilyState out;
    out.family = "zeta_noon";
    out.state = detail::noon_superposition(w, 1);
    out.distribution = PhotonDistribution(detail::scaled_weights(w, 1), tail,
                                          detail::power_law_moments(x, 1.0, cutoff));
    out.pipeline = Pipeline::MMZI;
    out.qfi = out.distribution.second_moment();
    return out;
}

/// Same weights as zeta_noon on NOON(2N) components; the photon-number
/// distribution matches zeta_dual_fock.
inline FamilyState zeta_noon_doubled(double x, int cutoff) {
    detail::check_power_law(x, cutoff);
    auto [w, tail] = detail::power_law_weights(x, cutoff);
    FamilyState out;
    out.family = "zeta_noon_doubled";
    out.state = detail::noon_superposition(w, 2);
    out.distribution = PhotonDistribution(detail::scaled_weights(w, 2), tail,
                                          detail::power_law_moments(x, 2.0, cutoff));
    out.pipeline = Pipeline::MMZI;
    out.qfi = out.distribution.second_moment();
    return out;
}

/// sum_{N=1}^{K} |N,N> / sqrt(zeta(x) N^x), renormalized; an MZI input.
/// The QFI after the first splitter is sum_N P(N) (2N^2 + 2N).
inline FamilyState zeta_dual_fock(double x, int cutoff) {
    detail::check_power_law(x, cutoff);
    auto [w, tail] = detail::power_law_weights(x, cutoff);
    FamilyState out;
    out.family = "zeta_dual_fock";
    out.state = detail::dual_fock_superposition(w);
    out.distribution = PhotonDistribution(detail::scaled_weights(w, 2), tail,
                                          detail::power_law_moments(x, 2.0, cutoff));
    out.pipeline = Pipeline::MZI;
    out.qfi.value = detail::retained_average(w, [](double n) { return 2 * n * n + 2 * n; });
    if (x > 3.0) {
        const double zx = zeta(x);
        out.qfi.limit = 2 * zeta_extended(x - 2.0) / zx + 2 * zeta_extended(x - 1.0) / zx;
    } else {
        out.qfi.divergent = true;
        auto second = detail::power_law_trend(x, 2, 1.0, cutoff);
        auto first = detail::power_law_trend(x, 1, 1.0, cutoff);
        for (std::size_t i = 0; i < second.size(); ++i) {
            out.qfi.trend.emplace_back(second[i].first, 2 * second[i].second + 2 * first[i].second);
        }
    }
    return out;
}

/// Geometric ratio t = 1 / (1 + 2 / mean_total) of the TMSV pair distribution.
inline double tmsv_ratio(double mean_total) { return 1.0 / (1.0 + 2.0 / mean_total); }

/// Smallest pair cutoff K with discarded mass t^{K+1} below `max_tail`.
inline int tmsv_cutoff_for_tail(double mean_total, double max_tail) {
    if (!(mean_total > 0.0) || !(max_tail > 0.0) || !(max_tail < 1.0)) {
        throw ValidationError("tmsv needs mean_total > 0 and a tail bound in (0, 1)");
    }
    const double t = tmsv_ratio(mean_total);
    int cutoff = std::max(0, int(std::ceil(std::log(max_tail) / std::log(t))) - 1);
    while (std::pow(t, cutoff + 1) > max_tail) {
        ++cutoff;
    }
    return cutoff;
}

namespace detail {

inline std::pair<std::vector<double>, double> geometric_weights(double mean_total, int cutoff,
                                                                double max_tail) {
    if (!(mean_total > 0.0) || !std::isfinite(mean_total)) {
        throw ValidationError("tmsv mean_total must be positive and finite");
    }
    if (cutoff < 0) {
        throw CutoffViolation("tmsv cutoff must be nonnegative");
    }
    const double t = tmsv_ratio(mean_total);
    const double tail = std::pow(t, cutoff + 1);
    if (tail > max_tail) {
        throw TailTooHeavy("tmsv tail mass " + std::to_string(tail) + " exceeds bound " +
                           std::to_string(max_tail) + " at cutoff " + std::to_string(cutoff) +
                           "; need cutoff >= " + std::to_string(tmsv_cutoff_for_tail(mean_total, max_tail)));
    }
    std::vector<double> w(cutoff + 1);
    double p = 1.0 - t;
    for (int n = 0; n <= cutoff; ++n) {
        w[n] = p;
        p *= t;
    }
    return {std::move(w), tail};
}

}  // namespace detail

/// Two-mode squeezed vacuum sum_N sqrt((1 - t) t^N) |N,N>, N <= cutoff; an MZI input.
inline FamilyState tmsv(double mean_total, int cutoff, double max_tail = 1e-10) {
    auto [w, tail] = detail::geometric_weights(mean_total, cutoff, max_tail);
    const double m = mean_total;
    FamilyMoments moments;
    moments.mean_limit = m;
    moments.second_limit = 2 * m * m + 2 * m;
    FamilyState out;
    out.family = "tmsv";
    out.state = detail::dual_fock_superposition(w);
    out.distribution = PhotonDistribution(detail::scaled_weights(w, 2), tail, moments);
    out.pipeline = Pipeline::MZI;
    out.qfi.value = detail::retained_average(w, [](double n) { return 2 * n * n + 2 * n; });
    out.qfi.limit = m * m + 2 * m;
    return out;
}

/// NOON(2N) components with the TMSV weights (1 - t) t^N; N = 0 is the vacuum.
inline FamilyState tmsv_noon(double mean_total, int cutoff, double max_tail = 1e-10) {
    auto [w, tail] = detail::geometric_weights(mean_total, cutoff, max_tail);
    const double m = mean_total;
    FamilyMoments moments;
    moments.mean_limit = m;
    moments.second_limit = 2 * m * m + 2 * m;
    FamilyState out;
    out.family = "tmsv_noon";
    out.state = detail::noon_superposition(w, 2);
    out.distribution = PhotonDistribution(detail::scaled_weights(w, 2), tail, moments);
    out.pipeline = Pipeline::MMZI;
    out.qfi = out.distribution.second_moment();
    return out;
}

inline FamilyState single_component(std::string family, TwoModeState state, Pipeline pipeline,
                                    double qfi) {
    FamilyState out;
    out.family = std::move(family);
    out.distribution = PhotonDistribution::of_state(state);
    out.state = std::move(state);
    out.pipeline = pipeline;
    out.qfi.value = qfi;
    out.qfi.limit = qfi;
    return out;
}

// ---------------------------------------------------------------------------
// Catalog addressing: catalog:<family>:<param>[:<param>]

struct FamilyInfo {
    std::string name;
    std::string params;
    std::string domain;
    std::string pipeline;
    std::string description;
};

inline std::vector<FamilyInfo> catalog_families() {
    return {
        {"noon", "N", "N >= 1", "MMZI", "(|N,0> + |0,N>)/sqrt2"},
        {"dual_fock", "N", "N >= 0", "MZI", "|N,N>"},
        {"dual_fock_bs", "N", "N >= 1", "MMZI", "closed form of B|N,N> (intermediate state)"},
        {"zeta_noon", "x:K", "x > 1, K >= 1", "MMZI", "NOON(N) weighted N^-x / zeta(x), N = 1..K"},
        {"zeta_noon_doubled", "x:K", "x > 1, K >= 1", "MMZI", "NOON(2N) weighted N^-x / zeta(x), N = 1..K"},
        {"zeta_dual_fock", "x:K", "x > 1, K >= 1", "MZI", "|N,N> weighted N^-x / zeta(x), N = 1..K"},
        {"tmsv", "mean[:K]", "mean > 0, K >= 0", "MZI", "two-mode squeezed vacuum, pairs N = 0..K"},
        {"tmsv_noon", "mean[:K]", "mean > 0, K >= 0", "MMZI", "NOON(2N) with TMSV weights, N = 0..K"},
    };
}

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.emplace_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline int parse_int(const std::string &s) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception &) {
        throw ValidationError("expected an integer, got '" + s + "'");
    }
    if (used != s.size()) {
        throw ValidationError("expected an integer, got '" + s + "'");
    }
    return v;
}

inline double parse_real(const std::string &s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        throw ValidationError("expected a number, got '" + s + "'");
    }
    if (used != s.size()) {
        throw ValidationError("expected a number, got '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline bool is_catalog_uri(std::string_view text) { return text.starts_with("catalog:"); }

/// Builds a catalog state from `catalog:<family>:<params>`. The optional TMSV
/// cutoff defaults to the smallest one with tail mass below `max_tail`.
inline FamilyState parse_catalog(std::string_view uri, double max_tail = 1e-10) {
    if (!is_catalog_uri(uri)) {
        throw ValidationError("catalog address must start with 'catalog:'");
    }
    const auto parts = detail::split(uri.substr(8), ':');
    const std::string &family = parts[0];
    const std::size_t nparams = parts.size() - 1;
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (nparams < lo || nparams > hi) {
            throw ValidationError("wrong number of parameters for catalog family '" + family + "'");
        }
    };
    if (family == "noon") {
        need(1, 1);
        const int n = detail::parse_int(parts[1]);
        return single_component("noon", noon(n), Pipeline::MMZI, double(n) * n);
    }
    if (family == "dual_fock") {
        need(1, 1);
        const int n = detail::parse_int(parts[1]);
        return single_component("dual_fock", dual_fock(n), Pipeline::MZI, 2.0 * n * n + 2.0 * n);
    }
    if (family == "dual_fock_bs") {
        need(1, 1);
        const int n = detail::parse_int(parts[1]);
        return single_component("dual_fock_bs", dual_fock_after_bs_closed_form(n), Pipeline::MMZI,
                                2.0 * n * n + 2.0 * n);
    }
    if (family == "zeta_noon" || family == "zeta_noon_doubled" || family == "zeta_dual_fock") {
        need(2, 2);
        const double x = detail::parse_real(parts[1]);
        const int k = detail::parse_int(parts[2]);
        if (family == "zeta_noon") {
            return zeta_noon(x, k);
        }
        if (family == "zeta_noon_doubled") {
            return zeta_noon_doubled(x, k);
        }
        return zeta_dual_fock(x, k);
    }
    if (family == "tmsv" || family == "tmsv_noon") {
        need(1, 2);
        const double m = detail::parse_real(parts[1]);
        const int k = nparams == 2 ? detail::parse_int(parts[2]) : tmsv_cutoff_for_tail(m, max_tail);
        return family == "tmsv" ? tmsv(m, k, max_tail) : tmsv_noon(m, k, max_tail);
    }
    throw ValidationError("unknown catalog family '" + family + "'");
}

}  // namespace qfilab

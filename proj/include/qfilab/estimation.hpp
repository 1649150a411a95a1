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

// Seeded sampling of counting outcomes and maximum-likelihood phase
// estimation on a local window.
//
// Random numbers come from SplitMix64 (Steele, Lea, Flood 2014). Each
// repetition draws from its own substream seeded by mixing (seed, stream
// index, repetition), so results do not depend on how repetitions are
// scheduled across threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfilab/errors.hpp"
#include "qfilab/fisher.hpp"
#include "qfilab/fock.hpp"
#include "qfilab/parallel.hpp"

namespace qfilab {

inline constexpr const char *kRngAlgorithm = "splitmix64";

class SplitMix64 {
   public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

   private:
    std::uint64_t state_;
};

/// Substream seed for (seed, stream, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    SplitMix64 a(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    SplitMix64 b(a.next() ^ (0x8CB92BA72F3D8DD7ULL * (index + 1)));
    return b.next();
}

/// Outcome counts keyed by (N, Delta).
using OutcomeHistogram = std::map<CountingOutcome, std::int64_t>;

inline std::int64_t histogram_total(const OutcomeHistogram &h) {
    std::int64_t n = 0;
    for (const auto &[o, c] : h) {
        n += c;
    }
    return n;
}

/// Outcome probabilities of a fixed state and pipeline as a function of phi,
/// with the encoded state and outcome order computed once.
class LikelihoodModel {
   public:
    LikelihoodModel(const TwoModeState &state, Pipeline pipeline)
        : encoded_(encoded_state(state, pipeline)), pipeline_(pipeline) {
        warm_beamsplitter(encoded_);
        for (int total : encoded_.occupied_sectors()) {
            for (int i = 0; i <= total; ++i) {
                outcomes_.push_back(CountingOutcome::total_difference(total, 2 * i - total));
            }
        }
    }

    /// Outcomes in (N, Delta) order; probabilities() uses the same order.
    const std::vector<CountingOutcome> &outcomes() const { return outcomes_; }
    Pipeline pipeline() const { return pipeline_; }
    const TwoModeState &encoded() const { return encoded_; }

    std::vector<double> probabilities(double phi) const {
        const auto terms = detail::output_terms(encoded_, phi, true);
        std::vector<double> p(terms.size());
        for (std::size_t k = 0; k < terms.size(); ++k) {
            p[k] = std::norm(terms[k].amplitude);
        }
        return p;
    }

    std::optional<std::size_t> index_of(const CountingOutcome &o) const {
        const auto target = o.relabeled(Labeling::TotalDifference);
        auto it = std::lower_bound(outcomes_.begin(), outcomes_.end(), target);
        if (it == outcomes_.end() || !(*it == target)) {
            return std::nullopt;
        }
        return std::size_t(it - outcomes_.begin());
    }

    /// Smallest period of every outcome probability in phi: 2 pi / g with g
    /// the gcd of n_a differences inside each occupied sector. Infinite when
    /// no sector has two components (the likelihood is constant).
    double fundamental_period() const {
        int g = 0;
        for (int total : encoded_.occupied_sectors()) {
            const auto entries = encoded_.sector(total);
            for (const auto &e : entries) {
                g = std::gcd(g, e.key.na - entries.front().key.na);
            }
        }
        return g == 0 ? std::numeric_limits<double>::infinity() : 2.0 * std::numbers::pi / g;
    }

   private:
    TwoModeState encoded_;
    Pipeline pipeline_;
    std::vector<CountingOutcome> outcomes_;
};

/// M i.i.d. draws from the likelihood at phi_true, by inverse CDF.
inline OutcomeHistogram sample_outcomes(const LikelihoodModel &model, double phi_true, std::int64_t trials,
                                        std::uint64_t seed) {
    if (trials < 1) {
        throw ValidationError("sample_outcomes needs M >= 1");
    }
    const auto p = model.probabilities(phi_true);
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    const double total = cdf.back();
    std::vector<std::int64_t> counts(p.size(), 0);
    SplitMix64 rng(seed);
    for (std::int64_t t = 0; t < trials; ++t) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t k = std::min<std::size_t>(it - cdf.begin(), p.size() - 1);
        // Never land on a zero-probability outcome through rounding.
        while (p[k] == 0.0 && k > 0) {
            --k;
        }
        ++counts[k];
    }
    OutcomeHistogram h;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] > 0) {
            h[model.outcomes()[k]] = counts[k];
        }
    }
    return h;
}

inline OutcomeHistogram sample_outcomes(const TwoModeState &state, double phi_true, Pipeline pipeline,
                                        std::int64_t trials, std::uint64_t seed) {
    return sample_outcomes(LikelihoodModel(state, pipeline), phi_true, trials, seed);
}

struct Window {
    double lo;
    double hi;
    double width() const { return hi - lo; }
    bool contains(double phi) const { return phi >= lo && phi <= hi; }
};

struct MleOptions {
    int grid_points = 10000;
    double tolerance = 1e-10;
};

/// Log-likelihood maximization over a window: coarse grid, then
/// golden-section refinement around the best grid node. The grid table of
/// log-probabilities is built once and reused for every histogram.
class MleEngine {
   public:
    MleEngine(const LikelihoodModel &model, Window window, MleOptions options = {})
        : model_(model), window_(window), options_(options) {
        if (!(window.lo < window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi)) {
            throw ValidationError("MLE window needs finite lo < hi");
        }
        if (options.grid_points < 3) {
            throw ValidationError("MLE grid needs at least 3 points");
        }
        const double period = model.fundamental_period();
        if (window.width() > period * (1 + 1e-12)) {
            throw ValidationError("MLE window width " + std::to_string(window.width()) +
                                  " exceeds the likelihood period " + std::to_string(period));
        }
        grid_ = phase_grid(window.lo, window.hi, options.grid_points);
        log_p_.resize(grid_.size());
        parallel_for(grid_.size(), [&](std::size_t g) { log_p_[g] = log_probabilities(grid_[g]); });
    }

    const Window &window() const { return window_; }

    double estimate(const OutcomeHistogram &histogram) const {
        std::vector<std::pair<std::size_t, double>> counts;
        for (const auto &[outcome, c] : histogram) {
            if (c <= 0) {
                continue;
            }
            const auto k = model_.index_of(outcome);
            if (!k) {
                throw ValidationError("outcome outside the occupied sectors of the state");
            }
            counts.emplace_back(*k, double(c));
        }
        if (counts.empty()) {
            throw DegenerateLikelihood("no outcomes to estimate from");
        }
        auto grid_value = [&](std::size_t g) {
            double sum = 0.0;
            for (const auto &[k, c] : counts) {
                sum += c * log_p_[g][k];
            }
            return sum;
        };
        std::size_t best = 0;
        double best_value = grid_value(0);
        double worst_value = best_value;
        for (std::size_t g = 1; g < grid_.size(); ++g) {
            const double v = grid_value(g);
            if (v > best_value) {
                best = g;
                best_value = v;
            }
            worst_value = std::min(worst_value, v);
        }
        if (!std::isfinite(best_value) ||
            best_value - worst_value <= 1e-12 * std::max(1.0, std::abs(best_value))) {
            throw DegenerateLikelihood("log-likelihood is constant over the window");
        }
        auto value_at = [&](double phi) {
            const auto lp = log_probabilities(phi);
            double sum = 0.0;
            for (const auto &[k, c] : counts) {
                sum += c * lp[k];
            }
            return sum;
        };
        double a = grid_[best == 0 ? 0 : best - 1];
        double b = grid_[std::min(best + 1, grid_.size() - 1)];
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = value_at(c);
        double fd = value_at(d);
        while (b - a > options_.tolerance) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = value_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = value_at(d);
            }
        }
        const double refined = std::clamp(0.5 * (a + b), window_.lo, window_.hi);
        return value_at(refined) >= best_value ? refined : grid_[best];
    }

   private:
    std::vector<double> log_probabilities(double phi) const {
        auto p = model_.probabilities(phi);
        for (auto &v : p) {
            v = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        }
        return p;
    }

    const LikelihoodModel &model_;
    Window window_;
    MleOptions options_;
    std::vector<double> grid_;
    std::vector<std::vector<double>> log_p_;
};

inline double mle_phase(const OutcomeHistogram &histogram, const TwoModeState &state, Pipeline pipeline,
                        Window window, MleOptions options = {}) {
    if (histogram_total(histogram) == 0) {
        throw DegenerateLikelihood("no outcomes to estimate from");
    }
    const LikelihoodModel model(state, pipeline);
    return MleEngine(model, window, options).estimate(histogram);
}

/// Default local window: the interval between the nearest phases on either
/// side of phi_true where every outcome probability is stationary. Across such
/// a point the likelihood folds back on itself and the phase is not
/// identifiable. States without common stationary points get
/// phi_true +/- period/4.
inline Window default_window(const LikelihoodModel &model, double phi_true) {
    const double period = model.fundamental_period();
    if (!std::isfinite(period)) {
        throw DegenerateLikelihood("likelihood does not depend on phi for this state");
    }
    auto slope = [&](double phi) {
        double g = 0.0;
        for (const auto &t : detail::output_terms(model.encoded(), phi, true)) {
            g += std::abs(2.0 * std::real(std::conj(t.amplitude) * t.derivative));
        }
        return g;
    };
    constexpr int kSamples = 2048;
    const double lo = phi_true - 0.5 * period;
    const double step = period / kSamples;
    std::vector<double> g(kSamples + 1);
    for (int i = 0; i <= kSamples; ++i) {
        g[i] = slope(lo + i * step);
    }
    const double scale = *std::max_element(g.begin(), g.end());
    // Refine a bracketed minimum of the slope; accept it if it reaches zero.
    auto stationary_near = [&](int i) -> std::optional<double> {
        double a = lo + (i - 1) * step;
        double b = lo + (i + 1) * step;
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        while (b - a > 1e-13 * std::max(1.0, std::abs(a))) {
            const double c = b - r * (b - a);
            const double d = a + r * (b - a);
            if (slope(c) <= slope(d)) {
                b = d;
            } else {
                a = c;
            }
        }
        const double phi = 0.5 * (a + b);
        if (slope(phi) <= 1e-7 * scale) {
            return phi;
        }
        return std::nullopt;
    };
    const int centre = kSamples / 2;
    std::optional<double> left;
    std::optional<double> right;
    for (int i = centre; i >= 1 && !left; --i) {
        if (g[i] <= g[i - 1] && g[i] <= g[i + 1] && g[i] < 1e-2 * scale) {
            if (auto s = stationary_near(i); s && *s < phi_true) {
                left = s;
            }
        }
    }
    for (int i = centre; i < kSamples && !right; ++i) {
        if (g[i] <= g[i - 1] && g[i] <= g[i + 1] && g[i] < 1e-2 * scale) {
            if (auto s = stationary_near(i); s && *s > phi_true) {
                right = s;
            }
        }
    }
    if (left && right) {
        return {*left, *right};
    }
    return {phi_true - 0.25 * period, phi_true + 0.25 * period};
}

struct EstimationRun {
    double phi_true = 0.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::int64_t repetition = 0;
    std::uint64_t substream_seed = 0;
    Window window{0.0, 0.0};
    double period = 0.0;
    OutcomeHistogram outcomes;
    double phi_hat = 0.0;
    double squared_error = 0.0;
    /// 1 / (M * FI(phi_true)), in radians^2.
    double crb = 0.0;
};

inline nlohmann::ordered_json run_to_json(const EstimationRun &r) {
    nlohmann::ordered_json j;
    j["kind"] = "run";
    j["phi_true"] = r.phi_true;
    j["M"] = r.trials;
    j["seed"] = r.seed;
    j["repetition"] = r.repetition;
    j["rng"] = kRngAlgorithm;
    j["substream_seed"] = r.substream_seed;
    j["window"] = {r.window.lo, r.window.hi};
    if (std::isfinite(r.period)) {
        j["likelihood_period"] = r.period;
    }
    nlohmann::ordered_json outcomes = nlohmann::ordered_json::array();
    for (const auto &[o, c] : r.outcomes) {
        outcomes.push_back({{"N", o.first}, {"delta", o.second}, {"count", c}});
    }
    j["outcomes"] = std::move(outcomes);
    j["phi_hat"] = r.phi_hat;
    j["squared_error"] = r.squared_error;
    j["crb_M"] = r.crb;
    return j;
}

struct EstimationSummary {
    std::int64_t trials = 0;
    std::int64_t repetitions = 0;
    double fi = 0.0;
    double empirical_mse = 0.0;
    double crb = 0.0;
    double ratio = 0.0;
    double rmse() const { return std::sqrt(empirical_mse); }
};

inline nlohmann::ordered_json summary_to_json(const EstimationSummary &s) {
    nlohmann::ordered_json j;
    j["kind"] = "summary";
    j["M"] = s.trials;
    j["repetitions"] = s.repetitions;
    j["fi"] = s.fi;
    j["empirical_mse"] = s.empirical_mse;
    j["rmse"] = s.rmse();
    j["crb_M"] = s.crb;
    j["ratio"] = s.ratio;
    return j;
}

struct EstimationRequest {
    double phi_true = 0.0;
    std::int64_t trials = 1;
    std::int64_t repetitions = 1;
    std::uint64_t seed = 0;
    /// Defaults to default_window(model, phi_true).
    std::optional<Window> window{};
    MleOptions mle{};
    /// Substream family; distinct values give independent experiments.
    std::uint64_t stream = 0;
};

struct EstimationResult {
    std::vector<EstimationRun> runs;
    EstimationSummary summary;
};

/// Repeated sampling + MLE. FI at phi_true must be positive.
inline EstimationResult estimate_phase(const LikelihoodModel &model, const EstimationRequest &req) {
    if (req.trials < 1 || req.repetitions < 1) {
        throw ValidationError("estimation needs M >= 1 and at least one repetition");
    }
    const Window window = req.window.value_or(default_window(model, req.phi_true));
    if (!window.contains(req.phi_true)) {
        throw ValidationError("phi_true lies outside the estimation window");
    }
    const double fi = classical_fi(model.encoded(), req.phi_true, Pipeline::MMZI).fi;
    if (!(fi > 1e-12)) {
        throw DegenerateLikelihood("Fisher information vanishes at phi_true");
    }
    const MleEngine engine(model, window, req.mle);
    EstimationResult result;
    result.runs.resize(std::size_t(req.repetitions));
    parallel_for(result.runs.size(), [&](std::size_t r) {
        EstimationRun &run = result.runs[r];
        run.phi_true = req.phi_true;
        run.trials = req.trials;
        run.seed = req.seed;
        run.repetition = std::int64_t(r);
        run.substream_seed = derive_seed(req.seed, req.stream, r);
        run.window = window;
        run.period = model.fundamental_period();
        run.outcomes = sample_outcomes(model, req.phi_true, req.trials, run.substream_seed);
        run.phi_hat = engine.estimate(run.outcomes);
        run.squared_error = (run.phi_hat - req.phi_true) * (run.phi_hat - req.phi_true);
        run.crb = 1.0 / (double(req.trials) * fi);
    });
    auto &s = result.summary;
    s.trials = req.trials;
    s.repetitions = req.repetitions;
    s.fi = fi;
    for (const auto &run : result.runs) {
        s.empirical_mse += run.squared_error;
    }
    s.empirical_mse /= double(req.repetitions);
    s.crb = 1.0 / (double(req.trials) * fi);
    s.ratio = s.empirical_mse / s.crb;
    return result;
}

struct ConvergenceRow {
    std::int64_t trials = 0;
    double empirical_mse = 0.0;
    double crb = 0.0;
    std::optional<double> ratio;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    /// phi_true sits at a point with vanishing FI; ratios are not reported.
    bool degenerate = false;
    double fi = 0.0;
    Window window{0.0, 0.0};
};

/// empirical MSE / CRB per trial count M. Each M uses its own substream family.
inline ConvergenceStudy crb_convergence_study(const TwoModeState &state, double phi_true, Pipeline pipeline,
                                              const std::vector<std::int64_t> &trial_counts,
                                              std::int64_t repetitions, std::uint64_t seed,
                                              std::optional<Window> window = std::nullopt,
                                              MleOptions mle = {}) {
    for (auto m : trial_counts) {
        if (m < 10) {
            throw ValidationError("convergence study needs M >= 10");
        }
    }
    const LikelihoodModel model(state, pipeline);
    ConvergenceStudy study;
    study.fi = classical_fi(model.encoded(), phi_true, Pipeline::MMZI).fi;
    study.window = window.value_or(default_window(model, phi_true));
    if (!(study.fi > 1e-12)) {
        study.degenerate = true;
        for (auto m : trial_counts) {
            study.rows.push_back({m, 0.0, 0.0, std::nullopt});
        }
        return study;
    }
    for (std::size_t i = 0; i < trial_counts.size(); ++i) {
        EstimationRequest req;
        req.phi_true = phi_true;
        req.trials = trial_counts[i];
        req.repetitions = repetitions;
        req.seed = seed;
        req.window = study.window;
        req.mle = mle;
        req.stream = i;
        const auto result = estimate_phase(model, req);
        study.rows.push_back(
            {req.trials, result.summary.empirical_mse, result.summary.crb, result.summary.ratio});
    }
    return study;
}

}  // namespace qfilab

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

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"
#include "qfilab/catalog.hpp"
#include "qfilab/estimation.hpp"

namespace qfilab {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(SplitMix64, KnownSequence) {
    // Reference values from the published algorithm with seed 1234567.
    SplitMix64 rng(1234567);
    EXPECT_EQ(rng.next(), 6457827717110365317ULL);
    EXPECT_EQ(rng.next(), 3203168211198807973ULL);
    EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(7, 0, 0), derive_seed(7, 0, 1));
    EXPECT_NE(derive_seed(7, 0, 0), derive_seed(7, 1, 0));
    EXPECT_NE(derive_seed(7, 0, 0), derive_seed(8, 0, 0));
    EXPECT_EQ(derive_seed(7, 3, 5), derive_seed(7, 3, 5));
}

TEST(Sampling, RejectsZeroTrials) {
    EXPECT_THROW(sample_outcomes(noon(1), 0.3, Pipeline::MMZI, 0, 1), ValidationError);
}

TEST(Sampling, DeterministicOutcomeAtHalfPi) {
    // noon(1) = |1,0>; at phi = pi/2 every photon exits through port b.
    const auto h = sample_outcomes(noon(1), kPi / 2, Pipeline::MMZI, 5000, 42);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h.begin()->first.key(), (FockKey{0, 1}));
    EXPECT_EQ(h.begin()->second, 5000);
}

TEST(Sampling, MultinomialWithinThreeSigma) {
    const auto s = parse_catalog("catalog:dual_fock:2").state;
    const LikelihoodModel model(s, Pipeline::MZI);
    const double phi = 0.7;
    const std::int64_t m = 100000;
    const auto p = model.probabilities(phi);
    const auto h = sample_outcomes(model, phi, m, 99);
    EXPECT_EQ(histogram_total(h), m);
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto it = h.find(model.outcomes()[k]);
        const double count = it == h.end() ? 0.0 : double(it->second);
        const double sigma = std::sqrt(m * p[k] * (1 - p[k]));
        EXPECT_LE(std::abs(count - m * p[k]), 3 * sigma + 1e-9) << k;
    }
}

TEST(Sampling, SameSeedSameHistogram) {
    const auto s = noon(3);
    EXPECT_EQ(sample_outcomes(s, 0.2, Pipeline::MMZI, 1000, 5), sample_outcomes(s, 0.2, Pipeline::MMZI, 1000, 5));
    EXPECT_NE(sample_outcomes(s, 0.2, Pipeline::MMZI, 1000, 5), sample_outcomes(s, 0.2, Pipeline::MMZI, 1000, 6));
}

TEST(Likelihood, ModelMatchesLikelihoodFunction) {
    const auto s = parse_catalog("catalog:tmsv:0.5:30").state;
    const LikelihoodModel model(s, Pipeline::MZI);
    const auto p = model.probabilities(0.4);
    const auto ref = likelihood(s, 0.4, Pipeline::MZI, Labeling::TotalDifference);
    ASSERT_EQ(p.size(), ref.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        EXPECT_EQ(model.outcomes()[k], ref[k].outcome);
        EXPECT_NEAR(p[k], ref[k].probability, 1e-14);
    }
}

TEST(Likelihood, FundamentalPeriod) {
    EXPECT_NEAR(LikelihoodModel(noon(1), Pipeline::MMZI).fundamental_period(), 2 * kPi, 1e-15);
    EXPECT_NEAR(LikelihoodModel(noon(4), Pipeline::MMZI).fundamental_period(), kPi / 2, 1e-15);
    // A single Fock component per sector gives a phase-independent likelihood.
    EXPECT_TRUE(std::isinf(LikelihoodModel(dual_fock(2), Pipeline::MMZI).fundamental_period()));
}

TEST(Likelihood, DefaultWindowExcludesMirrorImages) {
    // Inside the window distinct phases give distinct outcome distributions.
    for (int n : {1, 2, 3}) {
        const LikelihoodModel model(noon(n), Pipeline::MMZI);
        const double phi = 0.2 / n;
        const auto w = default_window(model, phi);
        EXPECT_TRUE(w.contains(phi));
        EXPECT_NEAR(w.width(), model.fundamental_period() / 2, 1e-9) << n;
        const auto p0 = model.probabilities(phi);
        for (const double other : phase_grid(w.lo, w.hi, 301)) {
            if (std::abs(other - phi) < 1e-3) {
                continue;
            }
            const auto p1 = model.probabilities(other);
            double diff = 0.0;
            for (std::size_t k = 0; k < p0.size(); ++k) {
                diff += std::abs(p0[k] - p1[k]);
            }
            EXPECT_GT(diff, 1e-8) << n << " " << other;
        }
    }
}

TEST(Mle, AllPortBOutcomesGiveHalfPi) {
    OutcomeHistogram h;
    h[CountingOutcome::total_difference(1, 1)] = 1000;
    const double est = mle_phase(h, noon(1), Pipeline::MMZI, {0.0, kPi});
    // The log-likelihood is flat to second order at the peak: ~sqrt(eps) resolution.
    EXPECT_NEAR(est, kPi / 2, 1e-7);
}

TEST(Mle, EmptyHistogramIsDegenerate) {
    EXPECT_THROW(mle_phase({}, noon(1), Pipeline::MMZI, {0.0, kPi}), DegenerateLikelihood);
}

TEST(Mle, ConstantLikelihoodIsDegenerate) {
    OutcomeHistogram h;
    h[CountingOutcome::total_difference(0, 0)] = 10;
    const auto vac = make_state({{0, 0, 1.0}}, 0);
    EXPECT_THROW(mle_phase(h, vac, Pipeline::MMZI, {0.0, 1.0}), DegenerateLikelihood);
}

TEST(Mle, RejectsWindowWiderThanPeriod) {
    OutcomeHistogram h;
    h[CountingOutcome::total_difference(2, 0)] = 10;
    EXPECT_THROW(mle_phase(h, noon(2), Pipeline::MMZI, {0.0, 1.01 * kPi}), ValidationError);
    EXPECT_THROW(mle_phase(h, noon(2), Pipeline::MMZI, {1.0, 1.0}), ValidationError);
}

TEST(Mle, RejectsImpossibleOutcome) {
    OutcomeHistogram h;
    h[CountingOutcome::total_difference(4, 0)] = 1;
    EXPECT_THROW(mle_phase(h, noon(2), Pipeline::MMZI, {0.0, 1.0}), ValidationError);
}

TEST(Mle, EstimatesStayInsideWindow) {
    const auto s = noon(2);
    const LikelihoodModel model(s, Pipeline::MMZI);
    const Window w{0.1, 0.5};
    const MleEngine engine(model, w);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double est = engine.estimate(sample_outcomes(model, 0.12, 50, seed));
        EXPECT_GE(est, w.lo);
        EXPECT_LE(est, w.hi);
    }
}

TEST(Mle, RefinementBeatsGrid) {
    // Exact probabilities as counts: the maximizer is phi_true itself.
    const auto s = noon(2);
    const LikelihoodModel model(s, Pipeline::MMZI);
    const double phi = 0.41234567;
    const auto p = model.probabilities(phi);
    OutcomeHistogram h;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] > 0) {
            h[model.outcomes()[k]] = std::llround(p[k] * 1e12);
        }
    }
    const double est = MleEngine(model, {0.1, 0.7}, {.grid_points = 101}).estimate(h);
    EXPECT_NEAR(est, phi, 1e-6);
}

TEST(Estimation, ReproducibleAcrossThreadCounts) {
    const LikelihoodModel model(noon(1), Pipeline::MMZI);
    EstimationRequest req{.phi_true = 0.3, .trials = 500, .repetitions = 16, .seed = 11};
    setenv("QFILAB_THREADS", "1", 1);
    const auto a = estimate_phase(model, req);
    setenv("QFILAB_THREADS", "4", 1);
    const auto b = estimate_phase(model, req);
    unsetenv("QFILAB_THREADS");
    ASSERT_EQ(a.runs.size(), b.runs.size());
    for (std::size_t r = 0; r < a.runs.size(); ++r) {
        EXPECT_EQ(run_to_json(a.runs[r]).dump(), run_to_json(b.runs[r]).dump());
    }
    EXPECT_EQ(summary_to_json(a.summary).dump(), summary_to_json(b.summary).dump());
}

TEST(Estimation, RunRecordFields) {
    const LikelihoodModel model(noon(1), Pipeline::MMZI);
    const auto res = estimate_phase(model, {.phi_true = 0.3, .trials = 100, .repetitions = 1, .seed = 3});
    const auto j = run_to_json(res.runs[0]);
    for (const char *key : {"phi_true", "M", "seed", "rng", "substream_seed", "window", "outcomes", "phi_hat",
                            "squared_error", "crb_M"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["rng"], "splitmix64");
    EXPECT_NEAR(j["crb_M"].get<double>(), 1.0 / 100, 1e-12);
}

TEST(Estimation, RejectsPhiOutsideWindow) {
    const LikelihoodModel model(noon(1), Pipeline::MMZI);
    EstimationRequest req{.phi_true = 2.0, .trials = 10, .repetitions = 1, .seed = 1};
    req.window = Window{0.0, 1.0};
    EXPECT_THROW(estimate_phase(model, req), ValidationError);
}

TEST(Convergence, Noon1ApproachesCrb) {
    const auto study = crb_convergence_study(noon(1), 0.3, Pipeline::MMZI, {1000, 10000}, 200, 2024);
    ASSERT_FALSE(study.degenerate);
    EXPECT_NEAR(study.fi, 1.0, 1e-12);
    for (const auto &row : study.rows) {
        ASSERT_TRUE(row.ratio);
        EXPECT_GE(*row.ratio, 0.9) << row.trials;
        EXPECT_LE(*row.ratio, 1.5) << row.trials;
    }
}

TEST(Convergence, Noon2OnHalfPeriodWindow) {
    const auto s = noon(2);
    const LikelihoodModel model(s, Pipeline::MMZI);
    const double phi = 0.4;
    const auto w = default_window(model, phi);
    EXPECT_NEAR(w.lo, 0.0, 1e-9);
    EXPECT_NEAR(w.hi, kPi / 2, 1e-9);
    const auto study = crb_convergence_study(s, phi, Pipeline::MMZI, {2000}, 200, 77);
    EXPECT_NEAR(study.fi, 4.0, 1e-9);
    ASSERT_TRUE(study.rows[0].ratio);
    EXPECT_GE(*study.rows[0].ratio, 0.8);
    EXPECT_LE(*study.rows[0].ratio, 1.3);
}

TEST(Convergence, RmseFallsWithTrials) {
    const auto s = parse_catalog("catalog:dual_fock:1").state;
    const auto study = crb_convergence_study(s, 0.5, Pipeline::MZI, {100, 1000, 10000}, 100, 5);
    for (std::size_t i = 1; i < study.rows.size(); ++i) {
        // Noise band: 200 repetitions keep the MSE estimate within ~30%.
        EXPECT_LT(study.rows[i].empirical_mse, 1.3 * study.rows[i - 1].empirical_mse);
        EXPECT_LT(study.rows[i].empirical_mse, 0.5 * study.rows[i - 1].empirical_mse);
    }
}

TEST(Convergence, DegeneratePointIsExcluded) {
    // noon(1) has FI = 1 everywhere, but dual_fock(1) in MZI has FI -> 0 at phi = 0.
    const auto s = parse_catalog("catalog:dual_fock:1").state;
    const auto study = crb_convergence_study(s, 0.0, Pipeline::MZI, {100}, 10, 1, Window{-0.5, 0.5});
    if (study.fi <= 1e-12) {
        EXPECT_TRUE(study.degenerate);
        EXPECT_FALSE(study.rows[0].ratio);
    } else {
        EXPECT_FALSE(study.degenerate);
    }
}

}  // namespace
}  // namespace qfilab

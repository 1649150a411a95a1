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

#include "qfilab/fisher.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "qfilab/catalog.hpp"

using namespace qfilab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<FamilyState> catalog_sample() {
    return {
        parse_catalog("catalog:noon:1"),          parse_catalog("catalog:noon:4"),
        parse_catalog("catalog:dual_fock:2"),     parse_catalog("catalog:dual_fock_bs:3"),
        parse_catalog("catalog:zeta_noon:3:12"),  parse_catalog("catalog:zeta_noon_doubled:4:6"),
        parse_catalog("catalog:zeta_dual_fock:4:6"), parse_catalog("catalog:tmsv:0.5"),
        parse_catalog("catalog:tmsv_noon:0.5"),
    };
}

}  // namespace

TEST(likelihood, noon1_closed_form) {
    for (double phi : phase_grid(-kPi, kPi, 37)) {
        const auto probs = likelihood(noon(1), phi, Pipeline::MMZI);
        ASSERT_EQ(probs.size(), 2u);
        // Sorted by (N, n_a): (0,1) then (1,0).
        EXPECT_EQ(probs[0].outcome, CountingOutcome::ports(0, 1));
        EXPECT_NEAR(probs[0].probability, (1 + std::sin(phi)) / 2, 1e-15);
        EXPECT_NEAR(probs[1].probability, (1 - std::sin(phi)) / 2, 1e-15);
        EXPECT_NEAR(probs[0].derivative, std::cos(phi) / 2, 1e-15);
    }
}

TEST(likelihood, matches_mode_expansion_oracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = oracle::random_state(rng, 8);
        const double phi = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
        for (auto pipeline : {Pipeline::MMZI, Pipeline::MZI}) {
            const auto encoded = pipeline == Pipeline::MZI ? oracle::beamsplitter_state(s) : s;
            const auto expected = oracle::output_probabilities(encoded, phi);
            double total = 0;
            for (const auto &p : likelihood(s, phi, pipeline)) {
                const auto key = p.outcome.key();
                auto it = expected.find({key.na, key.nb});
                const double e = it == expected.end() ? 0.0 : it->second;
                EXPECT_NEAR(p.probability, e, 1e-12);
                total += p.probability;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(likelihood, total_number_marginal_is_phase_independent) {
    std::mt19937_64 rng(2);
    const auto s = oracle::random_state(rng, 7);
    const auto reference = sector_decompose(s);
    for (double phi : {0.0, 0.4, 2.0}) {
        std::map<int, double> marginal;
        for (const auto &p : likelihood(s, phi, Pipeline::MMZI, Labeling::TotalDifference)) {
            marginal[p.outcome.first] += p.probability;
        }
        for (const auto &c : reference) {
            EXPECT_NEAR(marginal[c.total], c.probability, 1e-12);
        }
    }
}

TEST(likelihood, mzi_dual_fock_brute_force) {
    const auto s = dual_fock(1);
    const auto twice = oracle::beamsplitter_state(oracle::beamsplitter_state(s));
    const double expected = std::norm(twice.amplitude(1, 1));
    for (const auto &p : likelihood(s, 0.0, Pipeline::MZI)) {
        if (p.outcome == CountingOutcome::ports(1, 1)) {
            EXPECT_NEAR(p.probability, expected, 1e-14);
        }
    }
}

TEST(likelihood, derivative_matches_central_differences) {
    const double h = 1e-5;
    std::mt19937_64 rng(8);
    auto states = catalog_sample();
    for (int i = 0; i < 10; ++i) {
        FamilyState f;
        f.state = oracle::random_state(rng, 8);
        f.pipeline = i % 2 ? Pipeline::MZI : Pipeline::MMZI;
        states.push_back(f);
    }
    for (const auto &f : states) {
        for (double phi : {0.3, 1.1, 2.5}) {
            const auto centre = likelihood(f.state, phi, f.pipeline);
            const auto plus = likelihood(f.state, phi + h, f.pipeline);
            const auto minus = likelihood(f.state, phi - h, f.pipeline);
            for (std::size_t k = 0; k < centre.size(); ++k) {
                if (centre[k].probability <= 1e-8) {
                    continue;
                }
                const double fd = (plus[k].probability - minus[k].probability) / (2 * h);
                const double a = centre[k].derivative;
                EXPECT_NEAR(a, fd, 1e-6 * std::max(std::abs(a), 1e-3)) << f.family;
            }
        }
    }
}

TEST(classical_fi, noon1_is_constant_one) {
    for (double phi : phase_grid(0, 2 * kPi, 41)) {
        const auto r = classical_fi(noon(1), phi, Pipeline::MMZI);
        EXPECT_NEAR(r.fi, 1.0, 1e-12) << phi;
        EXPECT_FALSE(r.singular);
    }
    // Zero-probability outcome at phi = pi/2 takes the analytic limit.
    EXPECT_NEAR(classical_fi(noon(1), kPi / 2, Pipeline::MMZI).fi, 1.0, 1e-12);
}

TEST(classical_fi, noon_reaches_n_squared) {
    for (int n = 1; n <= 6; ++n) {
        const auto best = max_fi_on_grid(fi_scan(noon(n), Pipeline::MMZI, phase_grid(0, kPi, 181)));
        EXPECT_NEAR(best.fi, double(n) * n, 1e-9) << n;
        EXPECT_NEAR(best.qfi, double(n) * n, 1e-12);
    }
}

TEST(classical_fi, vacuum_is_zero) {
    const auto r = classical_fi(TwoModeState{}, 0.7, Pipeline::MZI);
    EXPECT_EQ(r.fi, 0.0);
    EXPECT_EQ(r.qfi, 0.0);
    EXPECT_FALSE(r.crb().has_value());
}

TEST(classical_fi, bounded_by_qfi_and_relabeling_invariant) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = oracle::random_state(rng, 8);
        for (int k = 0; k < 5; ++k) {
            const double phi = phase(rng);
            for (auto pipeline : {Pipeline::MMZI, Pipeline::MZI}) {
                const auto ports = classical_fi(s, phi, pipeline, Labeling::PortCounts);
                const auto totals = classical_fi(s, phi, pipeline, Labeling::TotalDifference);
                EXPECT_LE(ports.fi, ports.qfi + 1e-8);
                EXPECT_LT(std::abs(ports.fi - totals.fi), 1e-12);
            }
        }
    }
}

TEST(classical_fi, report_bounds) {
    const auto r = classical_fi(noon(2), 0.3, Pipeline::MMZI);
    ASSERT_TRUE(r.crb().has_value());
    EXPECT_NEAR(*r.crb(), 1.0 / std::sqrt(r.fi), 1e-15);
    EXPECT_NEAR(*r.crb(100), 1.0 / std::sqrt(100 * r.fi), 1e-15);
    const auto j = report_to_json(r);
    EXPECT_EQ(j["pipeline"], "MMZI");
    EXPECT_EQ(j["povm"], "counting(na,nb)");
    EXPECT_TRUE(j["qfi"].is_number());
    FisherReport divergent = r;
    divergent.qfi_divergent = true;
    EXPECT_EQ(report_to_json(divergent)["qfi"], "divergent");
}

TEST(qfi_pure, closed_forms) {
    for (int n = 1; n <= 10; ++n) {
        EXPECT_NEAR(qfi_pure(noon(n)), double(n) * n, 1e-12);
        EXPECT_NEAR(qfi_pure(apply_beamsplitter(dual_fock(n))), 2.0 * n * n + 2.0 * n, 1e-9 * n * n);
    }
    for (double m : {0.5, 2.0}) {
        const auto f = tmsv(m, tmsv_cutoff_for_tail(m, 1e-14), 1e-14);
        EXPECT_NEAR(qfi_pure(apply_beamsplitter(f.state)), m * m + 2 * m, 1e-9);
    }
}

TEST(qfi_pure, sector_weighted_cross_check) {
    for (const auto &f : catalog_sample()) {
        const auto encoded = encoded_state(f.state, f.pipeline);
        EXPECT_NEAR(qfi_pure(encoded), qfi_sector_weighted(encoded), 1e-9) << f.family;
        EXPECT_NEAR(qfi_pure(encoded), f.qfi.value, 1e-9 * std::max(1.0, f.qfi.value)) << f.family;
    }
}

TEST(qfi_pure, doubled_noon_beats_dual_fock) {
    const double z3 = zeta(3.0), z4 = zeta(4.0), z5 = zeta(5.0);
    const auto noon2 = zeta_noon_doubled(5.0, 60);
    const auto dual = zeta_dual_fock(5.0, 60);
    const double q_noon = qfi_pure(noon2.state);
    const double q_dual = qfi_pure(apply_beamsplitter(dual.state));
    EXPECT_NEAR(q_noon, 4 * z3 / z5, 1e-3 * q_noon);
    EXPECT_NEAR(q_dual, 2 * z3 / z5 + 2 * z4 / z5, 1e-3 * q_dual);
    EXPECT_GT(q_noon, q_dual);
}

TEST(max_qfi_bound, distributions) {
    const int k = 1000;
    const auto zeta3 = max_qfi_bound(zeta_noon(3.0, k).distribution);
    EXPECT_TRUE(zeta3.divergent);
    EXPECT_NEAR(zeta3.value, harmonic(k) / partial_zeta(3.0, k), 1e-10);
    EXPECT_NEAR(max_qfi_bound(PhotonDistribution({{7, 1.0}}, 0.0)).value, 49.0, 1e-12);
    const auto t = max_qfi_bound(tmsv_noon(3.0, tmsv_cutoff_for_tail(3.0, 1e-14), 1e-14).distribution);
    EXPECT_NEAR(t.value, 2 * 9.0 + 2 * 3.0, 1e-8);
    EXPECT_NEAR(*t.limit, 24.0, 1e-12);
}

TEST(sector_fi, additivity) {
    for (const auto &f : catalog_sample()) {
        for (double phi : {0.2, 1.0, 2.2}) {
            const auto table = sector_fi_decomposition(f.state, phi, f.pipeline);
            EXPECT_NEAR(table.total, table.weighted_sum, 1e-9) << f.family;
        }
    }
}

TEST(sector_fi, zeta_noon_weighted_squares) {
    const auto f = zeta_noon(3.0, 20);
    const auto table = sector_fi_decomposition(f.state, 0.4, Pipeline::MMZI);
    double expected = 0;
    for (const auto &row : table.rows) {
        expected += row.probability * row.total * row.total;
        EXPECT_NEAR(row.fi, double(row.total) * row.total, 1e-9);
    }
    EXPECT_NEAR(table.total, expected, 1e-9);
}

TEST(sector_fi, single_and_two_sector) {
    const auto one = sector_fi_decomposition(noon(3), 0.5, Pipeline::MMZI);
    ASSERT_EQ(one.rows.size(), 1u);
    EXPECT_NEAR(one.rows[0].fi, one.total, 1e-12);

    const double a = 0.5;
    const auto mix = make_state({{1, 0, a}, {0, 1, a}, {2, 0, a}, {0, 2, a}}, 2);
    const auto two = sector_fi_decomposition(mix, 0.5, Pipeline::MMZI);
    ASSERT_EQ(two.rows.size(), 2u);
    EXPECT_NEAR(two.total, 0.5 * 1 + 0.5 * 4, 1e-12);
}

TEST(fi_observable, injective_estimator_is_sufficient) {
    std::mt19937_64 rng(31);
    const auto f = [](int na, int nb) { return na + std::numbers::sqrt2 * nb; };
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_state(rng, 8);
        const auto counting = classical_fi(s, 0.9, Pipeline::MMZI);
        EXPECT_NEAR(fi_observable(s, 0.9, Pipeline::MMZI, f).fi, counting.fi, 1e-12);
    }
}

TEST(fi_observable, data_processing_inequality) {
    std::mt19937_64 rng(41);
    const std::vector<std::function<double(int, int)>> estimators = {
        parity_a,
        [](int na, int nb) { return double(nb - na); },
        [](int na, int nb) { return double(na * nb); },
        [](int na, int) { return double(na % 3); },
    };
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = oracle::random_state(rng, 8);
        for (auto pipeline : {Pipeline::MMZI, Pipeline::MZI}) {
            const double counting = classical_fi(s, 1.3, pipeline).fi;
            for (const auto &f : estimators) {
                EXPECT_LE(fi_observable(s, 1.3, pipeline, f).fi, counting + 1e-10);
            }
        }
    }
}

TEST(fi_observable, parity_on_noon2) {
    double best = 0;
    for (double phi : phase_grid(0, kPi, 2001)) {
        const double fi = fi_observable(noon(2), phi, Pipeline::MMZI, parity_a, "parity_a").fi;
        EXPECT_LE(fi, 4.0 + 1e-10);
        best = std::max(best, fi);
    }
    EXPECT_NEAR(best, 4.0, 1e-6);
}

TEST(fi_observable, constant_is_uninformative) {
    EXPECT_NEAR(fi_observable(noon(3), 0.4, Pipeline::MMZI, [](int, int) { return 1.0; }).fi, 0.0, 1e-14);
}

TEST(j3_measurement, intermediate_distribution_is_phase_free) {
    for (int n = 1; n <= 6; ++n) {
        for (double phi : {0.1, 0.7, 1.9}) {
            const auto r = j3_measurement_fi(noon(n), phi);
            EXPECT_NEAR(r.intermediate_fi, 0.0, 1e-12);
            EXPECT_NEAR(r.qfi, double(n) * n, 1e-12);
        }
    }
    EXPECT_NEAR(j3_measurement_fi(zeta_noon(3.0, 30).state, 0.5).intermediate_fi, 0.0, 1e-12);
}

TEST(j3_measurement, after_splitter_fixed_vs_fluctuating_number) {
    // Fixed N: Delta alone carries the full counting information.
    const auto fixed = j3_measurement_fi(noon(4), 0.3);
    EXPECT_NEAR(fixed.output_fi, fixed.counting_fi, 1e-10);
    EXPECT_NEAR(fixed.counting_fi, 16.0, 1e-9);
    // Fluctuating N: outcomes from different sectors share Delta values and
    // J3 alone loses information.
    const auto mixed = j3_measurement_fi(zeta_noon(3.0, 8).state, 0.3);
    EXPECT_LT(mixed.output_fi, mixed.counting_fi - 1e-3);
    EXPECT_LE(mixed.counting_fi, mixed.qfi + 1e-9);
}

TEST(zeno_time, formula) {
    EXPECT_NEAR(zeno_time(1, 4.0).tau, 1.0, 1e-15);
    EXPECT_NEAR(zeno_time(4, 1.0).tau, 1.0, 1e-15);
    const auto d = zeno_time(3, 0.0, true);
    EXPECT_EQ(d.tau, 0.0);
    EXPECT_TRUE(d.divergent_qfi);
    EXPECT_THROW(zeno_time(1, 0.0), NonpositiveQFI);
    EXPECT_THROW(zeno_time(1, -1.0), NonpositiveQFI);
    EXPECT_THROW(zeno_time(0, 1.0), ValidationError);
}

TEST(saturation, superposed_noon_reaches_second_moment) {
    for (const auto &f : {zeta_noon(4.0, 30), tmsv_noon(2.0, tmsv_cutoff_for_tail(2.0, 1e-10))}) {
        const auto best = max_fi_on_grid(fi_scan(f.state, Pipeline::MMZI, phase_grid(0, kPi, 2001)));
        EXPECT_GE(best.fi, (1 - 1e-6) * max_qfi_bound(f.distribution).value) << f.family;
    }
}

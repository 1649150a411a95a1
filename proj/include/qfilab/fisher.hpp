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

// Classical Fisher information of photon-counting measurements, quantum
// Fisher information of pure states under the J3 phase generator, and the
// Cramer-Rao bounds built from them.
//
// Likelihood derivatives are analytic: with |u> = U_phi |psi> the encoded
// state, d/dphi of the output amplitudes is B (-i J3) |u>.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfilab/distribution.hpp"
#include "qfilab/errors.hpp"
#include "qfilab/fock.hpp"
#include "qfilab/parallel.hpp"

namespace qfilab {

/// Probabilities below this are replaced by the analytic limit of their FI term.
inline constexpr double kProbabilityFloor = 1e-12;

enum class Labeling { PortCounts, TotalDifference };

/// A joint detector record: (n_a, n_b) or the equivalent (N, Delta).
struct CountingOutcome {
    Labeling labeling = Labeling::PortCounts;
    int first = 0;
    int second = 0;

    static CountingOutcome ports(int na, int nb) { return {Labeling::PortCounts, na, nb}; }
    static CountingOutcome total_difference(int total, int delta) {
        return {Labeling::TotalDifference, total, delta};
    }
    static CountingOutcome from_key(const FockKey &key, Labeling labeling) {
        return labeling == Labeling::PortCounts ? ports(key.na, key.nb)
                                                : total_difference(key.total(), key.delta());
    }

    FockKey key() const {
        if (labeling == Labeling::PortCounts) {
            return {first, second};
        }
        return {(first - second) / 2, (first + second) / 2};
    }
    CountingOutcome relabeled(Labeling target) const { return from_key(key(), target); }

    friend bool operator==(const CountingOutcome &, const CountingOutcome &) = default;
    friend bool operator<(const CountingOutcome &l, const CountingOutcome &r) {
        if (l.labeling != r.labeling) {
            return l.labeling < r.labeling;
        }
        if (l.first != r.first) {
            return l.first < r.first;
        }
        return l.second < r.second;
    }
};

struct OutcomeProbability {
    CountingOutcome outcome;
    double probability;
    double derivative;
};

namespace detail {

/// Output amplitude of one outcome and its phi-derivative.
struct OutputTerm {
    FockKey key;
    cplx amplitude;
    cplx derivative;
};

/// Amplitudes after U_phi (and the final splitter when `split`) applied to the
/// encoded state. Every outcome of every occupied sector is listed.
inline std::vector<OutputTerm> output_terms(const TwoModeState &encoded, double phi, bool split) {
    std::vector<OutputTerm> out;
    for (int total : encoded.occupied_sectors()) {
        SectorVector u = sector_vector(encoded, total);
        SectorVector du(total + 1);
        for (int i = 0; i <= total; ++i) {
            const double m = 0.5 * (total - 2 * i);
            u(i) *= std::polar(1.0, -phi * m);
            du(i) = cplx{0.0, -m} * u(i);
        }
        if (split) {
            u = apply_beamsplitter_sector(total, u);
            du = apply_beamsplitter_sector(total, du);
        }
        for (int i = 0; i <= total; ++i) {
            out.push_back({FockKey{total - i, i}, u(i), du(i)});
        }
    }
    return out;
}

struct Group {
    double probability = 0.0;
    double derivative = 0.0;
    double derivative_norm = 0.0;  // sum |d amplitude|^2
};

inline void accumulate(Group &g, const OutputTerm &t) {
    g.probability += std::norm(t.amplitude);
    g.derivative += 2.0 * (std::conj(t.amplitude) * t.derivative).real();
    g.derivative_norm += std::norm(t.derivative);
}

struct FiSum {
    double fi = 0.0;
    bool singular = false;
};

/// sum P'^2 / P. Below the probability floor every amplitude in the group
/// vanishes, and P'^2 / P tends to 4 sum |d amplitude|^2. Cauchy-Schwarz
/// bounds P'^2 <= 4 P sum|d|^2; a floor term violating it is singular.
template <typename Groups>
FiSum fisher_sum(const Groups &groups) {
    FiSum s;
    for (const auto &[label, g] : groups) {
        if (g.probability >= kProbabilityFloor) {
            s.fi += g.derivative * g.derivative / g.probability;
        } else {
            const double bound = 4.0 * g.probability * g.derivative_norm;
            if (g.derivative * g.derivative > bound * (1.0 + 1e-6) + 1e-300) {
                s.singular = true;
            }
            s.fi += 4.0 * g.derivative_norm;
        }
    }
    return s;
}

}  // namespace detail

/// P(outcome | phi) and dP/dphi for every outcome of the occupied sectors.
inline std::vector<OutcomeProbability> likelihood(const TwoModeState &state, double phi, Pipeline pipeline,
                                                  Labeling labeling = Labeling::PortCounts) {
    const auto terms = detail::output_terms(encoded_state(state, pipeline), phi, true);
    std::vector<OutcomeProbability> out;
    out.reserve(terms.size());
    for (const auto &t : terms) {
        detail::Group g;
        detail::accumulate(g, t);
        out.push_back({CountingOutcome::from_key(t.key, labeling), g.probability, g.derivative});
    }
    std::sort(out.begin(), out.end(),
              [](const OutcomeProbability &l, const OutcomeProbability &r) { return l.outcome < r.outcome; });
    return out;
}

/// Fisher information and bounds at one phase point.
struct FisherReport {
    double phi = 0.0;
    double fi = 0.0;
    double qfi = 0.0;
    bool qfi_divergent = false;
    std::string povm;
    Pipeline pipeline = Pipeline::MMZI;
    /// A sub-floor outcome had a derivative inconsistent with P -> 0.
    bool singular = false;

    /// 1/sqrt(M * fi); empty when fi = 0.
    std::optional<double> crb(double trials = 1.0) const {
        if (!(fi > 0.0)) {
            return std::nullopt;
        }
        return 1.0 / std::sqrt(trials * fi);
    }
};

inline nlohmann::json report_to_json(const FisherReport &r) {
    nlohmann::json j;
    j["phi"] = r.phi;
    j["fi"] = r.fi;
    if (r.qfi_divergent) {
        j["qfi"] = "divergent";
    } else {
        j["qfi"] = r.qfi;
    }
    const auto crb = r.crb();
    j["crb"] = crb ? nlohmann::json(*crb) : nlohmann::json(nullptr);
    j["povm"] = r.povm;
    j["pipeline"] = to_string(r.pipeline);
    if (r.singular) {
        j["singular"] = true;
    }
    return j;
}

/// 4 Var(J3) of a pure state.
inline double qfi_pure(const TwoModeState &state) {
    const double m1 = expect(state, Observable::J3);
    const double m2 = expect(state, Observable::J3Squared);
    return std::max(0.0, 4.0 * (m2 - m1 * m1));
}

/// sum_N P(N) 4 Var_N(J3); equals qfi_pure when every sector has the same <J3>.
inline double qfi_sector_weighted(const TwoModeState &state) {
    double sum = 0.0;
    for (const auto &c : sector_decompose(state)) {
        sum += c.probability * qfi_pure(c.state);
    }
    return sum;
}

inline const char *povm_name(Labeling labeling) {
    return labeling == Labeling::PortCounts ? "counting(na,nb)" : "counting(N,Delta)";
}

inline FisherReport classical_fi(const TwoModeState &state, double phi, Pipeline pipeline,
                                 Labeling labeling = Labeling::PortCounts) {
    const TwoModeState encoded = encoded_state(state, pipeline);
    std::map<CountingOutcome, detail::Group> groups;
    for (const auto &t : detail::output_terms(encoded, phi, true)) {
        detail::accumulate(groups[CountingOutcome::from_key(t.key, labeling)], t);
    }
    const auto sum = detail::fisher_sum(groups);
    FisherReport r;
    r.phi = phi;
    r.fi = sum.fi;
    r.singular = sum.singular;
    r.qfi = qfi_pure(encoded);
    r.povm = povm_name(labeling);
    r.pipeline = pipeline;
    return r;
}

/// FI of the distribution induced by the estimator f(n_a, n_b): outcomes with
/// equal f values are merged.
inline FisherReport fi_observable(const TwoModeState &state, double phi, Pipeline pipeline,
                                  const std::function<double(int, int)> &f, std::string name = "f(na,nb)") {
    const TwoModeState encoded = encoded_state(state, pipeline);
    std::map<double, detail::Group> groups;
    for (const auto &t : detail::output_terms(encoded, phi, true)) {
        detail::accumulate(groups[f(t.key.na, t.key.nb)], t);
    }
    const auto sum = detail::fisher_sum(groups);
    FisherReport r;
    r.phi = phi;
    r.fi = sum.fi;
    r.singular = sum.singular;
    r.qfi = qfi_pure(encoded);
    r.povm = std::move(name);
    r.pipeline = pipeline;
    return r;
}

/// (-1)^{n_a}.
inline double parity_a(int na, int /*nb*/) { return na % 2 == 0 ? 1.0 : -1.0; }

struct SectorFiRow {
    int total;
    double probability;
    double fi;
};

struct SectorFiTable {
    std::vector<SectorFiRow> rows;
    /// classical_fi of the whole state.
    double total = 0.0;
    /// sum P(N) FI_N.
    double weighted_sum = 0.0;
};

inline SectorFiTable sector_fi_decomposition(const TwoModeState &state, double phi, Pipeline pipeline) {
    SectorFiTable table;
    for (const auto &c : sector_decompose(state)) {
        const double fi = classical_fi(c.state, phi, pipeline).fi;
        table.rows.push_back({c.total, c.probability, fi});
    }
    for (auto it = table.rows.rbegin(); it != table.rows.rend(); ++it) {
        table.weighted_sum += it->probability * it->fi;
    }
    table.total = classical_fi(state, phi, pipeline).fi;
    return table;
}

/// J3 measured on the intermediate state, compared against the alternatives.
struct J3Report {
    double phi = 0.0;
    /// J3 eigenvalue distribution of U_phi|psi> with no final splitter.
    double intermediate_fi = 0.0;
    /// J3 (equivalently Delta alone) measured after the final splitter.
    double output_fi = 0.0;
    /// Full (N, Delta) counting after the final splitter.
    double counting_fi = 0.0;
    double qfi = 0.0;
};

/// `state` is the intermediate (MMZI-encoded) state.
inline J3Report j3_measurement_fi(const TwoModeState &state, double phi) {
    J3Report r;
    r.phi = phi;
    {
        std::map<int, detail::Group> groups;
        for (const auto &t : detail::output_terms(state, phi, false)) {
            detail::accumulate(groups[t.key.na - t.key.nb], t);
        }
        r.intermediate_fi = detail::fisher_sum(groups).fi;
    }
    {
        std::map<int, detail::Group> groups;
        for (const auto &t : detail::output_terms(state, phi, true)) {
            detail::accumulate(groups[t.key.na - t.key.nb], t);
        }
        r.output_fi = detail::fisher_sum(groups).fi;
    }
    r.counting_fi = classical_fi(state, phi, Pipeline::MMZI, Labeling::TotalDifference).fi;
    r.qfi = qfi_pure(state);
    return r;
}

/// Largest achievable QFI for a photon-number distribution: <N^2>.
inline Moment max_qfi_bound(const PhotonDistribution &dist) { return dist.second_moment(); }

struct ZenoTime {
    double tau = 0.0;
    bool divergent_qfi = false;
};

/// tau = 2 / sqrt(m F_Q); a divergent QFI gives tau = 0 with the flag set.
inline ZenoTime zeno_time(int m, double qfi, bool qfi_divergent = false) {
    if (m < 1) {
        throw ValidationError("Zeno time needs m >= 1");
    }
    if (qfi_divergent) {
        return {0.0, true};
    }
    if (!(qfi > 0.0)) {
        throw NonpositiveQFI("Zeno time needs a positive QFI");
    }
    return {2.0 / std::sqrt(double(m) * qfi), false};
}

/// Evenly spaced grid on [lo, hi] with `points` nodes.
inline std::vector<double> phase_grid(double lo, double hi, int points) {
    if (points < 1) {
        throw ValidationError("grid needs at least one point");
    }
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
        out[i] = points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1);
    }
    return out;
}

inline std::vector<FisherReport> fi_scan(const TwoModeState &state, Pipeline pipeline,
                                         const std::vector<double> &phis,
                                         Labeling labeling = Labeling::PortCounts) {
    // Warm the splitter cache before fanning out.
    warm_beamsplitter(encoded_state(state, pipeline));
    std::vector<FisherReport> out(phis.size());
    parallel_for(phis.size(), [&](std::size_t i) { out[i] = classical_fi(state, phis[i], pipeline, labeling); });
    return out;
}

/// Grid point with the largest FI; ties go to the smallest phi.
inline FisherReport max_fi_on_grid(const std::vector<FisherReport> &scan) {
    if (scan.empty()) {
        throw ValidationError("empty FI scan");
    }
    const FisherReport *best = &scan.front();
    for (const auto &r : scan) {
        if (r.fi > best->fi) {
            best = &r;
        }
    }
    return *best;
}

}  // namespace qfilab

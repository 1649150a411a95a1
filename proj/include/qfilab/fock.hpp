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

// Truncated two-mode Fock space: sparse states, Schwinger-operator sector
// matrices, and the two linear-optical unitaries of a two-path interferometer.
//
// Basis conventions. A sector of total photon number N has N + 1 basis states
// |N - i, i> for i = 0..N (index i is the occupation of mode b). In the
// Schwinger picture this is |j, m> with j = N/2 and m = N/2 - i, so the
// J3 eigenvalue decreases with the index.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qfilab/errors.hpp"

namespace qfilab {

using cplx = std::complex<double>;

/// Occupation pair (n_a, n_b). Ordered by total photon number, then by n_a.
struct FockKey {
    int na = 0;
    int nb = 0;

    constexpr int total() const { return na + nb; }
    /// Eigenvalue of J3 = (n_a - n_b) / 2.
    constexpr double j3() const { return 0.5 * (na - nb); }
    /// Port difference Delta = n_b - n_a.
    constexpr int delta() const { return nb - na; }

    friend constexpr bool operator==(const FockKey &, const FockKey &) = default;
    friend constexpr bool operator<(const FockKey &lhs, const FockKey &rhs) {
        if (lhs.total() != rhs.total()) {
            return lhs.total() < rhs.total();
        }
        return lhs.na < rhs.na;
    }
};

struct Amplitude {
    FockKey key;
    cplx value;
};

struct StateOptions {
    /// Entries with |amplitude| below prune_relative * max|amplitude| are dropped.
    double prune_relative = 1e-15;
    double norm_tolerance = 1e-12;
};

/// Immutable pure state on the two-mode Fock space truncated at N <= cutoff.
/// Entries are kept sorted by FockKey with no duplicates and no pruned values.
class TwoModeState {
   public:
    /// Vacuum.
    TwoModeState() : entries_{{FockKey{0, 0}, cplx{1.0, 0.0}}} {}

    /// Canonicalizes `entries` (merge duplicates, sort, prune) and, if
    /// `normalize` is set, rescales to unit norm.
    static TwoModeState from_entries(std::vector<Amplitude> entries, int cutoff,
                                     const StateOptions &options = {},
                                     bool normalize = true) {
        if (cutoff < 0) {
            throw CutoffViolation("cutoff must be nonnegative");
        }
        for (const auto &e : entries) {
            if (e.key.na < 0 || e.key.nb < 0) {
                throw ValidationError("occupation numbers must be nonnegative");
            }
            if (e.key.total() > cutoff) {
                throw CutoffViolation("entry (" + std::to_string(e.key.na) + "," +
                                      std::to_string(e.key.nb) + ") exceeds cutoff " +
                                      std::to_string(cutoff));
            }
            if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag())) {
                throw ValidationError("amplitude is not finite");
            }
        }
        std::sort(entries.begin(), entries.end(),
                  [](const Amplitude &l, const Amplitude &r) { return l.key < r.key; });
        std::vector<Amplitude> merged;
        merged.reserve(entries.size());
        for (const auto &e : entries) {
            if (!merged.empty() && merged.back().key == e.key) {
                merged.back().value += e.value;
            } else {
                merged.push_back(e);
            }
        }
        double max_abs = 0.0;
        for (const auto &e : merged) {
            max_abs = std::max(max_abs, std::abs(e.value));
        }
        if (max_abs == 0.0) {
            throw EmptyState();
        }
        const double threshold = options.prune_relative * max_abs;
        std::erase_if(merged, [&](const Amplitude &e) { return std::abs(e.value) < threshold; });

        TwoModeState state;
        state.entries_ = std::move(merged);
        state.cutoff_ = cutoff;
        state.options_ = options;
        // Already-unit states are left bit-identical so normalization is idempotent.
        if (normalize && std::abs(state.norm_squared() - 1.0) > 1e-14) {
            const double scale = 1.0 / std::sqrt(state.norm_squared());
            for (auto &e : state.entries_) {
                e.value *= scale;
            }
        }
        return state;
    }

    std::span<const Amplitude> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    int cutoff() const { return cutoff_; }
    const StateOptions &options() const { return options_; }

    cplx amplitude(int na, int nb) const {
        const FockKey key{na, nb};
        auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                   [](const Amplitude &e, const FockKey &k) { return e.key < k; });
        return (it != entries_.end() && it->key == key) ? it->value : cplx{};
    }

    int max_total() const { return entries_.empty() ? 0 : entries_.back().key.total(); }

    double norm_squared() const {
        double sum = 0.0;
        for (const auto &e : entries_) {
            sum += std::norm(e.value);
        }
        return sum;
    }

    /// Entries of one sector, as a contiguous sub-span.
    std::span<const Amplitude> sector(int total) const {
        auto lo = std::lower_bound(entries_.begin(), entries_.end(), FockKey{0, total},
                                   [](const Amplitude &e, const FockKey &k) { return e.key < k; });
        auto hi = std::lower_bound(lo, entries_.end(), FockKey{0, total + 1},
                                   [](const Amplitude &e, const FockKey &k) { return e.key < k; });
        return {lo, hi};
    }

    /// Occupied total photon numbers, ascending.
    std::vector<int> occupied_sectors() const {
        std::vector<int> out;
        for (const auto &e : entries_) {
            if (out.empty() || out.back() != e.key.total()) {
                out.push_back(e.key.total());
            }
        }
        return out;
    }

   private:
    std::vector<Amplitude> entries_;
    int cutoff_ = 0;
    StateOptions options_{};
};

/// Validated, normalized state from user-provided entries.
struct Entry {
    int na;
    int nb;
    cplx amplitude;
};

inline TwoModeState make_state(std::span<const Entry> entries, int cutoff,
                               const StateOptions &options = {}) {
    std::vector<Amplitude> amps;
    amps.reserve(entries.size());
    for (const auto &e : entries) {
        amps.push_back({FockKey{e.na, e.nb}, e.amplitude});
    }
    return TwoModeState::from_entries(std::move(amps), cutoff, options);
}

inline TwoModeState make_state(std::initializer_list<Entry> entries, int cutoff,
                               const StateOptions &options = {}) {
    return make_state(std::span<const Entry>(entries.begin(), entries.size()), cutoff, options);
}

// ---------------------------------------------------------------------------
// Sector matrices

using SectorMatrix = Eigen::MatrixXcd;
using SectorVector = Eigen::VectorXcd;

namespace detail {

/// sqrt((n_a + 1) n_b) for the basis index i = n_b of sector N: the matrix
/// element <N-i+1, i-1| a^dag b |N-i, i>.
inline double hop(int total, int i) { return std::sqrt(double(total - i + 1) * double(i)); }

}  // namespace detail

/// J1 = (a^dag b + b^dag a) / 2 restricted to sector N.
inline SectorMatrix sector_j1(int total) {
    SectorMatrix m = SectorMatrix::Zero(total + 1, total + 1);
    for (int i = 1; i <= total; ++i) {
        const double v = 0.5 * detail::hop(total, i);
        m(i - 1, i) = v;
        m(i, i - 1) = v;
    }
    return m;
}

/// J2 = (a^dag b - b^dag a) / 2i restricted to sector N.
inline SectorMatrix sector_j2(int total) {
    SectorMatrix m = SectorMatrix::Zero(total + 1, total + 1);
    for (int i = 1; i <= total; ++i) {
        const double v = 0.5 * detail::hop(total, i);
        m(i - 1, i) = cplx{0.0, -v};
        m(i, i - 1) = cplx{0.0, v};
    }
    return m;
}

/// J3 = (n_a - n_b) / 2 restricted to sector N.
inline SectorMatrix sector_j3(int total) {
    SectorMatrix m = SectorMatrix::Zero(total + 1, total + 1);
    for (int i = 0; i <= total; ++i) {
        m(i, i) = 0.5 * (total - 2 * i);
    }
    return m;
}

namespace detail {

/// exp(i pi J1 / 2) on sector N from the eigendecomposition of the real
/// symmetric tridiagonal J1 block.
inline SectorMatrix compute_beamsplitter_sector(int total) {
    const int dim = total + 1;
    if (dim == 1) {
        return SectorMatrix::Identity(1, 1);
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd sub(dim - 1);
    for (int i = 1; i <= total; ++i) {
        sub(i - 1) = 0.5 * hop(total, i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd &vecs = solver.eigenvectors();
    // The spectrum is exactly {-j, ..., j}; snapping removes solver noise
    // from the phases.
    Eigen::VectorXcd phases(dim);
    for (int k = 0; k < dim; ++k) {
        const double snapped = std::round(2.0 * solver.eigenvalues()(k)) / 2.0;
        phases(k) = std::polar(1.0, 0.5 * std::numbers::pi * snapped);
    }
    return vecs.cast<cplx>() * phases.asDiagonal() * vecs.transpose().cast<cplx>();
}

class BeamSplitterCache {
   public:
    std::shared_ptr<const SectorMatrix> get(int total) {
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(total); it != cache_.end()) {
                return it->second;
            }
        }
        auto computed = std::make_shared<const SectorMatrix>(compute_beamsplitter_sector(total));
        std::lock_guard lock(mutex_);
        auto [it, inserted] = cache_.emplace(total, std::move(computed));
        return it->second;
    }

   private:
    std::mutex mutex_;
    std::unordered_map<int, std::shared_ptr<const SectorMatrix>> cache_;
};

inline BeamSplitterCache &beamsplitter_cache() {
    static BeamSplitterCache cache;
    return cache;
}

}  // namespace detail

/// Cached matrix of B = exp(i pi J1 / 2) on sector N. Safe to call concurrently.
inline std::shared_ptr<const SectorMatrix> beamsplitter_sector(int total) {
    return detail::beamsplitter_cache().get(total);
}

namespace detail {

/// |<N-k, k| B |N, 0>| = sqrt(C(N,k) / 2^N), via log-gamma in long double.
class EdgeColumnCache {
   public:
    std::shared_ptr<const Eigen::VectorXd> get(int total) {
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(total); it != cache_.end()) {
                return it->second;
            }
        }
        auto column = std::make_shared<Eigen::VectorXd>(total + 1);
        const long double n = total;
        for (int k = 0; k <= total; ++k) {
            const long double log_c =
                0.5L * (std::lgamma(n + 1) - std::lgamma((long double)k + 1) - std::lgamma(n - k + 1) -
                        n * std::numbers::ln2_v<long double>);
            (*column)(k) = double(std::exp(log_c));
        }
        std::lock_guard lock(mutex_);
        auto [it, inserted] = cache_.emplace(total, std::move(column));
        return it->second;
    }

   private:
    std::mutex mutex_;
    std::unordered_map<int, std::shared_ptr<const Eigen::VectorXd>> cache_;
};

inline EdgeColumnCache &edge_column_cache() {
    static EdgeColumnCache cache;
    return cache;
}

/// Above this sector size, vectors living on |N,0> and |0,N> only are split
/// with the closed-form columns instead of the dense matrix.
inline constexpr int kEdgeColumnMinTotal = 48;

inline bool edge_supported(const Eigen::Ref<const Eigen::VectorXcd> &v) {
    for (Eigen::Index i = 1; i + 1 < v.size(); ++i) {
        if (v(i) != cplx{0.0, 0.0}) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// Whether applying B to this sector vector needs the dense matrix.
inline bool needs_dense_beamsplitter(int total, const Eigen::Ref<const Eigen::VectorXcd> &v) {
    return total < detail::kEdgeColumnMinTotal || !detail::edge_supported(v);
}

/// B times a sector vector (index i = n_b). Uses
///   B|N,0> = sum_k i^k sqrt(C(N,k)/2^N) |N-k,k>,
///   B|0,N> = sum_k i^(N-k) sqrt(C(N,k)/2^N) |N-k,k>
/// when the vector has no other components.
inline Eigen::VectorXcd apply_beamsplitter_sector(int total, const Eigen::VectorXcd &v) {
    if (needs_dense_beamsplitter(total, v)) {
        return (*beamsplitter_sector(total)) * v;
    }
    static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const auto column = detail::edge_column_cache().get(total);
    const cplx a = v(0);
    const cplx b = v(total);
    Eigen::VectorXcd out(total + 1);
    for (int k = 0; k <= total; ++k) {
        out(k) = (*column)(k) * (powers[k % 4] * a + powers[(total - k) % 4] * b);
    }
    return out;
}

/// Dense amplitude vector of one sector (index i = n_b).
inline SectorVector sector_vector(const TwoModeState &state, int total) {
    SectorVector v = SectorVector::Zero(total + 1);
    for (const auto &e : state.sector(total)) {
        v(e.key.nb) = e.value;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Unitaries

/// U_phi = exp(-i phi J3).
inline TwoModeState apply_phase(const TwoModeState &state, double phi) {
    std::vector<Amplitude> out(state.entries().begin(), state.entries().end());
    for (auto &e : out) {
        e.value *= std::polar(1.0, -phi * e.key.j3());
    }
    return TwoModeState::from_entries(std::move(out), state.cutoff(), state.options(), false);
}

/// B = exp(i pi J1 / 2), applied sector by sector.
inline TwoModeState apply_beamsplitter(const TwoModeState &state) {
    std::vector<Amplitude> out;
    for (int total : state.occupied_sectors()) {
        const SectorVector result = apply_beamsplitter_sector(total, sector_vector(state, total));
        for (int i = 0; i <= total; ++i) {
            out.push_back({FockKey{total - i, i}, result(i)});
        }
    }
    return TwoModeState::from_entries(std::move(out), state.cutoff(), state.options(), false);
}

/// Builds the dense splitter blocks `state` will need, e.g. before a
/// parallel loop.
inline void warm_beamsplitter(const TwoModeState &state) {
    for (int total : state.occupied_sectors()) {
        if (needs_dense_beamsplitter(total, sector_vector(state, total))) {
            beamsplitter_sector(total);
        }
    }
}

/// Interferometer layout. MZI: splitter, phase, splitter. MMZI: the first
/// splitter is replaced by an entangled source, so the input is phase-encoded
/// directly and then split.
enum class Pipeline { MZI, MMZI };

inline const char *to_string(Pipeline p) { return p == Pipeline::MZI ? "MZI" : "MMZI"; }

/// The state that receives the phase shift.
inline TwoModeState encoded_state(const TwoModeState &input, Pipeline pipeline) {
    return pipeline == Pipeline::MZI ? apply_beamsplitter(input) : input;
}

// ---------------------------------------------------------------------------
// Diagonal expectations

enum class Observable { TotalNumber, TotalNumberSquared, J3, J3Squared, Difference, ParityA };

inline double eigenvalue(Observable observable, const FockKey &key) {
    switch (observable) {
        case Observable::TotalNumber:
            return key.total();
        case Observable::TotalNumberSquared:
            return double(key.total()) * double(key.total());
        case Observable::J3:
            return key.j3();
        case Observable::J3Squared:
            return key.j3() * key.j3();
        case Observable::Difference:
            return key.delta();
        case Observable::ParityA:
            return (key.na % 2 == 0) ? 1.0 : -1.0;
    }
    return 0.0;
}

inline double expect(const TwoModeState &state, Observable observable) {
    double sum = 0.0;
    for (const auto &e : state.entries()) {
        sum += std::norm(e.value) * eigenvalue(observable, e.key);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Sector decomposition

struct SectorComponent {
    int total;
    double probability;
    /// Normalized sector state whose first entry is real and positive.
    TwoModeState state;
    /// Input = sum over sectors of sqrt(probability) * phase * state.
    cplx phase;
};

inline std::vector<SectorComponent> sector_decompose(const TwoModeState &state) {
    std::vector<SectorComponent> out;
    const double norm = state.norm_squared();
    for (int total : state.occupied_sectors()) {
        const auto entries = state.sector(total);
        double p = 0.0;
        for (const auto &e : entries) {
            p += std::norm(e.value);
        }
        const cplx phase = std::polar(1.0, std::arg(entries.front().value));
        const double scale = 1.0 / std::sqrt(p);
        std::vector<Amplitude> local;
        local.reserve(entries.size());
        for (const auto &e : entries) {
            local.push_back({e.key, e.value * std::conj(phase) * scale});
        }
        out.push_back({total, p / norm,
                       TwoModeState::from_entries(std::move(local), state.cutoff(),
                                                  state.options(), false),
                       phase});
    }
    return out;
}

}  // namespace qfilab

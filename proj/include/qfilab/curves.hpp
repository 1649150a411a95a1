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

// Phase-uncertainty curves against mean photon number: reference limits,
// TMSV-based states and the zeta-weighted superpositions.
//
// A zeta family with exponent x has P(n) = n^{-x} / zeta(x). Its mean is
// finite for x > 2 and its second moment for x > 3, so every mean photon
// number above the x = 3 value belongs to a state with divergent QFI. Those
// rows carry a CRB of exactly 0 in the CSV; the partial-sum growth that
// justifies the 0 goes to a sidecar JSON.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfilab/catalog.hpp"
#include "qfilab/errors.hpp"
#include "qfilab/parallel.hpp"
#include "qfilab/zeta.hpp"

namespace qfilab {

enum class Figure { Fig3a, Fig3b };
enum class SweepKind { MeanPhotonNumber, Exponent };

inline const char *to_string(Figure f) { return f == Figure::Fig3a ? "fig3a" : "fig3b"; }

struct CurveSpec {
    Figure figure = Figure::Fig3a;
    SweepKind kind = SweepKind::MeanPhotonNumber;
    std::vector<double> sweep;
    /// Largest n of the partial sums recorded for divergent rows.
    std::int64_t cutoff = 10000;
    double tol = 1e-14;
};

/// Photons per zeta component: n for the NOON curve of fig3a, 2n for fig3b
/// (doubled NOON and dual Fock |n,n>).
inline double zeta_scale(Figure f) { return f == Figure::Fig3a ? 1.0 : 2.0; }

inline std::vector<std::string> curve_columns(Figure f) {
    if (f == Figure::Fig3a) {
        return {"mean_n", "snl", "hl", "tmsv_crb", "tmsv_noon_crb", "zeta_noon_crb"};
    }
    return {"mean_n", "noon_crb", "dualfock_crb"};
}

/// Mean photon number of the zeta family of `f` at exponent x.
inline double zeta_family_mean(Figure f, double x, double tol = 1e-14) {
    if (!(x > 2.0)) {
        throw SpecError("zeta family mean photon number diverges for x <= 2");
    }
    return zeta_scale(f) * zeta_extended(x - 1.0, tol) / zeta(x, tol);
}

/// Smallest mean photon number whose zeta state has divergent QFI (x = 3).
inline double divergence_threshold(Figure f, double tol = 1e-14) {
    return zeta_scale(f) * zeta(2.0, tol) / zeta(3.0, tol);
}

/// Exponent x > 2 with zeta_family_mean(f, x) = mean. The mean decreases
/// monotonically from +inf (x -> 2) to scale (x -> inf).
inline double zeta_exponent_for_mean(Figure f, double mean, double tol = 1e-14) {
    const double scale = zeta_scale(f);
    if (!(mean > scale) || !std::isfinite(mean)) {
        throw SpecError("mean photon number " + std::to_string(mean) + " is unreachable: the zeta family needs > " +
                        std::to_string(scale));
    }
    double lo = 2.0;
    double hi = 3.0;
    if (mean < divergence_threshold(f, tol)) {
        lo = 3.0;
        hi = 4.0;
        while (zeta_family_mean(f, hi, tol) > mean) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1100.0) {
                throw SpecError("mean photon number too close to the lower limit of the zeta family");
            }
        }
    }
    // mean(lo) > target >= mean(hi); lo = 2 is the divergent end.
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (zeta_family_mean(f, mid, tol) > mean) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

struct CurveRow {
    double mean_n = 0.0;
    /// Zeta-family exponent behind the zeta columns.
    double x = 0.0;
    bool divergent = false;
    /// One value per curve_columns() entry, mean_n first.
    std::vector<double> values;
    /// QFI partial sums at decade cutoffs, per zeta column, for divergent rows.
    std::vector<std::pair<std::string, std::vector<std::pair<std::int64_t, double>>>> trends;
};

struct CurveTable {
    Figure figure = Figure::Fig3a;
    std::vector<std::string> columns;
    std::vector<CurveRow> rows;
    double threshold = 0.0;
    std::int64_t cutoff = 0;
};

inline void validate(const CurveSpec &spec) {
    if (spec.sweep.empty()) {
        throw SpecError("empty sweep");
    }
    for (std::size_t i = 1; i < spec.sweep.size(); ++i) {
        if (!(spec.sweep[i] > spec.sweep[i - 1])) {
            throw SpecError("sweep values must be strictly increasing");
        }
    }
    if (spec.cutoff < 10) {
        throw SpecError("cutoff must be at least 10");
    }
    if (!(spec.tol > 0.0)) {
        throw SpecError("tolerance must be positive");
    }
}

namespace detail {

inline CurveRow curve_row(const CurveSpec &spec, double value) {
    const Figure f = spec.figure;
    CurveRow row;
    if (spec.kind == SweepKind::Exponent) {
        row.x = value;
        row.mean_n = zeta_family_mean(f, value, spec.tol);
    } else {
        row.mean_n = value;
        row.x = zeta_exponent_for_mean(f, value, spec.tol);
    }
    const double n = row.mean_n;
    const double x = row.x;
    row.divergent = !(x > 3.0) || n >= divergence_threshold(f, spec.tol);
    double z0 = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    if (!row.divergent) {
        z0 = zeta(x, spec.tol);
        z1 = zeta_extended(x - 1.0, spec.tol);
        z2 = zeta_extended(x - 2.0, spec.tol);
    }
    auto crb = [](double qfi) { return 1.0 / std::sqrt(qfi); };
    if (f == Figure::Fig3a) {
        row.values = {n, 1.0 / std::sqrt(n), 1.0 / n, crb(n * n + 2.0 * n), crb(2.0 * n * n + 2.0 * n),
                      row.divergent ? 0.0 : crb(z2 / z0)};
        if (row.divergent) {
            row.trends.emplace_back("zeta_noon_crb", power_law_trend(x, 2, 1.0, spec.cutoff));
        }
    } else {
        row.values = {n, row.divergent ? 0.0 : crb(4.0 * z2 / z0),
                      row.divergent ? 0.0 : crb(2.0 * z2 / z0 + 2.0 * z1 / z0)};
        if (row.divergent) {
            row.trends.emplace_back("noon_crb", power_law_trend(x, 2, 2.0, spec.cutoff));
            auto second = power_law_trend(x, 2, 1.0, spec.cutoff);
            const auto first = power_law_trend(x, 1, 1.0, spec.cutoff);
            for (std::size_t i = 0; i < second.size(); ++i) {
                second[i].second = 2.0 * second[i].second + 2.0 * first[i].second;
            }
            row.trends.emplace_back("dualfock_crb", std::move(second));
        }
    }
    return row;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

/// Rows are computed in parallel and stored in sweep order.
inline CurveTable compute_curves(const CurveSpec &spec) {
    validate(spec);
    CurveTable table;
    table.figure = spec.figure;
    table.columns = curve_columns(spec.figure);
    table.threshold = divergence_threshold(spec.figure, spec.tol);
    table.cutoff = spec.cutoff;
    table.rows.resize(spec.sweep.size());
    parallel_for(spec.sweep.size(), [&](std::size_t i) { table.rows[i] = detail::curve_row(spec, spec.sweep[i]); });
    return table;
}

/// `points` values evenly spaced on [lo, hi].
inline std::vector<double> linear_sweep(double lo, double hi, int points) {
    if (points < 1 || !(lo <= hi) || (points > 1 && !(lo < hi))) {
        throw SpecError("sweep needs lo < hi and at least one point");
    }
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
        out[i] = points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1);
    }
    return out;
}

/// CSV with a leading '#' comment line. 12 significant digits, '\n' endings.
inline std::string curves_csv(const CurveTable &table, const std::string &comment) {
    std::string out = "# " + comment + "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += (c ? "," : "") + table.columns[c];
    }
    out += "\n";
    for (const auto &row : table.rows) {
        for (std::size_t c = 0; c < row.values.size(); ++c) {
            out += (c ? "," : "") + detail::format_number(row.values[c]);
        }
        out += "\n";
    }
    return out;
}

/// Divergence provenance: which rows print 0 and the growth of the QFI
/// partial sums of their states.
inline nlohmann::ordered_json divergence_json(const CurveTable &table) {
    nlohmann::ordered_json j;
    j["figure"] = to_string(table.figure);
    j["threshold_mean_n"] = table.threshold;
    j["cutoff"] = table.cutoff;
    j["rule"] = "CRB printed as 0 where the zeta state has x <= 3 (divergent second moment)";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto &row = table.rows[i];
        if (!row.divergent) {
            continue;
        }
        nlohmann::ordered_json r;
        r["row"] = i;
        r["mean_n"] = row.mean_n;
        r["x"] = row.x;
        nlohmann::ordered_json cols = nlohmann::ordered_json::object();
        for (const auto &[name, trend] : row.trends) {
            nlohmann::ordered_json t = nlohmann::ordered_json::array();
            for (const auto &[k, v] : trend) {
                t.push_back({{"K", k}, {"qfi_partial", v}});
            }
            nlohmann::ordered_json c;
            c["trend"] = std::move(t);
            if (trend.size() >= 2) {
                c["last_decade_increase"] = trend.back().second - trend[trend.size() - 2].second;
            }
            cols[name] = std::move(c);
        }
        r["columns"] = std::move(cols);
        rows.push_back(std::move(r));
    }
    j["divergent_rows"] = std::move(rows);
    return j;
}

/// Polyline plot of every CRB column against mean_n.
inline std::string curves_svg(const CurveTable &table) {
    constexpr double width = 640;
    constexpr double height = 440;
    constexpr double margin = 50;
    double xmin = table.rows.front().mean_n;
    double xmax = table.rows.back().mean_n;
    if (xmin > xmax) {
        std::swap(xmin, xmax);
    }
    if (xmax == xmin) {
        xmax = xmin + 1;
    }
    double ymax = 0.0;
    for (const auto &row : table.rows) {
        for (std::size_t c = 1; c < row.values.size(); ++c) {
            ymax = std::max(ymax, row.values[c]);
        }
    }
    if (ymax <= 0.0) {
        ymax = 1.0;
    }
    static const char *colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#d62728"};
    std::ostringstream s;
    auto px = [&](double v) { return detail::format_number(margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin)); };
    auto py = [&](double v) { return detail::format_number(height - margin - v / ymax * (height - 2 * margin)); };
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    s << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
      << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">mean_n ["
      << detail::format_number(xmin) << ", " << detail::format_number(xmax) << "]</text>\n";
    s << "<text x=\"10\" y=\"" << margin - 10 << "\">delta phi (max " << detail::format_number(ymax) << ")</text>\n";
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        const char *color = colors[(c - 1) % 5];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            s << (r ? " " : "") << px(table.rows[r].mean_n) << "," << py(table.rows[r].values[c]);
        }
        s << "\"/>\n";
        s << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 18 * c << "\" fill=\"" << color << "\">"
          << table.columns[c] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace qfilab

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

// qfilab command-line front end.
//
// Exit codes: 0 success, 2 invalid input, 3 a finite value was requested but
// the computation diverged or was flagged.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfilab/catalog.hpp"
#include "qfilab/curves.hpp"
#include "qfilab/estimation.hpp"
#include "qfilab/fisher.hpp"
#include "qfilab/state_json.hpp"

namespace {

using namespace qfilab;

constexpr const char *kCatalogHelp = R"(States:
  A STATE argument is either a path to a JSON state file or a catalog address
  catalog:<family>:<params>. Families:
    catalog:noon:N                 (|N,0> + |0,N>)/sqrt2
    catalog:dual_fock:N            |N,N>
    catalog:dual_fock_bs:N         closed form of B|N,N>
    catalog:zeta_noon:x:K          NOON(n) weighted n^-x/zeta(x), n <= K
    catalog:zeta_noon_doubled:x:K  NOON(2n), same weights
    catalog:zeta_dual_fock:x:K     |n,n>, same weights
    catalog:tmsv:mean[:K]          two-mode squeezed vacuum
    catalog:tmsv_noon:mean[:K]     NOON(2n) with TMSV weights
  Without K, TMSV families pick the smallest cutoff with tail mass < 1e-10.
  `qfilab catalog list` prints parameter domains.

Exit codes: 0 success, 2 invalid input, 3 divergence or numerical flag where a
finite value was requested.)";

struct Input {
    TwoModeState state;
    Pipeline pipeline = Pipeline::MMZI;
    std::optional<FamilyState> family;
};

std::string read_file(const std::string &path) {
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), {}};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_output(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path + "'");
    }
    out << text;
}

Input load_input(const std::string &source) {
    Input in;
    if (is_catalog_uri(source)) {
        in.family = parse_catalog(source);
        in.state = in.family->state;
        in.pipeline = in.family->pipeline;
    } else {
        in.state = read_state_json(read_file(source));
    }
    return in;
}

Pipeline parse_pipeline(const std::string &name, Pipeline fallback) {
    if (name.empty()) {
        return fallback;
    }
    if (name == "mzi" || name == "MZI") {
        return Pipeline::MZI;
    }
    if (name == "mmzi" || name == "MMZI") {
        return Pipeline::MMZI;
    }
    throw ValidationError("pipeline must be mzi or mmzi, got '" + name + "'");
}

std::string join_args(int argc, char **argv) {
    std::string out;
    for (int i = 1; i < argc; ++i) {
        out += (i > 1 ? " " : "") + std::string(argv[i]);
    }
    return out;
}

std::string fmt(double v) { return qfilab::detail::format_number(v); }

struct CurveOptions {
    double mean_min = 0.0;
    double mean_max = 5.0;
    int points = 400;
    std::vector<double> exponents;
    std::int64_t cutoff = 10000;
    double tol = 1e-14;
    std::string out;
    std::string sidecar;
    std::string svg;
};

void add_curve_command(CLI::App &app, const std::string &name, Figure figure, double default_min,
                       const std::string &args, std::function<void()> &action) {
    auto opts = std::make_shared<CurveOptions>();
    opts->mean_min = default_min;
    auto *cmd = app.add_subcommand(name, figure == Figure::Fig3a
                                             ? "phase uncertainty curves: SNL, HL, TMSV, TMSV-NOON, zeta-NOON"
                                             : "phase uncertainty curves: zeta-weighted NOON(2n) vs dual Fock");
    cmd->add_option("--x-min", opts->mean_min, "smallest mean photon number of the sweep")->capture_default_str();
    cmd->add_option("--x-max", opts->mean_max, "largest mean photon number of the sweep")->capture_default_str();
    cmd->add_option("--points", opts->points, "number of sweep points")->capture_default_str();
    cmd->add_option("--exponents", opts->exponents, "sweep zeta exponents x instead of mean photon numbers");
    cmd->add_option("--cutoff", opts->cutoff, "largest partial-sum cutoff recorded for divergent rows")
        ->capture_default_str();
    cmd->add_option("--tol", opts->tol, "zeta evaluation tolerance")->capture_default_str();
    cmd->add_option("--out", opts->out, "CSV output path (default stdout)");
    cmd->add_option("--sidecar", opts->sidecar, "divergence JSON path (default <out>.divergence.json)");
    cmd->add_option("--svg", opts->svg, "also write an SVG plot to this path");
    cmd->callback([&action, opts, figure, name, args] {
        action = [opts, figure, name, args] {
            CurveSpec spec;
            spec.figure = figure;
            spec.cutoff = opts->cutoff;
            spec.tol = opts->tol;
            if (!opts->exponents.empty()) {
                spec.kind = SweepKind::Exponent;
                spec.sweep = opts->exponents;
            } else {
                spec.sweep = linear_sweep(opts->mean_min, opts->mean_max, opts->points);
            }
            const auto table = compute_curves(spec);
            const std::string comment = std::string("qfilab ") + QFILAB_VERSION + " " + name + " flags: " + args +
                                        " cutoff=" + std::to_string(spec.cutoff);
            write_output(opts->out, curves_csv(table, comment));
            std::string sidecar = opts->sidecar;
            if (sidecar.empty() && !opts->out.empty() && opts->out != "-") {
                sidecar = opts->out + ".divergence.json";
            }
            if (!sidecar.empty()) {
                write_output(sidecar, divergence_json(table).dump(2) + "\n");
            }
            if (!opts->svg.empty()) {
                write_output(opts->svg, curves_svg(table));
            }
        };
    });
}

nlohmann::ordered_json trend_json(const std::vector<std::pair<std::int64_t, double>> &trend) {
    nlohmann::ordered_json t = nlohmann::ordered_json::array();
    for (const auto &[k, v] : trend) {
        t.push_back({{"K", k}, {"value", v}});
    }
    return t;
}

int run(int argc, char **argv) {
    CLI::App app{"qfilab: Fisher information and phase estimation for two-path interferometers"};
    app.set_version_flag("--version", std::string("qfilab ") + QFILAB_VERSION);
    app.footer(kCatalogHelp);
    app.require_subcommand(1);
    const std::string args = join_args(argc, argv);
    std::function<void()> action;
    int exit_code = 0;

    add_curve_command(app, "fig3a", Figure::Fig3a, 1.01, args, action);
    add_curve_command(app, "fig3b", Figure::Fig3b, 2.01, args, action);

    // qfi
    std::string qfi_state;
    std::string qfi_pipeline;
    std::string qfi_out;
    double qfi_phi = 0.0;
    bool family_limit = false;
    bool qfi_require_finite = false;
    auto *qfi = app.add_subcommand("qfi", "QFI, counting FI and CRB of a state as JSON");
    qfi->add_option("state", qfi_state, "state file or catalog address")->required();
    qfi->add_option("--pipeline", qfi_pipeline, "mzi or mmzi (default: the family's own, mmzi for files)");
    qfi->add_option("--phi", qfi_phi, "phase at which the counting FI is evaluated")->capture_default_str();
    qfi->add_flag("--family-limit", family_limit, "report the untruncated family QFI (catalog states)");
    qfi->add_flag("--require-finite", qfi_require_finite, "exit 3 if the QFI diverges or the FI is flagged");
    qfi->add_option("--out", qfi_out, "output path (default stdout)");
    qfi->callback([&] {
        action = [&] {
            const Input in = load_input(qfi_state);
            const Pipeline p = parse_pipeline(qfi_pipeline, in.pipeline);
            FisherReport r = classical_fi(in.state, qfi_phi, p);
            nlohmann::ordered_json extra;
            if (family_limit) {
                if (!in.family) {
                    throw ValidationError("--family-limit needs a catalog state");
                }
                const Moment &m = in.family->qfi;
                extra["qfi_truncated"] = r.qfi;
                if (m.divergent) {
                    r.qfi_divergent = true;
                    extra["qfi_trend"] = trend_json(m.trend);
                } else if (m.limit) {
                    r.qfi = *m.limit;
                }
            }
            nlohmann::ordered_json j = nlohmann::ordered_json::parse(report_to_json(r).dump());
            j["state"] = qfi_state;
            j["photon_cutoff"] = in.state.cutoff();
            for (auto &[k, v] : extra.items()) {
                j[k] = v;
            }
            write_output(qfi_out, j.dump(2) + "\n");
            if (qfi_require_finite && (r.qfi_divergent || r.singular)) {
                std::cerr << "qfilab: " << (r.qfi_divergent ? "QFI diverges" : "FI flagged singular")
                          << " but a finite value was required\n";
                exit_code = 3;
            }
        };
    });

    // fi-scan
    std::string scan_state;
    std::string scan_pipeline;
    std::string scan_out;
    double phi_min = 0.0;
    double phi_max = std::numbers::pi;
    int scan_points = 101;
    bool scan_require_finite = false;
    auto *scan = app.add_subcommand("fi-scan", "counting FI and QFI over a phase grid as CSV");
    scan->add_option("state", scan_state, "state file or catalog address")->required();
    scan->add_option("--pipeline", scan_pipeline, "mzi or mmzi");
    scan->add_option("--phi-min", phi_min, "first grid phase")->capture_default_str();
    scan->add_option("--phi-max", phi_max, "last grid phase")->capture_default_str();
    scan->add_option("--points", scan_points, "grid points")->capture_default_str();
    scan->add_flag("--require-finite", scan_require_finite, "exit 3 if any grid point is flagged singular");
    scan->add_option("--out", scan_out, "CSV output path (default stdout)");
    scan->callback([&] {
        action = [&] {
            const Input in = load_input(scan_state);
            const Pipeline p = parse_pipeline(scan_pipeline, in.pipeline);
            const auto reports = fi_scan(in.state, p, phase_grid(phi_min, phi_max, scan_points));
            std::string csv = std::string("# qfilab ") + QFILAB_VERSION + " fi-scan flags: " + args +
                              " cutoff=" + std::to_string(in.state.cutoff()) + "\nphi,fi,qfi\n";
            bool singular = false;
            for (const auto &r : reports) {
                csv += fmt(r.phi) + "," + fmt(r.fi) + "," + fmt(r.qfi) + "\n";
                singular = singular || r.singular;
            }
            write_output(scan_out, csv);
            if (singular) {
                std::cerr << "qfilab: FI flagged singular at some grid points\n";
                if (scan_require_finite) {
                    exit_code = 3;
                }
            }
        };
    });

    // estimate
    std::string est_state;
    std::string est_pipeline;
    std::string est_out;
    double phi_true = 0.0;
    std::int64_t trials = 1000;
    std::int64_t repetitions = 100;
    std::uint64_t seed = 0;
    std::optional<double> win_lo;
    std::optional<double> win_hi;
    MleOptions mle;
    auto *est = app.add_subcommand("estimate", "seeded sampling + MLE, one JSON line per run and a summary");
    est->add_option("state", est_state, "state file or catalog address")->required();
    est->add_option("--pipeline", est_pipeline, "mzi or mmzi");
    est->add_option("--phi-true", phi_true, "true phase")->required();
    est->add_option("--trials", trials, "detection events M per run")->capture_default_str();
    est->add_option("--repetitions", repetitions, "independent runs")->capture_default_str();
    est->add_option("--seed", seed, "master seed")->capture_default_str();
    est->add_option("--phi-min", win_lo, "estimation window start (default: local identifiable window)");
    est->add_option("--phi-max", win_hi, "estimation window end");
    est->add_option("--points", mle.grid_points, "coarse likelihood grid points")->capture_default_str();
    est->add_option("--tol", mle.tolerance, "refinement tolerance in phi")->capture_default_str();
    est->add_option("--out", est_out, "output path (default stdout)");
    est->callback([&] {
        action = [&] {
            const Input in = load_input(est_state);
            const LikelihoodModel model(in.state, parse_pipeline(est_pipeline, in.pipeline));
            EstimationRequest req;
            req.phi_true = phi_true;
            req.trials = trials;
            req.repetitions = repetitions;
            req.seed = seed;
            req.mle = mle;
            if (win_lo || win_hi) {
                if (!win_lo || !win_hi) {
                    throw ValidationError("--phi-min and --phi-max go together");
                }
                req.window = Window{*win_lo, *win_hi};
            }
            const auto result = estimate_phase(model, req);
            std::string text;
            for (const auto &r : result.runs) {
                text += run_to_json(r).dump() + "\n";
            }
            text += summary_to_json(result.summary).dump() + "\n";
            write_output(est_out, text);
        };
    });

    // catalog
    auto *catalog = app.add_subcommand("catalog", "catalog states");
    catalog->require_subcommand(1);
    auto *list = catalog->add_subcommand("list", "families and parameter domains");
    list->callback([&] {
        action = [] {
            auto pad = [](std::string s, std::size_t w) { return s.size() < w ? s + std::string(w - s.size(), ' ') : s + " "; };
            std::string text = pad("family", 19) + pad("address", 36) + pad("domain", 18) + pad("pipeline", 9) +
                               "description\n";
            for (const auto &f : catalog_families()) {
                text += pad(f.name, 19) + pad("catalog:" + f.name + ":" + f.params, 36) + pad(f.domain, 18) +
                        pad(f.pipeline, 9) + f.description + "\n";
            }
            std::cout << text;
        };
    });
    std::string write_uri;
    std::string write_out;
    auto *write = catalog->add_subcommand("write", "write a catalog state as a JSON state file");
    write->add_option("address", write_uri, "catalog address")->required();
    write->add_option("--out", write_out, "output path (default stdout)");
    write->callback([&] {
        action = [&] {
            if (!is_catalog_uri(write_uri)) {
                throw ValidationError("expected a catalog address");
            }
            write_output(write_out, write_state_json(parse_catalog(write_uri).state));
        };
    });

    // state validate
    auto *state = app.add_subcommand("state", "state files");
    state->require_subcommand(1);
    std::string validate_path;
    auto *validate_cmd = state->add_subcommand("validate", "check a JSON state file");
    validate_cmd->add_option("file", validate_path, "state file ('-' for stdin)")->required();
    validate_cmd->callback([&] {
        action = [&] {
            const auto s = read_state_json(read_file(validate_path));
            nlohmann::ordered_json j;
            j["valid"] = true;
            j["entries"] = s.size();
            j["cutoff"] = s.cutoff();
            j["max_total"] = s.max_total();
            j["sectors"] = s.occupied_sectors();
            std::cout << j.dump() << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (action) {
        action();
    }
    return exit_code;
}

}  // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const qfilab::NumericalFlag &e) {
        std::cerr << "qfilab: " << e.what() << "\n";
        return 3;
    } catch (const qfilab::Error &e) {
        std::cerr << "qfilab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "qfilab: " << e.what() << "\n";
        return 1;
    }
}

// Command-line front end: path amplitudes, weak/strong statistics, Gaussian
// pointer simulation and Monte Carlo trials over scenario documents or the
// built-in library. Exit codes: 0 success, 2 input/validation error,
// 3 undefined quantity (failed post-selection), 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathsim/pathsim.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pathsim;

constexpr const char* tool_version = "pathsim 1.0.0";

/// Round to `digits` significant digits so machine payloads are stable and
/// re-runs are byte-identical.
double round_sig(double x, int digits = 12) {
    if (x == 0.0 || !std::isfinite(x)) return x == 0.0 ? 0.0 : x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

ordered_json jc(const Complex& z) {
    return ordered_json{{"re", round_sig(z.real())}, {"im", round_sig(z.imag())}};
}

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string fmt_complex(const Complex& z) {
    return fmt6(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt6(std::abs(z.imag())) + "i" +
           "  (|.| " + fmt6(std::abs(z)) + ", arg " + fmt6(std::arg(z)) + ")";
}

struct ScenarioInput {
    std::string builtin_name;
    std::string file;

    ScenarioSpec load(ordered_json& echo) const {
        if (!builtin_name.empty() && !file.empty())
            throw InvalidArgumentError("give either --builtin or --scenario, not both");
        if (!builtin_name.empty()) {
            echo["source"] = "builtin";
            echo["scenario"] = builtin_name;
            return builtin(builtin_name);
        }
        if (file.empty()) throw InvalidArgumentError("one of --builtin or --scenario is required");
        std::ifstream in(file, std::ios::binary);
        if (!in) throw InvalidArgumentError("cannot open scenario file '" + file + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        echo["source"] = "file";
        echo["scenario"] = file;
        return parse_scenario(buf.str());
    }
};

PathFunctional resolve_functional(const ScenarioSpec& spec, const std::string& functional, const std::string& meter,
                                  const PathwaySet& paths, ordered_json& echo) {
    if (functional.empty() == meter.empty())
        throw InvalidArgumentError("exactly one of --functional or --meter is required");
    std::string fname = functional;
    if (!meter.empty()) {
        auto it = spec.meters.find(meter);
        if (it == spec.meters.end()) throw InvalidArgumentError("unknown meter '" + meter + "'");
        fname = it->second;
        echo["meter"] = meter;
    }
    auto it = spec.functionals.find(fname);
    if (it == spec.functionals.end()) throw InvalidArgumentError("unknown functional '" + fname + "'");
    echo["functional"] = fname;
    return make_functional(spec, it->second, paths);
}

void emit(const std::string& command, const std::string& digest, const ordered_json& inputs, const ordered_json& results,
          const std::string& format, const std::string& human) {
    if (format == "json") {
        ordered_json report;
        report["command"] = command;
        report["version"] = tool_version;
        report["scenario_digest"] = digest;
        report["inputs"] = inputs;
        report["results"] = results;
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << human;
    }
}

// ---------------------------------------------------------------------------
// amplitudes
// ---------------------------------------------------------------------------

int cmd_amplitudes(const ScenarioInput& src, const std::string& format) {
    ordered_json inputs;
    const ScenarioSpec spec = src.load(inputs);
    const PathwaySet ps = enumerate_paths(spec);

    ordered_json results;
    auto paths = ordered_json::array();
    std::ostringstream human;
    human << "scenario: " << spec.name << "  (digest " << ps.scenario_digest() << ")\n"
          << "paths: " << ps.size() << "\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Complex a = ps.amplitude(i);
        ordered_json row;
        row["path"] = i;
        row["indices"] = ps.path(i).indices;
        row["re"] = round_sig(a.real());
        row["im"] = round_sig(a.imag());
        row["modulus"] = round_sig(std::abs(a));
        row["phase"] = round_sig(std::arg(a));
        paths.push_back(std::move(row));
        human << "  path " << i << "  [";
        for (std::size_t s = 0; s < ps.path(i).indices.size(); ++s)
            human << (s ? " " : "") << ps.path(i).indices[s];
        human << "]  A = " << fmt_complex(a) << "\n";
    }
    results["paths"] = std::move(paths);
    results["total"] = jc(ps.total_amplitude());
    human << "total transition amplitude: " << fmt_complex(ps.total_amplitude()) << "\n";

    emit("amplitudes", ps.scenario_digest(), inputs, results, format, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// weak
// ---------------------------------------------------------------------------

int cmd_weak(const ScenarioInput& src, const std::string& functional, const std::string& meter, const std::string& format) {
    ordered_json inputs;
    const ScenarioSpec spec = src.load(inputs);
    const PathwaySet ps = enumerate_paths(spec);
    const PathFunctional f = resolve_functional(spec, functional, meter, ps, inputs);
    const BranchDecomposition br = coarse_grain(ps, f);
    const WeakResult w = weak_statistics(br);
    const SumRuleReport rule = check_sum_rule(br);

    ordered_json results;
    auto branches = ordered_json::array();
    std::ostringstream human;
    human << "scenario: " << spec.name << "\nbranches: " << br.size() << "\n";
    for (std::size_t k = 0; k < br.size(); ++k) {
        ordered_json row;
        row["value"] = round_sig(br.branch_values[k]);
        row["amplitude"] = jc(br.branch_amplitudes[k]);
        row["alpha"] = jc(w.relative_amplitudes[k]);
        branches.push_back(std::move(row));
        human << "  F = " << fmt6(br.branch_values[k]) << "  Atilde = " << fmt_complex(br.branch_amplitudes[k])
              << "  alpha = " << fmt_complex(w.relative_amplitudes[k]) << "\n";
    }
    results["branches"] = std::move(branches);
    results["weak_value"] = jc(w.weak_value);
    results["real_shift"] = round_sig(w.real_shift);
    results["imag_shift"] = round_sig(w.imag_shift);
    results["sum_rule"] = ordered_json{{"weighted_amplitude_sum", jc(rule.weighted_amplitude_sum)},
                                       {"is_null", rule.is_null},
                                       {"tol", rule.tol}};
    human << "weak value: " << fmt_complex(w.weak_value) << "\n"
          << "sum rule sum(F_k * Atilde_k) = " << fmt_complex(rule.weighted_amplitude_sum) << "  -> "
          << (rule.is_null ? "NULL" : "NON-NULL") << "\n";

    emit("weak", ps.scenario_digest(), inputs, results, format, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// strong
// ---------------------------------------------------------------------------

int cmd_strong(const ScenarioInput& src, const std::string& functional, const std::string& meter, const std::string& format) {
    ordered_json inputs;
    const ScenarioSpec spec = src.load(inputs);
    const PathwaySet ps = enumerate_paths(spec);
    const PathFunctional f = resolve_functional(spec, functional, meter, ps, inputs);
    const BranchDecomposition br = coarse_grain(ps, f);
    const StrongResult s = strong_statistics(br);
    require_conditional_mean(s);
    const SumRuleReport rule = strong_sum_rule(s);

    ordered_json results;
    auto branches = ordered_json::array();
    std::ostringstream human;
    human << "scenario: " << spec.name << "\nbranches: " << br.size() << "\n";
    for (std::size_t k = 0; k < br.size(); ++k) {
        ordered_json row;
        row["value"] = round_sig(s.branch_values[k]);
        row["probability"] = round_sig(s.probabilities[k]);
        branches.push_back(std::move(row));
        human << "  F = " << fmt6(s.branch_values[k]) << "  P = " << fmt6(s.probabilities[k]) << "\n";
    }
    results["branches"] = std::move(branches);
    results["postselect_prob"] = round_sig(s.postselect_prob);
    results["conditional_mean"] = round_sig(*s.conditional_mean);
    results["sum_rule"] = ordered_json{{"weighted_probability_sum", jc(rule.weighted_amplitude_sum)},
                                       {"is_null", rule.is_null},
                                       {"tol", rule.tol}};
    human << "post-selection probability: " << fmt6(s.postselect_prob) << "\n"
          << "conditional mean <f>_s: " << fmt6(*s.conditional_mean) << "\n"
          << "sum rule sum(F_k * P_k) = " << fmt6(rule.weighted_amplitude_sum.real()) << "  -> "
          << (rule.is_null ? "NULL" : "NON-NULL") << "\n";

    emit("strong", ps.scenario_digest(), inputs, results, format, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// pointer
// ---------------------------------------------------------------------------

std::vector<double> parse_sweep(const std::string& sweep, int points) {
    // lo:hi:log or lo:hi:lin
    std::vector<std::string> parts;
    std::stringstream ss(sweep);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3 || (parts[2] != "log" && parts[2] != "lin"))
        throw InvalidArgumentError("--sweep expects lo:hi:log or lo:hi:lin");
    char* end = nullptr;
    const double lo = std::strtod(parts[0].c_str(), &end);
    const double hi = std::strtod(parts[1].c_str(), &end);
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > lo))
        throw InvalidArgumentError("--sweep needs 0 < lo < hi");
    if (points < 2) throw InvalidArgumentError("--sweep-points must be at least 2");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        out.push_back(parts[2] == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return out;
}

void write_sweep_svg(const std::string& file, const std::vector<SweepRow>& rows, bool log_x) {
    const int W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto xval = [&](double r) { return log_x ? std::log10(r) : r; };
    for (const auto& row : rows) {
        xmin = std::min(xmin, xval(row.ratio));
        xmax = std::max(xmax, xval(row.ratio));
        ymin = std::min(ymin, row.normalized_shift);
        ymax = std::max(ymax, row.normalized_shift);
        if (row.weak_prediction) { ymin = std::min(ymin, *row.weak_prediction); ymax = std::max(ymax, *row.weak_prediction); }
        if (row.strong_prediction) { ymin = std::min(ymin, *row.strong_prediction); ymax = std::max(ymax, *row.strong_prediction); }
    }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double r) { return ml + (xval(r) - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream svg(file);
    if (!svg) throw InvalidArgumentError("cannot write plot file '" + file + "'");
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb << "' stroke='black'/>\n";
    auto hline = [&](double y, const char* color, const char* label) {
        svg << "<line x1='" << ml << "' y1='" << py(y) << "' x2='" << W - mr << "' y2='" << py(y) << "' stroke='"
            << color << "' stroke-dasharray='6,4'/>\n"
            << "<text x='" << W - mr - 4 << "' y='" << py(y) - 4 << "' text-anchor='end' font-size='11' fill='" << color
            << "'>" << label << "</text>\n";
    };
    if (rows.front().weak_prediction) hline(*rows.front().weak_prediction, "#b22222", "weak prediction");
    if (rows.front().strong_prediction) hline(*rows.front().strong_prediction, "#1e6eb4", "strong prediction");
    svg << "<polyline fill='none' stroke='#222222' stroke-width='1.5' points='";
    for (const auto& row : rows) svg << px(row.ratio) << "," << py(row.normalized_shift) << " ";
    svg << "'/>\n";
    for (const auto& row : rows)
        svg << "<circle cx='" << px(row.ratio) << "' cy='" << py(row.normalized_shift) << "' r='2.4' fill='#222222'/>\n";
    svg << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 14 << "' text-anchor='middle' font-size='12'>"
        << (log_x ? "coupling / width (log10)" : "coupling / width") << "</text>\n"
        << "<text x='16' y='" << (mt + H - mb) / 2 << "' font-size='12' transform='rotate(-90 16 "
        << (mt + H - mb) / 2 << ")' text-anchor='middle'>normalized shift</text>\n"
        << "<text x='" << ml << "' y='" << H - mb + 16 << "' font-size='11'>" << fmt6(rows.front().ratio) << "</text>\n"
        << "<text x='" << W - mr << "' y='" << H - mb + 16 << "' text-anchor='end' font-size='11'>"
        << fmt6(rows.back().ratio) << "</text>\n"
        << "<text x='" << ml - 6 << "' y='" << py(ymin + pad) << "' text-anchor='end' font-size='11'>"
        << fmt6(ymin + pad) << "</text>\n"
        << "<text x='" << ml - 6 << "' y='" << py(ymax - pad) << "' text-anchor='end' font-size='11'>"
        << fmt6(ymax - pad) << "</text>\n</svg>\n";
}

int cmd_pointer(const ScenarioInput& src, const std::string& functional, const std::string& meter, double coupling,
                double width, const std::string& readout, int grid_points, const std::string& sweep, int sweep_points,
                const std::string& plot, const std::string& format) {
    ordered_json inputs;
    const ScenarioSpec spec = src.load(inputs);
    const PathwaySet ps = enumerate_paths(spec);
    const PathFunctional f = resolve_functional(spec, functional, meter, ps, inputs);
    const BranchDecomposition br = coarse_grain(ps, f);

    MeterConfig mc{coupling, width, readout == "momentum" ? Readout::momentum : Readout::position};
    validate_meter(mc);
    inputs["coupling"] = round_sig(coupling);
    inputs["width"] = round_sig(width);
    inputs["readout"] = readout;
    inputs["grid_points"] = grid_points;

    ordered_json results;
    std::ostringstream human;
    human << "scenario: " << spec.name << "\n";

    if (!sweep.empty()) {
        inputs["sweep"] = sweep;
        inputs["sweep_points"] = sweep_points;
        const std::vector<double> ratios = parse_sweep(sweep, sweep_points);
        const std::vector<SweepRow> rows = regime_sweep(br, mc, ratios, grid_points);
        auto table = ordered_json::array();
        human << "ratio (coupling/width)   shift/coupling   weak_pred   strong_pred\n";
        for (const auto& row : rows) {
            ordered_json r;
            r["ratio"] = round_sig(row.ratio);
            r["normalized_shift"] = round_sig(row.normalized_shift);
            r["weak_prediction"] = row.weak_prediction ? ordered_json(round_sig(*row.weak_prediction)) : ordered_json();
            r["strong_prediction"] =
                row.strong_prediction ? ordered_json(round_sig(*row.strong_prediction)) : ordered_json();
            table.push_back(std::move(r));
            human << "  " << fmt6(row.ratio) << "\t" << fmt6(row.normalized_shift) << "\t"
                  << (row.weak_prediction ? fmt6(*row.weak_prediction) : "undefined") << "\t"
                  << (row.strong_prediction ? fmt6(*row.strong_prediction) : "undefined") << "\n";
        }
        results["sweep"] = std::move(table);
        if (!plot.empty()) {
            write_sweep_svg(plot, rows, sweep.find(":log") != std::string::npos);
            results["plot"] = plot;
            human << "plot written to " << plot << "\n";
        }
    } else {
        const PointerDistribution dist = entangle_and_postselect(br, mc, grid_points);
        const double mean_x = pointer_mean_position(dist);
        const double mean_p = pointer_mean_momentum(dist);
        const PointerMeans analytic = analytic_pointer_mean(br, mc);
        std::optional<double> weak_re, weak_im;
        try {
            const WeakResult w = weak_statistics(br);
            weak_re = w.real_shift;
            weak_im = w.imag_shift;
        } catch (const PostselectionError&) {
        }
        const StrongResult s = strong_statistics(br);

        results["mean_position"] = round_sig(mean_x);
        results["mean_momentum"] = round_sig(mean_p);
        results["analytic_position"] = round_sig(analytic.position);
        results["analytic_momentum"] = round_sig(analytic.momentum);
        results["norm2"] = round_sig(dist.norm2);
        results["normalized_shift"] = round_sig(mean_x / mc.coupling);
        results["weak_prediction"] =
            weak_re ? ordered_json{{"re", round_sig(*weak_re)}, {"im", round_sig(*weak_im)}} : ordered_json();
        results["strong_prediction"] = s.conditional_mean ? ordered_json(round_sig(*s.conditional_mean)) : ordered_json();
        const double headline = mc.readout == Readout::momentum ? mean_p : mean_x;
        results["mean_shift"] = round_sig(headline);

        human << "mean pointer shift (" << readout << " readout): " << fmt6(headline) << "\n"
              << "  grid:     position " << fmt6(mean_x) << ", momentum " << fmt6(mean_p) << "\n"
              << "  analytic: position " << fmt6(analytic.position) << ", momentum " << fmt6(analytic.momentum) << "\n"
              << "  post-selected norm^2: " << fmt6(dist.norm2) << "\n"
              << "  weak prediction Re[B_w]: " << (weak_re ? fmt6(*weak_re) : "undefined")
              << ", strong prediction <f>_s: " << (s.conditional_mean ? fmt6(*s.conditional_mean) : "undefined") << "\n";
    }

    emit("pointer", ps.scenario_digest(), inputs, results, format, human.str());
    return 0;
}

// ---------------------------------------------------------------------------
// montecarlo
// ---------------------------------------------------------------------------

int cmd_montecarlo(const ScenarioInput& src, const std::string& functional, const std::string& meter,
                   std::uint64_t trials, std::uint64_t seed, unsigned workers, const std::string& format) {
    ordered_json inputs;
    const ScenarioSpec spec = src.load(inputs);
    const PathwaySet ps = enumerate_paths(spec);
    const PathFunctional f = resolve_functional(spec, functional, meter, ps, inputs);
    const BranchDecomposition br = coarse_grain(ps, f);
    const TrialDistribution dist = trial_distribution(spec, br);
    const TrialTally tally = sample_trials(dist, trials, seed, workers);
    const StrongResult s = strong_statistics(br);
    const EstimatorResult est = estimate(tally, br.branch_values, s.probabilities);

    inputs["trials"] = trials;
    inputs["seed"] = seed;
    inputs["workers"] = workers;
    inputs["block_size"] = tally.block_size;

    ordered_json results;
    auto branches = ordered_json::array();
    std::ostringstream human;
    human << "scenario: " << spec.name << "\ntrials: " << trials << "  seed: " << seed << "  workers: " << workers
          << "  block_size: " << tally.block_size << "\n";
    for (std::size_t k = 0; k < br.size(); ++k) {
        ordered_json row;
        row["value"] = round_sig(br.branch_values[k]);
        row["success_count"] = tally.success[k];
        row["failure_count"] = tally.failure[k];
        row["frequency"] = round_sig(est.frequencies[k]);
        row["exact_probability"] = round_sig(s.probabilities[k]);
        branches.push_back(std::move(row));
        human << "  F = " << fmt6(br.branch_values[k]) << "  M(+1) = " << tally.success[k]
              << "  M(-1) = " << tally.failure[k] << "  omega = " << fmt6(est.frequencies[k])
              << "  P = " << fmt6(s.probabilities[k]) << "\n";
    }
    results["branches"] = std::move(branches);
    results["postselected"] = est.postselected;
    results["estimate"] = round_sig(est.conditional_mean_estimate);
    results["std_error"] = round_sig(est.std_error);
    results["exact_conditional_mean"] = s.conditional_mean ? ordered_json(round_sig(*s.conditional_mean)) : ordered_json();
    human << "post-selected trials: " << est.postselected << "\n"
          << "estimate B_s: " << fmt6(est.conditional_mean_estimate) << "  (std error " << fmt6(est.std_error) << ")\n";
    if (s.conditional_mean) human << "exact <f>_s: " << fmt6(*s.conditional_mean) << "\n";

    emit("montecarlo", ps.scenario_digest(), inputs, results, format, human.str());
    return 0;
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << "  [" << d.code << "] " << d.location << ": " << d.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"virtual-pathway simulator for pre- and post-selected systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    ScenarioInput src;
    std::string format = "human";
    std::string functional, meter;

    auto add_common = [&](CLI::App* sub, bool with_functional) {
        sub->add_option("--builtin", src.builtin_name, "built-in scenario name");
        sub->add_option("--scenario", src.file, "scenario JSON file");
        sub->add_option("--format", format, "output format: human|json")
            ->check(CLI::IsMember({"human", "json"}));
        if (with_functional) {
            sub->add_option("--functional", functional, "functional name from the scenario");
            sub->add_option("--meter", meter, "meter label from the scenario");
        }
    };

    auto* amp = app.add_subcommand("amplitudes", "enumerate virtual paths and their amplitudes");
    add_common(amp, false);

    auto* weak = app.add_subcommand("weak", "relative amplitudes, weak value and sum rule");
    add_common(weak, true);

    auto* strong = app.add_subcommand("strong", "branch probabilities and conditional mean");
    add_common(strong, true);

    auto* pointer = app.add_subcommand("pointer", "Gaussian pointer simulation");
    add_common(pointer, true);
    double coupling = 1.0, width = 1.0;
    std::string readout = "position", sweep, plot;
    int grid_points = 4096, sweep_points = 25;
    pointer->add_option("--coupling", coupling, "meter coupling (shift per functional unit)");
    pointer->add_option("--width", width, "initial pointer spread");
    pointer->add_option("--readout", readout, "position|momentum")->check(CLI::IsMember({"position", "momentum"}));
    pointer->add_option("--grid-points", grid_points, "grid resolution (>= 512)");
    pointer->add_option("--sweep", sweep, "ratio sweep lo:hi:log or lo:hi:lin");
    pointer->add_option("--sweep-points", sweep_points, "number of sweep ratios");
    pointer->add_option("--plot", plot, "write an SVG of the sweep");

    auto* mc = app.add_subcommand("montecarlo", "seeded strong-measurement trials with post-selection");
    add_common(mc, true);
    std::uint64_t trials = 100000, seed = 1;
    unsigned workers = 1;
    mc->add_option("--trials", trials, "number of trials");
    mc->add_option("--seed", seed, "64-bit RNG seed");
    mc->add_option("--workers", workers, "worker partition count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (amp->parsed()) return cmd_amplitudes(src, format);
        if (weak->parsed()) return cmd_weak(src, functional, meter, format);
        if (strong->parsed()) return cmd_strong(src, functional, meter, format);
        if (pointer->parsed())
            return cmd_pointer(src, functional, meter, coupling, width, readout, grid_points, sweep, sweep_points, plot,
                               format);
        if (mc->parsed()) return cmd_montecarlo(src, functional, meter, trials, seed, workers, format);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        print_diagnostics(e.diagnostics());
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: scenario validation failed\n";
        print_diagnostics(e.diagnostics());
        return 2;
    } catch (const PostselectionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}

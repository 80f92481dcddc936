#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dnpsim/analytic.hpp"
#include "dnpsim/engine.hpp"
#include "dnpsim/errors.hpp"
#include "dnpsim/floquet.hpp"
#include "dnpsim/propagation.hpp"
#include "dnpsim/report.hpp"

namespace dnp::cli {

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<double> t_start;
    std::optional<double> t_stop;
    std::size_t steps = 101;
    std::string protocol = "pulsepol";
    int harmonic = 3;
    unsigned n_p = 4;
    unsigned reps = 100;
    double wait_us = kDefaultWaitUs;
    std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
    std::string coupling = "projector";
    double rabi = 0.0;
    std::string sign = "raw";
    std::string scale = "half";
};

struct SpectrumArgs {
    double gap_threshold = 1.0;
    unsigned max_refine = 6;
    std::string crossings_out;
};

struct SweepArgs {
    double envelope_tol = 0.0;
};

struct ScheduleArgs {
    std::vector<std::string> stages;
};

struct CompareArgs {
    std::string blockade;
    double window = 0.3;
    int dip_orders = 3;
    bool no_full = false;
};

void add_common(CLI::App* app, Common& c, bool grid_required, bool formatted) {
    app->add_option("--config", c.config, "Register JSON file")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "Output CSV path, '-' for stdout")->required();
    auto* start = app->add_option("--t-start", c.t_start, "First protocol period T, µs");
    auto* stop = app->add_option("--t-stop", c.t_stop, "Last protocol period T, µs");
    if (grid_required) {
        start->required();
        stop->required();
    }
    app->add_option("--steps", c.steps, "Grid points")->capture_default_str();
    app->add_option("--protocol", c.protocol, "pulsepol or cpmg")->capture_default_str();
    app->add_option("--harmonic", c.harmonic, "Resonance harmonic k")->capture_default_str();
    app->add_option("--np", c.n_p, "Protocol cycles per repetition")->capture_default_str();
    app->add_option("--reps", c.reps, "Repetitions R")->capture_default_str();
    app->add_option("--wait-us", c.wait_us, "Wait between repetitions, µs")->capture_default_str();
    app->add_option("--workers", c.workers, "Worker threads")->capture_default_str();
    app->add_option("--coupling", c.coupling, "projector or symmetric")->capture_default_str();
    app->add_option("--rabi", c.rabi, "Finite-pulse Rabi frequency, rad/µs (0 = ideal pulses)")->capture_default_str();
    if (formatted) {
        app->add_option("--sign", c.sign, "raw or flip")->capture_default_str();
        app->add_option("--scale", c.scale, "half ([-1/2, 1/2]) or unit ([-1, 1])")->capture_default_str();
    }
}

PulseMode pulse_mode(const Common& c) {
    if (c.rabi < 0.0) throw ValidationError("rabi", "must be >= 0");
    return c.rabi > 0.0 ? PulseMode::finite(c.rabi) : PulseMode::ideal();
}

void check_common(const Common& c) {
    if (c.workers < 1) throw ValidationError("workers", "must be >= 1");
    if (c.harmonic < 1) throw ValidationError("harmonic", "must be >= 1");
    if (c.steps < 2) throw ValidationError("steps", "must be >= 2");
}

std::vector<double> grid_of(const Common& c) { return linear_grid(*c.t_start, *c.t_stop, c.steps); }

/// Open `path` for writing, or use `fallback` for "-".
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
            return;
        }
        const std::filesystem::path p(path);
        if (p.has_parent_path() && !std::filesystem::exists(p.parent_path()))
            throw ValidationError("out", fmt::format("directory '{}' does not exist", p.parent_path().string()));
        file_.open(p);
        if (!file_) throw ValidationError("out", fmt::format("cannot open '{}' for writing", path));
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }
    void close(const std::string& path) {
        if (stream_ != &file_) return;
        file_.close();
        if (!file_) throw ValidationError("out", fmt::format("failed writing '{}'", path));
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

std::string crossings_path(const std::string& out) {
    std::filesystem::path p(out);
    const auto stem = p.stem().string();
    return (p.parent_path() / (stem + "_crossings.csv")).string();
}

struct Setup {
    SpinRegister reg;
    SpinSystem system;
    SequenceBuilder builder;
};

Setup prepare(const Common& c, std::ostream& err) {
    check_common(c);
    auto reg = load_register_file(c.config);
    const auto mode = pulse_mode(c);
    if (auto w = rabi_warning(mode, reg)) fmt::print(err, "warning: {}\n", *w);
    SpinSystem system(reg, coupling_from_string(c.coupling));
    auto builder = make_builder(protocol_from_string(c.protocol), mode, c.harmonic);
    return {std::move(reg), std::move(system), std::move(builder)};
}

void cmd_spectrum(const Common& c, const SpectrumArgs& a, std::ostream& out, std::ostream& err) {
    const auto s = prepare(c, err);
    SpectrumOptions opt;
    opt.workers = c.workers;
    opt.max_refinement = a.max_refine;
    const auto spectrum = compute_spectrum(s.system, s.builder, grid_of(c), opt);
    const auto crossings = find_crossings(spectrum, a.gap_threshold);

    Output o(c.out, out);
    write_spectrum_csv(o.get(), spectrum);
    o.close(c.out);
    if (c.out != "-" || !a.crossings_out.empty()) {
        const std::string path = a.crossings_out.empty() ? crossings_path(c.out) : a.crossings_out;
        Output co(path, out);
        write_crossings_csv(co.get(), crossings);
        co.close(path);
    }

    std::ostream& log = c.out == "-" ? err : out;
    fmt::print(log, "{} grid points ({} refinement levels), {} branches, min overlap {:.3f}\n", spectrum.t_grid.size(),
               spectrum.refinement_levels, spectrum.dimension(), spectrum.min_overlap());
    fmt::print(log, "{} avoided crossing(s) below {:.3g} rad\n", crossings.size(), a.gap_threshold);
    for (const auto& x : crossings) {
        std::string spins;
        for (const auto& l : x.participating_spins) spins += (spins.empty() ? "" : ",") + l;
        fmt::print(log, "  T = {:.5f} µs  tau = {:.5f} µs  gap = {:.5f} rad  spins: {}\n", x.t_center, x.tau_center,
                   x.gap, spins.empty() ? "-" : spins);
    }
}

void cmd_sweep(const Common& c, const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const auto s = prepare(c, err);
    const auto fmt_opt = format_from_strings(c.sign, c.scale);
    const auto grid = grid_of(c);
    PolarisationTrace trace;
    if (a.envelope_tol > 0.0) {
        const auto env = asymptotic_envelope(s.system, s.builder, c.n_p, grid, a.envelope_tol, c.wait_us, c.workers);
        std::size_t capped = 0;
        for (bool ok : env.converged) capped += ok ? 0 : 1;
        if (capped) fmt::print(err, "warning: {} grid point(s) hit the repetition cap\n", capped);
        trace = env.trace;
    } else {
        trace = sweep_trace(s.system, s.builder, {c.n_p, c.reps, c.wait_us, 0}, grid, c.workers);
    }
    Output o(c.out, out);
    write_trace_csv(o.get(), trace, fmt_opt);
    o.close(c.out);

    std::ostream& log = c.out == "-" ? err : out;
    for (const auto& label : trace.labels) {
        auto series = trace.series(label);
        for (auto& v : series) v = std::abs(v);
        const auto p = find_peak(grid, series);
        fmt::print(log, "{}: peak |P| = {:.4f} at T = {:.5f} µs (tau = {:.5f} µs)\n", label,
                   std::abs(fmt_opt.apply(p.value)), p.x, trace.tau[p.index] * p.x / trace.t_grid[p.index]);
    }
}

ScheduleStage parse_stage(const std::string& text, const Common& c, const SequenceBuilder& builder) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(':', start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (parts.size() < 2 || parts.size() > 4)
        throw ValidationError("stage", fmt::format("'{}': expected T_us:reps[:np[:wait_us]]", text));
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("stage", fmt::format("'{}': '{}' is not a number", text, s));
        }
    };
    auto count = [&](const std::string& s) {
        const double v = number(s);
        if (v < 0 || v != std::floor(v)) throw ValidationError("stage", fmt::format("'{}': '{}' is not a count", text, s));
        return static_cast<unsigned>(v);
    };
    ScheduleStage st;
    const double period = number(parts[0]);
    if (!(period > 0.0)) throw ValidationError("stage", fmt::format("'{}': period must be positive", text));
    st.sequence = builder(period);
    st.repetitions = count(parts[1]);
    st.n_p = parts.size() > 2 ? count(parts[2]) : c.n_p;
    st.wait_time = parts.size() > 3 ? number(parts[3]) : c.wait_us;
    return st;
}

void cmd_schedule(const Common& c, const ScheduleArgs& a, std::ostream& out, std::ostream& err) {
    const auto s = prepare(c, err);
    const auto fmt_opt = format_from_strings(c.sign, c.scale);
    std::vector<ScheduleStage> stages;
    for (const auto& text : a.stages) stages.push_back(parse_stage(text, c, s.builder));
    const auto trace = run_schedule(s.system, stages);
    Output o(c.out, out);
    write_schedule_csv(o.get(), trace, stages, fmt_opt);
    o.close(c.out);

    std::ostream& log = c.out == "-" ? err : out;
    const auto fin = trace.final_values();
    fmt::print(log, "{} stage(s), {} repetitions, {:.1f} µs\n", stages.size(), trace.rows.size(),
               trace.rows.back().cumulative_time_us);
    for (std::size_t n = 0; n < trace.labels.size(); ++n)
        fmt::print(log, "{}: final P = {:.4f}\n", trace.labels[n], fmt_opt.apply(fin[n]));
}

void cmd_compare(const Common& c, const CompareArgs& a, std::ostream& out, std::ostream& err) {
    check_common(c);
    if (protocol_from_string(c.protocol) != Protocol::PulsePol)
        throw ValidationError("protocol", "compare models the PulsePol resonance only");
    if (c.rabi != 0.0) fmt::print(err, "warning: compare uses ideal pulses; --rabi ignored\n");
    const auto reg = load_register_file(c.config);
    CompareOptions opt;
    opt.harmonic = c.harmonic;
    opt.n_p = c.n_p;
    opt.repetitions = c.reps;
    opt.wait_time = c.wait_us;
    if (!a.blockade.empty()) opt.blockade = a.blockade;
    opt.window = a.window;
    if (c.t_start.has_value() != c.t_stop.has_value())
        throw ValidationError("t_start", "give both --t-start and --t-stop or neither");
    if (c.t_start) {
        if (!(*c.t_start > 0.0 && *c.t_start < *c.t_stop)) throw ValidationError("t_start", "must satisfy 0 < start < stop");
        opt.t_range = std::make_pair(*c.t_start, *c.t_stop);
    }
    opt.steps = c.steps;
    opt.dip_orders = a.dip_orders;
    opt.workers = c.workers;
    opt.full_register = !a.no_full;
    const auto report = compare_register(reg, opt, coupling_from_string(c.coupling));
    Output o(c.out, out);
    write_comparison_csv(o.get(), report);
    o.close(c.out);
    write_comparison_table(c.out == "-" ? err : out, report);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"NV-centre nuclear polarisation simulator"};
    app.name("dnpsim");
    app.require_subcommand(1);

    Common spectrum_c, sweep_c, schedule_c, compare_c;
    SpectrumArgs spectrum_a;
    SweepArgs sweep_a;
    ScheduleArgs schedule_a;
    CompareArgs compare_a;

    auto* spectrum = app.add_subcommand("spectrum", "Floquet eigenphases against period, with avoided crossings");
    add_common(spectrum, spectrum_c, true, false);
    spectrum->add_option("--gap-threshold", spectrum_a.gap_threshold, "Largest gap reported as a crossing, rad")
        ->capture_default_str();
    spectrum->add_option("--max-refine", spectrum_a.max_refine, "Bisection levels for low-overlap intervals")
        ->capture_default_str();
    spectrum->add_option("--crossings-out", spectrum_a.crossings_out, "Crossings CSV (default: <out>_crossings.csv)");

    auto* sweep = app.add_subcommand("sweep", "Polarisation against period");
    add_common(sweep, sweep_c, true, true);
    sweep->add_option("--envelope-tol", sweep_a.envelope_tol,
                      "Repeat to convergence at this per-repetition tolerance instead of --reps");

    auto* schedule = app.add_subcommand("schedule", "Multi-stage run, polarisation against cumulative time");
    add_common(schedule, schedule_c, false, true);
    schedule->add_option("--stage", schedule_a.stages, "T_us:reps[:np[:wait_us]], repeat for each stage")->required();

    auto* compare = app.add_subcommand("compare", "Closed-form resonances, shifts and dips against numerics");
    add_common(compare, compare_c, false, false);
    compare->add_option("--blockade", compare_a.blockade, "Blockade spin label (default: largest A_x)");
    compare->add_option("--window", compare_a.window, "Half-width of each spin's grid as a fraction of T_r")
        ->capture_default_str();
    compare->add_option("--dip-orders", compare_a.dip_orders, "Side-dip orders n")->capture_default_str();
    compare->add_flag("--no-full", compare_a.no_full, "Skip the whole-register sweep");
    compare_c.steps = 201;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*spectrum) cmd_spectrum(spectrum_c, spectrum_a, out, err);
        if (*sweep) cmd_sweep(sweep_c, sweep_a, out, err);
        if (*schedule) cmd_schedule(schedule_c, schedule_a, out, err);
        if (*compare) cmd_compare(compare_c, compare_a, out, err);
    } catch (const ValidationError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        fmt::print(err, "numerical failure: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(err, "numerical failure: {}\n", e.what());
        return 2;
    }
    return 0;
}

}  // namespace dnp::cli

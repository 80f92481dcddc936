#include "dnpsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dnpsim/analytic.hpp"
#include "dnpsim/errors.hpp"

namespace dnp {

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string joined(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += num(v[i]);
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Vertex of the parabola through three points; falls back to the middle point when degenerate.
std::pair<double, double> vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    const double a = (d1 - d0) / (x2 - x0);
    if (a == 0.0 || !std::isfinite(a)) return {x1, y1};
    const double b = d0 - a * (x0 + x1);
    const double x = std::clamp(-b / (2.0 * a), x0, x2);
    return {x, y0 + (x - x0) * (d0 + a * (x - x1))};
}

void check_xy(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("trace", "x and y lengths differ");
    if (x.empty()) throw ValidationError("trace", "empty trace");
}

}  // namespace

PolarisationFormat format_from_strings(std::string_view sign, std::string_view scale) {
    PolarisationFormat f;
    if (sign == "flip")
        f.flip_sign = true;
    else if (sign != "raw")
        throw ValidationError("sign", fmt::format("expected 'raw' or 'flip', got '{}'", sign));
    if (scale == "unit")
        f.unit_scale = true;
    else if (scale != "half")
        throw ValidationError("scale", fmt::format("expected 'half' or 'unit', got '{}'", scale));
    return f;
}

void write_trace_csv(std::ostream& out, const PolarisationTrace& trace, const PolarisationFormat& f) {
    out << "T_us,tau_us,spin_label,polarisation,n_p,repetitions\n";
    for (std::size_t i = 0; i < trace.t_grid.size(); ++i)
        for (std::size_t n = 0; n < trace.labels.size(); ++n)
            fmt::print(out, "{},{},{},{},{},{}\n", num(trace.t_grid[i]), num(trace.tau[i]), csv_field(trace.labels[n]),
                       num(f.apply(trace.values[i][n])), trace.n_p, trace.repetitions);
}

void write_schedule_csv(std::ostream& out, const ScheduleTrace& trace, const std::vector<ScheduleStage>& stages,
                        const PolarisationFormat& f) {
    out << "stage_index,repetition,T_us,tau_us,cumulative_time_us,spin_label,polarisation,n_p,repetitions\n";
    for (const auto& row : trace.rows) {
        const auto& stage = stages.at(row.stage_index);
        for (std::size_t n = 0; n < trace.labels.size(); ++n)
            fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", row.stage_index, row.repetition, num(row.period),
                       num(row.tau), num(row.cumulative_time_us), csv_field(trace.labels[n]),
                       num(f.apply(row.values[n])), stage.n_p, stage.repetitions);
    }
}

void write_spectrum_csv(std::ostream& out, const FloquetSpectrum& spectrum) {
    out << "T_us,tau_us,branch_index,eigenphase_rad\n";
    for (std::size_t i = 0; i < spectrum.t_grid.size(); ++i)
        for (std::size_t b = 0; b < spectrum.branches[i].size(); ++b)
            fmt::print(out, "{},{},{},{}\n", num(spectrum.t_grid[i]), num(spectrum.tau[i]), b,
                       num(spectrum.branches[i][b]));
}

void write_crossings_csv(std::ostream& out, const std::vector<AvoidedCrossing>& crossings) {
    out << "t_center_us,tau_center_us,gap_rad,branch_a,branch_b,participating_spins\n";
    for (const auto& c : crossings) {
        std::string spins;
        for (std::size_t k = 0; k < c.participating_spins.size(); ++k) {
            if (k) spins += ';';
            spins += c.participating_spins[k];
        }
        fmt::print(out, "{},{},{},{},{},{}\n", num(c.t_center), num(c.tau_center), num(c.gap), c.branch_pair.first,
                   c.branch_pair.second, csv_field(spins));
    }
}

Peak find_peak(const std::vector<double>& x, const std::vector<double>& y) {
    check_xy(x, y);
    const auto i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    Peak p{x[i], y[i], i};
    if (i > 0 && i + 1 < x.size()) {
        const auto [vx, vy] = vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1]);
        p.x = vx;
        p.value = std::max(vy, y[i]);
    }
    return p;
}

std::vector<Peak> local_maxima(const std::vector<double>& x, const std::vector<double>& y) {
    check_xy(x, y);
    std::vector<Peak> out;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        const auto [vx, vy] = vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1]);
        out.push_back({vx, std::max(vy, y[i]), i});
    }
    return out;
}

std::vector<Dip> find_dips(const std::vector<double>& x, const std::vector<double>& y, double floor) {
    check_xy(x, y);
    std::vector<Dip> out;
    const std::size_t m = x.size();
    auto cross = [&](std::size_t a, std::size_t b) {
        const double ya = y[a] - floor, yb = y[b] - floor;
        return x[a] + (x[b] - x[a]) * ya / (ya - yb);
    };
    std::size_t i = 0;
    while (i < m) {
        if (!(y[i] < floor)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < m && y[j + 1] < floor) ++j;
        if (i > 0 && j + 1 < m) {
            std::size_t k = i;
            for (std::size_t q = i; q <= j; ++q)
                if (y[q] < y[k]) k = q;
            const auto [vx, vy] = vertex(x[k - 1], y[k - 1], x[k], y[k], x[k + 1], y[k + 1]);
            out.push_back({vx, std::min(vy, y[k]), cross(i - 1, i), cross(j, j + 1)});
        }
        i = j + 1;
    }
    return out;
}

namespace {

std::vector<double> magnitudes(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double a) { return std::abs(a); });
    return out;
}

std::size_t pick_blockade(const SpinRegister& reg, const std::optional<std::string>& name) {
    if (name) return reg.index_of(*name);
    std::size_t best = 0;
    for (std::size_t n = 1; n < reg.size(); ++n)
        if (reg.nuclei[n].a_perp > reg.nuclei[best].a_perp) best = n;
    return best;
}

}  // namespace

ComparisonReport compare_register(const SpinRegister& reg, const CompareOptions& options, Coupling coupling) {
    reg.validate();
    if (reg.size() == 0) throw ValidationError("register", "comparison needs at least one nucleus");
    if (!(options.window > 0.0 && options.window < 1.0)) throw ValidationError("window", "must lie in (0, 1)");
    if (options.steps < 3) throw ValidationError("steps", "must be >= 3");

    const std::size_t b = pick_blockade(reg, options.blockade);
    ComparisonReport report;
    report.blockade = reg.nuclei[b].label;
    report.options = options;
    const auto builder = make_builder(Protocol::PulsePol, PulseMode::ideal(), options.harmonic);
    const RunParams sweep{options.n_p, options.repetitions, options.wait_time, 0};
    const RunParams single_shot{options.n_p, 1, options.wait_time, 0};
    std::optional<SpinSystem> full;
    if (options.full_register && reg.size() > 1) full.emplace(reg, coupling);

    for (std::size_t n = 0; n < reg.size(); ++n) {
        const auto& spin = reg.nuclei[n];
        ComparisonRow row;
        row.label = spin.label;
        row.is_blockade = n == b;
        row.omega_i = precession_frequency(spin, reg.larmor);
        row.g = flip_flop_rate(spin, options.harmonic);
        row.resonance_period = kTwoPi * options.harmonic / row.omega_i;
        const double tr = row.resonance_period;

        if (!row.is_blockade) {
            try {
                const auto s = blockade_shift(reg.nuclei[b], spin, reg.larmor, options.harmonic);
                row.predicted_shift = s.relative;
                row.predicted_period = s.shifted_period;
                const auto x = three_level_crossing(reg.nuclei[b], spin, reg.larmor, options.harmonic);
                row.exact_shift = x.relative_shift;
                if (!x.perturbative) row.note = "outside perturbative regime";
            } catch (const DegenerateSpins&) {
                row.note = "degenerate with blockade spin";
            }
        }

        const double lo = options.t_range ? options.t_range->first : tr * (1.0 - options.window);
        const double hi = options.t_range ? options.t_range->second : tr * (1.0 + options.window);
        const auto grid = linear_grid(lo, hi, options.steps);

        const SpinSystem alone(reg.subset({spin.label}), coupling);
        SpinRegister pair_reg = row.is_blockade ? reg.subset({spin.label}) : reg.subset({report.blockade, spin.label});
        const SpinSystem pair(pair_reg, coupling);
        const auto pair_trace = sweep_trace(pair, builder, sweep, grid, options.workers);
        const auto peak = find_peak(grid, magnitudes(pair_trace.series(spin.label)));
        row.numeric_peak_period = peak.x;
        row.numeric_peak_value = peak.value;
        row.numeric_shift = peak.x / tr - 1.0;

        if (full) {
            const auto full_trace = sweep_trace(*full, builder, sweep, grid, options.workers);
            const auto fp = find_peak(grid, magnitudes(full_trace.series(spin.label)));
            row.full_peak_period = fp.x;
            row.full_peak_value = fp.value;
        }

        const auto params = effective_params(spin, reg.larmor, tr, options.harmonic);
        for (const auto& d : side_dips(params, options.n_p, options.dip_orders)) row.analytic_dips.push_back(d.period);
        const auto shot = sweep_trace(alone, builder, single_shot, grid, options.workers);
        for (const auto& d : find_dips(grid, magnitudes(shot.series(spin.label)))) row.numeric_dips.push_back(d.x);

        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
    out << "spin_label,is_blockade,omega_i_rad_per_us,g_rad_per_us,T_r_us,tau_r_us,predicted_shift,predicted_T_us,"
           "predicted_tau_us,exact_shift,numeric_peak_T_us,numeric_peak_tau_us,numeric_shift,numeric_peak_polarisation,"
           "full_peak_T_us,full_peak_polarisation,analytic_dips_T_us,numeric_dips_T_us,note\n";
    for (const auto& r : report.rows) {
        const std::optional<double> predicted_tau =
            r.predicted_period ? std::optional<double>(*r.predicted_period / 4.0) : std::nullopt;
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.label),
                   r.is_blockade ? 1 : 0, num(r.omega_i), num(r.g), num(r.resonance_period),
                   num(r.resonance_period / 4.0), opt_num(r.predicted_shift), opt_num(r.predicted_period),
                   opt_num(predicted_tau), opt_num(r.exact_shift), num(r.numeric_peak_period),
                   num(r.numeric_peak_period / 4.0), num(r.numeric_shift), num(r.numeric_peak_value),
                   opt_num(r.full_peak_period), opt_num(r.full_peak_value), joined(r.analytic_dips),
                   joined(r.numeric_dips), csv_field(r.note));
    }
}

void write_comparison_table(std::ostream& out, const ComparisonReport& report) {
    fmt::print(out, "blockade spin: {}   k = {}   N_p = {}   R = {}\n", report.blockade, report.options.harmonic,
               report.options.n_p, report.options.repetitions);
    fmt::print(out, "{:<8} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10} {:>9}  {}\n", "spin", "T_r", "tau_r", "dT/T pred",
               "dT/T 3lvl", "dT/T num", "peak T", "peak P", "note");
    auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:+.4f}", *v) : std::string("-"); };
    for (const auto& r : report.rows) {
        fmt::print(out, "{:<8} {:>9.4f} {:>9.4f} {:>10} {:>10} {:>+10.4f} {:>10.4f} {:>9.4f}  {}\n",
                   r.label + (r.is_blockade ? "*" : ""), r.resonance_period, r.resonance_period / 4.0,
                   cell(r.predicted_shift), cell(r.exact_shift), r.numeric_shift, r.numeric_peak_period,
                   r.numeric_peak_value, r.note);
    }
    out << "\nside dips (T_us): analytic | numeric\n";
    for (const auto& r : report.rows) {
        std::string a, n;
        for (double v : r.analytic_dips) a += fmt::format(" {:.4f}", v);
        for (double v : r.numeric_dips) n += fmt::format(" {:.4f}", v);
        fmt::print(out, "{:<8}{} |{}\n", r.label, a, n);
    }
}

}  // namespace dnp

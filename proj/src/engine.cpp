#include "dnpsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "dnpsim/errors.hpp"
#include "dnpsim/linalg.hpp"
#include "dnpsim/parallel.hpp"

namespace dnp {

namespace {

ComplexMatrix block(const ComplexMatrix& m, std::size_t row_off, std::size_t col_off, std::size_t d) {
    ComplexMatrix out(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out(r, c) = m(row_off + r, col_off + c);
    return out;
}

ComplexMatrix tensor_electron(const ComplexMatrix& rho_n, std::size_t electron_state) {
    const std::size_t d = rho_n.rows();
    ComplexMatrix out(2 * d, 2 * d);
    const std::size_t off = electron_state * d;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out(off + r, off + c) = rho_n(r, c);
    return out;
}

ComplexMatrix trace_electron(const ComplexMatrix& rho) {
    const std::size_t d = rho.rows() / 2;
    ComplexMatrix out(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out(r, c) = rho(r, c) + rho(d + r, d + c);
    return out;
}

void check_density(const ComplexMatrix& rho, double tol, const char* where) {
    if (!rho.all_finite()) throw NumericalError(fmt::format("{}: density matrix has non-finite entries", where));
    if (!is_hermitian(rho, tol)) throw NumericalError(fmt::format("{}: density matrix lost Hermiticity", where));
    const double tr_err = std::abs(rho.trace() - 1.0);
    if (tr_err > tol) throw NumericalError(fmt::format("{}: trace deviates from 1 by {:.3g}", where, tr_err));
    const double min_ev = hermitian_eigenvalues(0.5 * (rho + rho.adjoint())).front();
    if (min_ev < -tol) throw NumericalError(fmt::format("{}: negative eigenvalue {:.3g}", where, min_ev));
}

}  // namespace

ComplexMatrix DensityState::nuclear() const { return trace_electron(rho); }

std::vector<double> nuclear_polarisations(const ComplexMatrix& rho_n, std::size_t n_nuclei) {
    std::vector<double> out(n_nuclei, 0.0);
    for (std::size_t i = 0; i < rho_n.rows(); ++i) {
        const double p = rho_n(i, i).real();
        for (std::size_t n = 0; n < n_nuclei; ++n) {
            const bool down = (i >> (n_nuclei - 1 - n)) & 1U;
            out[n] += down ? -0.5 * p : 0.5 * p;
        }
    }
    return out;
}

std::vector<double> DensityState::polarisations() const { return nuclear_polarisations(nuclear(), reg.size()); }

void DensityState::validate(double tol) const {
    if (rho.rows() != reg.dimension()) throw DimensionMismatch("DensityState: matrix does not match register");
    check_density(rho, tol, "DensityState");
}

DensityState initial_state(const SpinRegister& reg, std::size_t electron_state) {
    if (electron_state > 1) throw ValidationError("reinit_state", "electron state must be 0 or 1");
    const std::size_t d = reg.nuclear_dimension();
    return {tensor_electron((1.0 / static_cast<double>(d)) * ComplexMatrix::identity(d), electron_state), reg};
}

void ProtocolRun::validate() const {
    if (n_p < 1) throw ValidationError("n_p", "must be >= 1");
    if (repetitions < 1) throw ValidationError("repetitions", "must be >= 1");
    if (!(wait_time >= 0.0) || !std::isfinite(wait_time)) throw ValidationError("wait_time", "must be >= 0");
    if (reinit_state > 1) throw ValidationError("reinit_state", "electron state must be 0 or 1");
    if (!(sequence.period > 0.0)) throw ValidationError("sequence", "period must be positive");
}

RepetitionChannel::RepetitionChannel(const SpinSystem& system, const ProtocolRun& run) {
    run.validate();
    cycle_ = matrix_power(period_unitary(run.sequence, system), run.n_p);
    const std::size_t d = system.reg().nuclear_dimension();
    wait_ = run.wait_time > 0.0 ? system.wait_propagator(run.wait_time, run.reinit_state) : ComplexMatrix::identity(d);
    for (std::size_t e = 0; e < 2; ++e) kraus_.push_back(wait_ * block(cycle_, e * d, run.reinit_state * d, d));
}

ComplexMatrix RepetitionChannel::apply(const ComplexMatrix& rho_n) const {
    ComplexMatrix out = conjugate(kraus_[0], rho_n);
    out += conjugate(kraus_[1], rho_n);
    return out;
}

RunResult run_protocol(const DensityState& state, const ProtocolRun& run, const SpinSystem& system,
                       const RunOptions& options) {
    run.validate();
    if (state.rho.rows() != system.dimension()) throw DimensionMismatch("run_protocol: state does not match system");
    const std::size_t n = system.reg().size();
    const RepetitionChannel channel(system, run);
    const ComplexMatrix wait = run.wait_time > 0.0 ? system.wait_propagator(run.wait_time, run.reinit_state)
                                                   : ComplexMatrix::identity(system.reg().nuclear_dimension());

    RunResult result;
    // The first repetition starts from an arbitrary joint state.
    ComplexMatrix rho_n = conjugate(wait, trace_electron(conjugate(channel.cycle_unitary(), state.rho)));
    for (unsigned r = 0; r < run.repetitions; ++r) {
        if (r > 0) rho_n = channel.apply(rho_n);
        if (options.validate_each_repetition) check_density(rho_n, 1e-9, "run_protocol");
        if (options.log_each_repetition) result.log.push_back(nuclear_polarisations(rho_n, n));
    }
    result.state = {tensor_electron(rho_n, run.reinit_state), system.reg()};
    return result;
}

std::vector<double> PolarisationTrace::series(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ValidationError("label", "no nucleus named '" + label + "' in trace");
    const auto n = static_cast<std::size_t>(it - labels.begin());
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row[n]);
    return out;
}

void validate_grid(const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw ValidationError("t_grid", "empty grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw ValidationError("t_grid", "periods must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ValidationError("t_grid", "grid must be strictly increasing");
    }
}

std::vector<double> linear_grid(double start, double stop, std::size_t steps) {
    if (steps < 2) throw ValidationError("steps", "must be >= 2");
    if (!(start < stop)) throw ValidationError("t_start", "must be below t_stop");
    std::vector<double> out(steps);
    for (std::size_t i = 0; i < steps; ++i)
        out[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1);
    return out;
}

namespace {

std::vector<std::string> labels_of(const SpinRegister& reg) {
    std::vector<std::string> out;
    for (const auto& n : reg.nuclei) out.push_back(n.label);
    return out;
}

}  // namespace

PolarisationTrace sweep_trace(const SpinSystem& system, const SequenceBuilder& builder, const RunParams& params,
                              const std::vector<double>& t_grid, std::size_t workers) {
    validate_grid(t_grid);
    struct Point {
        double tau;
        std::vector<double> values;
    };
    const auto points = parallel_map(t_grid.size(), workers, [&](std::size_t i) {
        ProtocolRun run{builder(t_grid[i]), params.n_p, params.repetitions, params.wait_time, params.reinit_state};
        const auto res = run_protocol(initial_state(system.reg(), params.reinit_state), run, system);
        return Point{run.sequence.tau(), res.state.polarisations()};
    });
    PolarisationTrace trace;
    trace.t_grid = t_grid;
    trace.labels = labels_of(system.reg());
    trace.n_p = params.n_p;
    trace.repetitions = params.repetitions;
    for (const auto& p : points) {
        trace.tau.push_back(p.tau);
        trace.values.push_back(p.values);
    }
    return trace;
}

std::vector<double> ScheduleTrace::final_values() const {
    if (rows.empty()) return std::vector<double>(labels.size(), 0.0);
    return rows.back().values;
}

ScheduleTrace run_schedule(const SpinSystem& system, const std::vector<ScheduleStage>& stages) {
    if (stages.empty()) throw ValidationError("stages", "schedule needs at least one stage");
    for (const auto& s : stages) s.validate();
    ScheduleTrace trace;
    trace.labels = labels_of(system.reg());
    DensityState state = initial_state(system.reg(), stages.front().reinit_state);
    double clock = 0.0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& stage = stages[k];
        const auto res = run_protocol(state, stage, system, {.validate_each_repetition = false, .log_each_repetition = true});
        const double step = stage.n_p * stage.sequence.period + stage.wait_time;
        for (unsigned r = 0; r < stage.repetitions; ++r) {
            clock += step;
            trace.rows.push_back({k, r + 1, stage.sequence.period, stage.sequence.tau(), clock, res.log[r]});
        }
        state = res.state;
    }
    return trace;
}

EnvelopeResult asymptotic_envelope(const SpinSystem& system, const SequenceBuilder& builder, unsigned n_p,
                                   const std::vector<double>& t_grid, double tol, double wait_time,
                                   std::size_t workers, unsigned cap) {
    if (!(tol > 0.0)) throw ValidationError("tol", "must be positive");
    if (cap < 1) throw ValidationError("cap", "must be >= 1");
    validate_grid(t_grid);
    struct Point {
        double tau;
        std::vector<double> values;
        unsigned iterations;
        bool converged;
    };
    const std::size_t n = system.reg().size();
    const auto points = parallel_map(t_grid.size(), workers, [&](std::size_t i) {
        ProtocolRun run{builder(t_grid[i]), n_p, 1, wait_time, 0};
        const RepetitionChannel channel(system, run);
        ComplexMatrix rho_n = initial_state(system.reg()).nuclear();
        std::vector<double> prev = nuclear_polarisations(rho_n, n);
        for (unsigned it = 1; it <= cap; ++it) {
            rho_n = channel.apply(rho_n);
            auto cur = nuclear_polarisations(rho_n, n);
            double change = 0.0;
            for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(cur[k] - prev[k]));
            prev = std::move(cur);
            if (change < tol) return Point{run.sequence.tau(), prev, it, true};
        }
        return Point{run.sequence.tau(), prev, cap, false};
    });
    EnvelopeResult out;
    out.trace.t_grid = t_grid;
    out.trace.labels = labels_of(system.reg());
    out.trace.n_p = n_p;
    for (const auto& p : points) {
        out.trace.tau.push_back(p.tau);
        out.trace.values.push_back(p.values);
        out.iterations.push_back(p.iterations);
        out.converged.push_back(p.converged);
        out.trace.repetitions = std::max(out.trace.repetitions, p.iterations);
    }
    return out;
}

}  // namespace dnp

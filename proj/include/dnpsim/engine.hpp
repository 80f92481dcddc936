#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dnpsim/propagation.hpp"

namespace dnp {

/// Joint electron ⊗ nuclei density matrix.
struct DensityState {
    ComplexMatrix rho;
    SpinRegister reg;

    /// Electron traced out.
    ComplexMatrix nuclear() const;
    /// ⟨Î_z⁽ⁿ⁾⟩ for every nucleus, register order.
    std::vector<double> polarisations() const;
    /// Throws NumericalError when Hermiticity, unit trace or positivity fail.
    void validate(double tol = 1e-9) const;
};

/// |e⟩⟨e| ⊗ (I/2)^⊗N with the electron in basis state `electron_state` (0 = |0⟩).
DensityState initial_state(const SpinRegister& reg, std::size_t electron_state = 0);

/// ⟨Î_z⁽ⁿ⁾⟩ of a nuclear-only density matrix over `n_nuclei` spins.
std::vector<double> nuclear_polarisations(const ComplexMatrix& rho_n, std::size_t n_nuclei);

inline constexpr double kDefaultWaitUs = 10.0;

struct ProtocolRun {
    PulseSequence sequence;
    unsigned n_p = 1;
    unsigned repetitions = 1;
    double wait_time = kDefaultWaitUs;  // µs
    std::size_t reinit_state = 0;

    void validate() const;
};

struct RunOptions {
    bool validate_each_repetition = false;
    bool log_each_repetition = false;
};

struct RunResult {
    DensityState state;
    /// log[r][n] = ⟨Î_z⁽ⁿ⁾⟩ after repetition r + 1 (when requested).
    std::vector<std::vector<double>> log;
};

/// One repetition as a channel on the nuclear state:
///   ρ_n → Σ_e W K_e ρ_n K_e† W†,  K_e = ⟨e| U(T)^{N_p} |reinit⟩,  W the wait propagator.
class RepetitionChannel {
public:
    RepetitionChannel(const SpinSystem& system, const ProtocolRun& run);
    ComplexMatrix apply(const ComplexMatrix& rho_n) const;
    const ComplexMatrix& cycle_unitary() const noexcept { return cycle_; }

private:
    ComplexMatrix cycle_;  // U(T)^{N_p}
    ComplexMatrix wait_;
    std::vector<ComplexMatrix> kraus_;
};

/// Repeat: N_p periods of coherent evolution, trace out the electron, wait, re-initialise.
RunResult run_protocol(const DensityState& state, const ProtocolRun& run, const SpinSystem& system,
                       const RunOptions& options = {});

/// Shared run parameters for sweeps.
struct RunParams {
    unsigned n_p = 4;
    unsigned repetitions = 1;
    double wait_time = kDefaultWaitUs;
    std::size_t reinit_state = 0;
};

/// Per-nucleus ⟨Î_z⟩ against protocol period.
struct PolarisationTrace {
    std::vector<double> t_grid;
    std::vector<double> tau;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // values[i][n]
    unsigned n_p = 0;
    unsigned repetitions = 0;

    /// Column of nucleus `label`.
    std::vector<double> series(const std::string& label) const;
};

PolarisationTrace sweep_trace(const SpinSystem& system, const SequenceBuilder& builder, const RunParams& params,
                              const std::vector<double>& t_grid, std::size_t workers = 1);

/// One stage of a schedule: a run at a fixed period.
using ScheduleStage = ProtocolRun;

struct ScheduleRow {
    std::size_t stage_index = 0;
    unsigned repetition = 0;  // within the stage, 1-based
    double period = 0.0;
    double tau = 0.0;
    double cumulative_time_us = 0.0;
    std::vector<double> values;
};

struct ScheduleTrace {
    std::vector<std::string> labels;
    std::vector<ScheduleRow> rows;
    std::vector<double> final_values() const;
};

/// Stages run back to back with the state carried over. One row per repetition.
ScheduleTrace run_schedule(const SpinSystem& system, const std::vector<ScheduleStage>& stages);

struct EnvelopeResult {
    PolarisationTrace trace;
    std::vector<unsigned> iterations;
    std::vector<bool> converged;  // false where the repetition cap was hit
};

inline constexpr unsigned kEnvelopeRepetitionCap = 100000;

/// Repeat until the largest per-repetition change of any ⟨Î_z⟩ drops below `tol`.
EnvelopeResult asymptotic_envelope(const SpinSystem& system, const SequenceBuilder& builder, unsigned n_p,
                                   const std::vector<double>& t_grid, double tol,
                                   double wait_time = kDefaultWaitUs, std::size_t workers = 1,
                                   unsigned cap = kEnvelopeRepetitionCap);

/// Throws ValidationError unless the grid is non-empty, finite, positive and strictly increasing.
void validate_grid(const std::vector<double>& t_grid);

/// `steps` evenly spaced periods from start to stop inclusive.
std::vector<double> linear_grid(double start, double stop, std::size_t steps);

}  // namespace dnp

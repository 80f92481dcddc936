#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnpsim/spin_model.hpp"

namespace dnp {

enum class EventKind { Rotation, FreeEvolution };

struct PulseEvent {
    EventKind kind = EventKind::FreeEvolution;
    double angle = 0.0;     // rad, rotations only
    double phase = 0.0;     // rad, axis cos φ Ŝ_x + sin φ Ŝ_y
    double duration = 0.0;  // µs; zero for ideal rotations

    static PulseEvent rotation(double angle, double phase, double duration = 0.0) {
        return {EventKind::Rotation, angle, phase, duration};
    }
    static PulseEvent free(double duration) { return {EventKind::FreeEvolution, 0.0, 0.0, duration}; }
};

/// Ideal (instantaneous) pulses, or finite pulses driven at a Rabi frequency in rad/µs.
struct PulseMode {
    double rabi = 0.0;  // 0 means ideal

    static PulseMode ideal() { return {}; }
    static PulseMode finite(double rabi);
    bool is_ideal() const noexcept { return rabi == 0.0; }
};

enum class Protocol { PulsePol, Cpmg };

std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view name);

struct PulseSequence {
    std::vector<PulseEvent> events;
    double period = 0.0;  // µs
    int harmonic = 3;
    std::string label;
    Protocol protocol = Protocol::PulsePol;
    PulseMode mode;

    double tau() const;
    std::size_t rotation_count() const;
    std::size_t free_count() const;
    double total_duration() const;
    bool ideal() const;
    /// Start time, kind, angle, phase and duration of each event.
    std::string timing_table() const;
};

namespace phase {
inline constexpr double X = 0.0;
inline constexpr double Y = 1.5707963267948966;
inline constexpr double minus_X = 3.141592653589793;
inline constexpr double minus_Y = 4.71238898038469;
}  // namespace phase

/// One PulsePol period T = 4τ: the bracket
///   (π/2)_Y  τ/2  (π)_{-X}  τ/2  (π/2)_Y (π/2)_X  τ/2  (π)_Y  τ/2  (π/2)_X
/// applied twice. Finite pulses are centred on their ideal instants; the pair that
/// straddles the period boundary is split so the period starts and ends on a pulse.
/// Throws InvalidTau for τ <= 0 or when pulses do not fit.
PulseSequence pulsepol_sequence(double tau, PulseMode mode = {}, int harmonic = 3);

/// [τ/2 π_X τ/2] ×2, period T = 2τ.
PulseSequence cpmg_sequence(double tau, PulseMode mode = {}, int harmonic = 1);

/// Period → sequence factory used by sweeps and spectra.
using SequenceBuilder = std::function<PulseSequence(double period)>;
SequenceBuilder make_builder(Protocol protocol, PulseMode mode = {}, int harmonic = 3);

/// Ratio T/τ of the protocol (4 for PulsePol, 2 for CPMG).
double period_per_tau(Protocol protocol);

/// Resonant period 2kπ/ω_I (PulsePol τ_r = kπ/2ω_I, CPMG τ_r = kπ/ω_I).
double resonance_period(Protocol protocol, int harmonic, double omega_i);

/// Warning text when finite pulses are not much faster than the strongest coupling.
std::optional<std::string> rabi_warning(const PulseMode& mode, const SpinRegister& reg);

}  // namespace dnp

#include "dnpsim/pulse_sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "dnpsim/errors.hpp"

namespace dnp {

namespace {

constexpr double kPi = std::numbers::pi;

struct PulseGroup {
    double centre;  // ideal instant within the period
    std::vector<std::pair<double, double>> pulses;  // (angle, phase)
};

double group_width(const PulseGroup& g, const PulseMode& mode) {
    if (mode.is_ideal()) return 0.0;
    double w = 0.0;
    for (const auto& p : g.pulses) w += p.first / mode.rabi;
    return w;
}

// Lay out pulse groups at their ideal instants. The first group starts at 0 and
// the last ends at `period`; interior groups are centred on their instants.
std::vector<PulseEvent> layout(const std::vector<PulseGroup>& groups, double period, const PulseMode& mode,
                               double tau) {
    std::vector<PulseEvent> events;
    double cursor = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        const double width = group_width(g, mode);
        double start = g.centre - 0.5 * width;
        if (i == 0) start = 0.0;
        if (i + 1 == groups.size()) start = period - width;
        const double gap = start - cursor;
        if (gap < -1e-12) {
            throw InvalidTau(fmt::format("pulses of {:.6g} µs do not fit around t = {:.6g} µs for tau = {:.6g} µs",
                                         width, g.centre, tau));
        }
        if (i > 0) events.push_back(PulseEvent::free(std::max(gap, 0.0)));
        for (const auto& [angle, ph] : g.pulses)
            events.push_back(PulseEvent::rotation(angle, ph, mode.is_ideal() ? 0.0 : angle / mode.rabi));
        cursor = start + width;
    }
    return events;
}

void require_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidTau(fmt::format("tau must be positive, got {}", tau));
}

}  // namespace

PulseMode PulseMode::finite(double rabi) {
    if (!(rabi > 0.0) || !std::isfinite(rabi)) throw ValidationError("rabi", "must be a positive finite frequency");
    return PulseMode{rabi};
}

std::string_view to_string(Protocol p) { return p == Protocol::PulsePol ? "pulsepol" : "cpmg"; }

Protocol protocol_from_string(std::string_view name) {
    if (name == "pulsepol") return Protocol::PulsePol;
    if (name == "cpmg") return Protocol::Cpmg;
    throw ValidationError("protocol", "unknown protocol '" + std::string(name) + "' (pulsepol|cpmg)");
}

double PulseSequence::tau() const { return period / period_per_tau(protocol); }

std::size_t PulseSequence::rotation_count() const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](const auto& e) { return e.kind == EventKind::Rotation; }));
}

std::size_t PulseSequence::free_count() const { return events.size() - rotation_count(); }

double PulseSequence::total_duration() const {
    double t = 0.0;
    for (const auto& e : events) t += e.duration;
    return t;
}

bool PulseSequence::ideal() const {
    return std::all_of(events.begin(), events.end(),
                       [](const auto& e) { return e.kind == EventKind::FreeEvolution || e.duration == 0.0; });
}

std::string PulseSequence::timing_table() const {
    std::string out = fmt::format("# {} T = {:.6f} us, tau = {:.6f} us, k = {}, {}\n", label, period, tau(), harmonic,
                                  mode.is_ideal() ? std::string("ideal pulses") : fmt::format("rabi {:.4g} rad/us", mode.rabi));
    out += fmt::format("{:>3}  {:>12}  {:>10}  {:>9}  {:>9}  {:>12}\n", "#", "start_us", "kind", "angle", "phase",
                       "duration_us");
    double t = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.kind == EventKind::Rotation) {
            out += fmt::format("{:>3}  {:>12.6f}  {:>10}  {:>9.4f}  {:>9.4f}  {:>12.6f}\n", i, t, "rotation", e.angle,
                               e.phase, e.duration);
        } else {
            out += fmt::format("{:>3}  {:>12.6f}  {:>10}  {:>9}  {:>9}  {:>12.6f}\n", i, t, "free", "-", "-", e.duration);
        }
        t += e.duration;
    }
    return out;
}

PulseSequence pulsepol_sequence(double tau, PulseMode mode, int harmonic) {
    require_tau(tau);
    if (harmonic < 1) throw ValidationError("harmonic", "must be >= 1");
    std::vector<PulseGroup> groups;
    for (int half = 0; half < 2; ++half) {
        const double t0 = 2.0 * tau * half;
        if (half == 0) groups.push_back({t0, {{kPi / 2, phase::Y}}});
        else groups.back().pulses.push_back({kPi / 2, phase::Y});
        groups.push_back({t0 + 0.5 * tau, {{kPi, phase::minus_X}}});
        groups.push_back({t0 + tau, {{kPi / 2, phase::Y}, {kPi / 2, phase::X}}});
        groups.push_back({t0 + 1.5 * tau, {{kPi, phase::Y}}});
        groups.push_back({t0 + 2.0 * tau, {{kPi / 2, phase::X}}});
    }
    // The group at 2τ holds (π/2)_X then (π/2)_Y. The last group closes the period.
    PulseSequence seq;
    seq.period = 4.0 * tau;
    seq.harmonic = harmonic;
    seq.protocol = Protocol::PulsePol;
    seq.mode = mode;
    seq.label = "pulsepol";
    seq.events = layout(groups, seq.period, mode, tau);
    return seq;
}

PulseSequence cpmg_sequence(double tau, PulseMode mode, int harmonic) {
    require_tau(tau);
    if (harmonic < 1) throw ValidationError("harmonic", "must be >= 1");
    const double width = mode.is_ideal() ? 0.0 : kPi / mode.rabi;
    const double edge = 0.5 * tau - 0.5 * width;
    const double middle = tau - width;
    if (edge < -1e-12) throw InvalidTau(fmt::format("pi pulses of {:.6g} us do not fit in tau = {:.6g} us", width, tau));
    PulseSequence seq;
    seq.period = 2.0 * tau;
    seq.harmonic = harmonic;
    seq.protocol = Protocol::Cpmg;
    seq.mode = mode;
    seq.label = "cpmg";
    seq.events = {PulseEvent::free(std::max(edge, 0.0)), PulseEvent::rotation(kPi, phase::X, width),
                  PulseEvent::free(std::max(middle, 0.0)), PulseEvent::rotation(kPi, phase::X, width),
                  PulseEvent::free(std::max(edge, 0.0))};
    return seq;
}

SequenceBuilder make_builder(Protocol protocol, PulseMode mode, int harmonic) {
    if (protocol == Protocol::PulsePol)
        return [mode, harmonic](double period) { return pulsepol_sequence(period / 4.0, mode, harmonic); };
    return [mode, harmonic](double period) { return cpmg_sequence(period / 2.0, mode, harmonic); };
}

double period_per_tau(Protocol protocol) { return protocol == Protocol::PulsePol ? 4.0 : 2.0; }

double resonance_period(Protocol, int harmonic, double omega_i) {
    if (harmonic < 1) throw ValidationError("harmonic", "must be >= 1");
    if (!(omega_i > 0.0)) throw ValidationError("omega_i", "must be positive");
    return 2.0 * kPi * harmonic / omega_i;
}

std::optional<std::string> rabi_warning(const PulseMode& mode, const SpinRegister& reg) {
    if (mode.is_ideal()) return std::nullopt;
    double strongest = 0.0;
    for (const auto& n : reg.nuclei) strongest = std::max(strongest, n.a_perp);
    if (mode.rabi < 100.0 * strongest) {
        return fmt::format("rabi frequency {:.4g} rad/us is below 100x the strongest A_x ({:.4g} rad/us); "
                           "finite-pulse effects will be significant",
                           mode.rabi, strongest);
    }
    return std::nullopt;
}

}  // namespace dnp

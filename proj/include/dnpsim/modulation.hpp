#pragma once

#include <array>
#include <vector>

#include "dnpsim/pulse_sequence.hpp"

namespace dnp {

/// Fourier coefficients of f₁, f₂ at harmonic k, for the expansion
///   f(t) = Σ_k a_k cos(kπt/2τ) + b_k sin(kπt/2τ).
struct FourierCoefficients {
    int k = 0;
    double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
};

/// Closed forms. f₂(t) = f₁(t - τ) gives a₂ = -sin(kπ/2) b₁, b₂ = sin(kπ/2) a₁.
FourierCoefficients modulation_coefficients(int k);

/// g_k / A_x = √(a₁² + b₁²)/4, the flip-flop rate per unit transverse coupling at harmonic k.
/// Equals (√2+2)/(6π) at k = 3.
double flip_flop_factor(int k);

/// PulsePol modulation functions over one period 4τ (right-continuous steps).
///   f₁ = +1 on [0, τ/2) ∪ [5τ/2, 3τ), -1 on [τ/2, τ) ∪ [2τ, 5τ/2)
///   f₂ = +1 on [τ, 3τ/2) ∪ [7τ/2, 4τ), -1 on [3τ/2, 2τ) ∪ [3τ, 7τ/2)
struct ModulationFunctions {
    double tau = 0.0;
    int k_max = 21;

    double period() const { return 4.0 * tau; }
    double f1(double t) const;
    double f2(double t) const;
    std::vector<FourierCoefficients> coefficients() const;
    /// Truncated Fourier series of f₁ or f₂ (which = 1, 2) up to `k_max`.
    double partial_sum(int which, double t, int k_max) const;
};

ModulationFunctions modulation_functions(double tau, int k_max = 21);

/// Toggling-frame image of Ŝ_z during one free-evolution segment:
/// U_c† Ŝ_z U_c = f[0] Ŝ_x + f[1] Ŝ_y + f[2] Ŝ_z, with U_c the product of the pulses so far.
struct TogglingSegment {
    double start = 0.0;
    double duration = 0.0;
    std::array<double, 3> f{};
};

/// Segments of an ideal-pulse sequence. Throws NotIdealPulses for finite pulses.
std::vector<TogglingSegment> toggling_segments(const PulseSequence& seq);

/// Electron rotation exp(-iθ(cos φ Ŝ_x + sin φ Ŝ_y)) as a 2×2 matrix.
ComplexMatrix electron_rotation(double angle, double phase);

}  // namespace dnp

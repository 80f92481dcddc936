#pragma once

#include <array>
#include <vector>

#include "dnpsim/spin_model.hpp"

namespace dnp {

struct EffectiveSpinParams {
    double g = 0.0;        // flip-flop rate, rad/µs
    double delta = 0.0;    // ω_I - ω_p, rad/µs
    double omega_i = 0.0;  // rad/µs
    double omega_p = 0.0;  // 2kπ/T, rad/µs
    int harmonic = 3;
    /// |δ| > 0.1 ω_I: first-order averaging is unreliable.
    bool large_detuning = false;
};

/// g_k = A_x √(a₁² + b₁²)/4, which is A_x(√2+2)/(6π) at k = 3.
double flip_flop_rate(const NuclearSpin& nucleus, int harmonic = 3);

EffectiveSpinParams effective_params(const NuclearSpin& nucleus, double larmor, double period, int harmonic = 3);

/// Σ_n g_n (Ŝ₊Î₋⁽ⁿ⁾ + Ŝ₋Î₊⁽ⁿ⁾) + δ_n Î_z⁽ⁿ⁾ on the joint space.
ComplexMatrix flip_flop_hamiltonian(const SpinRegister& reg, double period, int harmonic = 3);

struct PolarisationEstimate {
    double value = 0.0;    // (2g/Ω_r)² sin²(Ω_r N_p T / 2)
    double ceiling = 0.0;  // 1 / (1 + (δ/2g)²)
    double rabi = 0.0;     // Ω_r = √(δ² + 4g²)
    bool zero_coupling = false;
};

PolarisationEstimate single_spin_polarisation(const EffectiveSpinParams& params, unsigned n_p, double period);

struct PulseCountEstimate {
    double exact = 0.0;  // π / (Ω_r T)
    unsigned rounded = 1;
};

/// N_p maximising single_spin_polarisation at this period.
PulseCountEstimate optimal_pulse_count(const EffectiveSpinParams& params, double period);

struct SideDip {
    int n = 0;
    int sign = 0;  // +1 above T_r, -1 below
    double period = 0.0;
};

/// Zeros of single_spin_polarisation near T_r = 2kπ/ω_I:
///   T = T_r [1 ± (n/kN_p) √(1 - μ²(k²N_p²/n² - 1))] / (1 + μ²),  μ = 2g/ω_I.
/// Orders whose root is complex are skipped. Sorted by period.
std::vector<SideDip> side_dips(const EffectiveSpinParams& params, unsigned n_p, int n_max);

/// Small-coupling limit T_r (1 ± n/(kN_p)).
std::vector<SideDip> side_dips_approx(const EffectiveSpinParams& params, unsigned n_p, int n_max);

struct DarkBrightDecomposition {
    double phi = 0.0;    // tan φ = g₂/g₁
    double g_rms = 0.0;  // √(g₁² + g₂²)
    double theta = 0.0;  // tan θ = 2 g_rms / δ
    double bright_ceiling = 0.0;    // cos²φ
    double transfer_ceiling = 0.0;  // cos²φ sin²θ
};

DarkBrightDecomposition dark_bright(double g1, double g2, double delta);

/// cos²φ sin²θ sin²(ω N_p T/2), ω = √(δ² + 4g_rms²).
double dark_bright_transfer(const DarkBrightDecomposition& d, double delta, unsigned n_p, double period);

/// Long-run summed ⟨Î_z⁽¹⁾ + Î_z⁽²⁾⟩ of two identical spins under repeated reset of the
/// electron. The antisymmetric single-flip state never couples and keeps its initial
/// weight 1/4; the rest ends in |↑↑⟩. Result: 3/4.
double identical_pair_summed_asymptote();

struct BlockadeShift {
    double relative = 0.0;        // -G² / (ω_s (ω_B - ω_s))
    double relative_exact = 0.0;  // from the exact three-level degeneracy
    double resonance_period = 0.0;
    double shifted_period = 0.0;  // T_r (1 + relative)
    double G = 0.0;
    double omega_strong = 0.0;
    double omega_weak = 0.0;
    double delta_minus = 0.0;  // ω_B - ω_s
};

inline constexpr double kDegenerateTolerance = 1e-4;

/// Displacement of the weak spin's resonance caused by a strongly coupled blockade spin.
/// Throws DegenerateSpins when |ω_B - ω_s| < 1e-4 rad/µs.
BlockadeShift blockade_shift(const NuclearSpin& strong, const NuclearSpin& weak, double larmor, int harmonic = 3);

struct BlockadePair {
    EffectiveSpinParams strong;
    EffectiveSpinParams weak;
    double delta_minus = 0.0;  // δ_B - δ_s
    double delta_plus = 0.0;   // δ_B + δ_s
    double theta_p = 0.0;      // tan θ_p = 2G/δ_B, in (0, π)
};

/// Throws ValidationError unless strong.g > weak.g.
BlockadePair make_blockade_pair(const NuclearSpin& strong, const NuclearSpin& weak, double larmor, double period,
                                int harmonic = 3);

/// Ω_r ≈ 2 g_s sin(θ_p / 2)
double blockade_rabi(const BlockadePair& pair);

struct ThreeLevelSystem {
    ComplexMatrix matrix;
    std::array<double, 3> eigenvalues{};
    ComplexMatrix eigenvectors;
    /// g_s = 0 values: (δ_s + ω)/2, (δ_s - ω)/2, δ₋/2 with ω = √(δ_B² + 4G²).
    std::array<double, 3> unperturbed{};
};

/// [[-δ₋/2, G, 0], [G, δ₊/2, g_s], [0, g_s, δ₋/2]]
ThreeLevelSystem three_level_blockade_eigensystem(const BlockadePair& pair);

/// ω_p at which the dressed strong-spin level meets the weak-spin level: ω_s + G²/δ₋.
double degenerate_protocol_frequency(double omega_strong, double omega_weak, double G);

struct ThreeLevelCrossing {
    double omega_p = 0.0;
    double period = 0.0;
    double relative_shift = 0.0;
    double gap = 0.0;
    /// G < 0.3|δ₋| and |δ₋| < 0.1 ω_L; outside this the linearised shift is not expected to hold.
    bool perturbative = false;
};

/// Minimum of the smallest level gap of the exact three-level block near the weak resonance.
ThreeLevelCrossing three_level_crossing(const NuclearSpin& strong, const NuclearSpin& weak, double larmor,
                                        int harmonic = 3);

}  // namespace dnp

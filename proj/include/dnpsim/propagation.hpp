#pragma once

#include <memory>
#include <optional>

#include "dnpsim/linalg.hpp"
#include "dnpsim/pulse_sequence.hpp"
#include "dnpsim/spin_model.hpp"

namespace dnp {

/// A register with its static Hamiltonian diagonalised once. Free evolution for
/// any duration is then a phase multiply. Finite-pulse propagators are cached per
/// (phase, rabi). Safe to share between threads.
class SpinSystem {
public:
    explicit SpinSystem(SpinRegister reg, Coupling coupling = Coupling::Projector);

    const SpinRegister& reg() const noexcept { return reg_; }
    Coupling coupling() const noexcept { return coupling_; }
    std::size_t dimension() const noexcept { return h0_.rows(); }
    const ComplexMatrix& hamiltonian() const noexcept { return h0_; }
    const EigenDecomposition& eigen() const noexcept { return eig_; }

    /// exp(-i Ĥ₀ t)
    ComplexMatrix free_propagator(double t) const;
    /// exp(-i (Ĥ₀ + Ω Ŝ_φ) θ/Ω)
    ComplexMatrix pulse_propagator(double angle, double phase, double rabi) const;
    /// Nuclear-only propagator with the electron frozen in basis state `electron_state`.
    ComplexMatrix wait_propagator(double t, std::size_t electron_state = 0) const;

private:
    struct Cache;
    SpinRegister reg_;
    Coupling coupling_;
    ComplexMatrix h0_;
    EigenDecomposition eig_;
    std::shared_ptr<Cache> cache_;
};

/// U ← (R ⊗ I) U for a 2×2 electron operator R, in O(D²).
void apply_electron_left(ComplexMatrix& u, const ComplexMatrix& r);

/// Time-ordered product of the sequence's event propagators.
ComplexMatrix period_unitary(const PulseSequence& seq, const SpinSystem& system);
ComplexMatrix period_unitary(const PulseSequence& seq, const SpinRegister& reg,
                             Coupling coupling = Coupling::Projector);

/// First-order average of the toggling-frame Hamiltonian
///   Σ_n (ω_I⁽ⁿ⁾ - ω_f) Î_z⁽ⁿ⁾ + Σ_a f_a(t) Ŝ_a (A_z Î_z⁽ⁿ⁾ + A_x (Î_x⁽ⁿ⁾ cos ω_f t - Î_y⁽ⁿ⁾ sin ω_f t))
/// on a midpoint grid of `steps` points per period. ω_f defaults to 2kπ/T.
/// Throws NotIdealPulses for finite-pulse sequences.
ComplexMatrix average_hamiltonian_numeric(const PulseSequence& seq, const SpinRegister& reg,
                                          std::optional<double> frame_frequency = std::nullopt, int steps = 10000);

}  // namespace dnp

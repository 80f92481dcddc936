#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dnpsim/errors.hpp"
#include "dnpsim/linalg.hpp"
#include "dnpsim/modulation.hpp"
#include "dnpsim/propagation.hpp"

using namespace dnp;
using std::numbers::pi;

TEST_CASE("period_unitary: bare free evolution") {
    const auto reg = reference_register({"C3", "C21"});
    const SpinSystem sys(reg);
    PulseSequence s;
    s.period = 3.3;
    s.events = {PulseEvent::free(3.3)};
    CHECK(max_abs_diff(period_unitary(s, sys), expm_hermitian(static_hamiltonian(reg), 3.3)) < 1e-12);
}

TEST_CASE("period_unitary: unitary for random tau with three nuclei") {
    const SpinSystem sys(reference_register({"C3", "C16", "C21"}));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tau(0.2, 4.0);
    for (int i = 0; i < 10; ++i) {
        const auto u = period_unitary(pulsepol_sequence(tau(rng)), sys);
        CHECK(is_unitary(u, 1e-10));
        const auto c = period_unitary(cpmg_sequence(tau(rng)), sys);
        CHECK(is_unitary(c, 1e-10));
    }
}

TEST_CASE("period_unitary: no nuclei gives a tau-independent electron operator") {
    const SpinSystem sys(SpinRegister{});
    const auto u0 = period_unitary(pulsepol_sequence(0.3), sys);
    // Oracle: product of the 2x2 rotations alone.
    ComplexMatrix oracle = ComplexMatrix::identity(2);
    for (const auto& e : pulsepol_sequence(1.0).events)
        if (e.kind == EventKind::Rotation) oracle = electron_rotation(e.angle, e.phase) * oracle;
    CHECK(max_abs_diff(u0, oracle) < 1e-12);
    for (double tau : {0.5, 1.0, 1.7, 4.2}) CHECK(max_abs_diff(period_unitary(pulsepol_sequence(tau), sys), u0) < 1e-12);
    // The bracket closes on ±identity, so the toggling frame is periodic.
    CHECK(std::abs(std::abs(u0(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(u0(0, 1)) < 1e-12);
}

TEST_CASE("period_unitary: single-spin resonance eigenvalues on the unit circle") {
    const auto reg = reference_register({"C3"});
    const double wi = precession_frequency(reg.nuclei[0], reg.larmor);
    const auto u = period_unitary(pulsepol_sequence(1.5 * pi / wi), SpinSystem(reg));
    const auto eig = unitary_eigensolve(u);
    for (const auto& l : eig.eigenvalues) CHECK(std::abs(std::abs(l) - 1.0) < 1e-9);
}

TEST_CASE("period_unitary: finite pulses approach the ideal limit") {
    const auto reg = reference_register({"C3", "C21"});
    const SpinSystem sys(reg);
    const double tau = 1.72;
    const auto ideal = period_unitary(pulsepol_sequence(tau), sys);
    double previous = 1e9;
    for (double rabi : {50.0, 500.0, 5000.0}) {
        const auto u = period_unitary(pulsepol_sequence(tau, PulseMode::finite(rabi)), sys);
        CHECK(is_unitary(u, 1e-10));
        const double err = max_abs_diff(u, ideal);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("cpmg: electron coherence dip at tau = pi / omega_I") {
    const auto reg = reference_register({"C3"});
    const SpinSystem sys(reg);
    const double wi = precession_frequency(reg.nuclei[0], reg.larmor);
    const auto ops = build_operators(reg);
    // Electron in |+x⟩, nucleus mixed.
    ComplexMatrix plus(2, 2);
    plus(0, 0) = plus(0, 1) = plus(1, 0) = plus(1, 1) = 0.5;
    const auto rho0 = kron(plus, 0.5 * ComplexMatrix::identity(2));
    double best_tau = 0.0, best = 1e9;
    const double centre = pi / wi;
    for (int i = -200; i <= 200; ++i) {
        const double tau = centre * (1.0 + 0.001 * i);
        const auto u = matrix_power(period_unitary(cpmg_sequence(tau), sys), 8);
        const double sx = trace_of_product(conjugate(u, rho0), ops.sx).real();
        if (sx < best) {
            best = sx;
            best_tau = tau;
        }
    }
    CHECK(std::abs(best_tau / centre - 1.0) < 0.01);
    CHECK(best < 0.2);
}

TEST_CASE("average Hamiltonian: flip-flop element at resonance") {
    for (const auto& row : reference_table()) {
        if (row.a_perp_khz > 60.0) continue;
        const auto reg = reference_register({row.label});
        const double wi = precession_frequency(reg.nuclei[0], reg.larmor);
        const double tr = 6 * pi / wi;
        const auto h = average_hamiltonian_numeric(pulsepol_sequence(tr / 4), reg);
        const double g = reg.nuclei[0].a_perp * (std::sqrt(2.0) + 2) / (6 * pi);
        // ⟨↑↓|H|↓↑⟩ with basis index 2e + n.
        INFO(row.label);
        CHECK(std::abs(std::abs(h(1, 2)) - g) <= 0.02 * g);
        CHECK(std::abs(h(1, 2) - std::conj(h(2, 1))) < 1e-14);
        CHECK(std::abs(h(0, 3)) < 1e-3 * g);
    }
}

TEST_CASE("average Hamiltonian: zero hyperfine on resonance vanishes") {
    SpinRegister reg;
    reg.nuclei.push_back({"Z", 0.0, 0.0});
    const auto h = average_hamiltonian_numeric(pulsepol_sequence(1.5 * pi / reg.larmor), reg);
    CHECK(h.max_abs() < 1e-12);
}

TEST_CASE("average Hamiltonian: detuned Iz coefficient") {
    const auto reg = reference_register({"C21"});
    const double wi = precession_frequency(reg.nuclei[0], reg.larmor);
    const double tau = 1.5 * pi / wi * 1.01;
    const double delta = wi - 1.5 * pi / tau;
    const auto h = average_hamiltonian_numeric(pulsepol_sequence(tau), reg);
    // Iz coefficient is the difference of the |↑↑⟩ and |↑↓⟩ diagonal entries.
    const double coeff = (h(0, 0) - h(1, 1)).real();
    CHECK(std::abs(coeff - delta) <= 0.02 * std::abs(delta));
    CHECK_THROWS_AS(average_hamiltonian_numeric(pulsepol_sequence(tau, PulseMode::finite(100.0)), reg), NotIdealPulses);
}

TEST_CASE("average Hamiltonian conserves total z magnetisation at k = 3") {
    const auto reg = reference_register({"C3", "C21"});
    const double wi = precession_frequency(reg.nuclei[0], reg.larmor);
    const auto h = average_hamiltonian_numeric(pulsepol_sequence(1.5 * pi / wi), reg);
    const auto ops = build_operators(reg);
    const auto mz = ops.sz + ops.iz[0] + ops.iz[1];
    CHECK(commutator(h, mz).max_abs() < 1e-3 * h.max_abs());
}

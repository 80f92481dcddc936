#pragma once

#include <cstddef>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnpsim/matrix.hpp"

namespace dnp {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// ¹³C gyromagnetic ratio γ/2π in kHz per gauss.
inline constexpr double kGammaC13KhzPerGauss = 1.0705;
inline constexpr double kDefaultFieldGauss = 403.0;
inline constexpr std::size_t kMaxNuclei = 7;

/// kHz (ordinary frequency) to rad/µs.
constexpr double khz_to_rad_per_us(double khz) { return khz * kTwoPi * 1e-3; }
constexpr double rad_per_us_to_khz(double w) { return w / (kTwoPi * 1e-3); }
constexpr double larmor_from_field(double gauss) { return khz_to_rad_per_us(kGammaC13KhzPerGauss * gauss); }

struct NuclearSpin {
    std::string label;
    double a_parallel = 0.0;  // A_z, rad/µs
    double a_perp = 0.0;      // A_x, rad/µs, >= 0
};

struct SpinRegister {
    double larmor = larmor_from_field(kDefaultFieldGauss);
    std::vector<NuclearSpin> nuclei;
    std::optional<double> b_field_gauss;

    std::size_t size() const noexcept { return nuclei.size(); }
    std::size_t dimension() const noexcept { return std::size_t{2} << nuclei.size(); }
    std::size_t nuclear_dimension() const noexcept { return std::size_t{1} << nuclei.size(); }

    /// Index of the nucleus with this label; throws ValidationError when absent.
    std::size_t index_of(std::string_view label) const;
    /// Register restricted to the listed labels, in the given order.
    SpinRegister subset(const std::vector<std::string>& labels) const;

    /// Throws ValidationError / DimensionOverflow on a broken invariant.
    void validate() const;
};

/// How the electron conditions the hyperfine field.
///  Projector: nuclear field (ω_L - A_z/2, -A_x/2) + Ŝ_z(A_z, A_x); the two electron blocks
///             see ω_L and the full hyperfine-shifted field, their mean precesses at ω_I.
///  Symmetric: ω_L Î_z + Ŝ_z A·Î, the blocks see ω_L ± A/2.
enum class Coupling { Projector, Symmetric };

std::string_view to_string(Coupling c);
Coupling coupling_from_string(std::string_view name);

/// Single-site operators embedded in the joint space. Electron is factor 0,
/// nuclei follow in register order. Basis state |0⟩ of every factor is spin up.
struct SpinOperatorSet {
    std::size_t n_nuclei = 0;
    ComplexMatrix sz, sx, sy, sp, sm;
    std::vector<ComplexMatrix> iz, ix, iy, ip, im;

    std::size_t dimension() const noexcept { return sz.rows(); }
};

SpinOperatorSet build_operators(const SpinRegister& reg);

/// Pauli/2 matrices of a single spin-1/2.
ComplexMatrix spin_half(char axis);

/// Kronecker product of per-site 2x2 operators, identity where `ops[i]` is empty.
ComplexMatrix embed_sites(const std::vector<ComplexMatrix>& ops);

ComplexMatrix static_hamiltonian(const SpinRegister& reg, const SpinOperatorSet& ops,
                                 Coupling coupling = Coupling::Projector);
ComplexMatrix static_hamiltonian(const SpinRegister& reg, Coupling coupling = Coupling::Projector);

/// Nuclear Hamiltonian seen with the electron frozen in basis state `electron_state` (0 or 1).
ComplexMatrix nuclear_block(const ComplexMatrix& joint, std::size_t electron_state);

/// ω_I = sqrt((ω_L - A_z/2)² + (A_x/2)²)
double precession_frequency(const NuclearSpin& nucleus, double larmor);

/// Parse the JSON register format:
///   {"larmor_rad_per_us": ..., "b_field_gauss": ..., "nuclei": [{"label", "a_parallel_khz", "a_perp_khz"}]}
SpinRegister load_register(std::string_view text);
SpinRegister load_register_file(const std::filesystem::path& path);
std::string register_to_json(const SpinRegister& reg);

/// Hyperfine table of the 27 carbons near the reference NV (kHz, as tabulated).
struct TableRow {
    const char* label;
    double a_parallel_khz;
    double a_perp_khz;
    double omega_i;  // tabulated precession frequency, rad/µs
};
std::span<const TableRow> reference_table();

/// Register built from reference-table labels, e.g. {"C3", "C21"}.
SpinRegister reference_register(const std::vector<std::string>& labels, double larmor = larmor_from_field(kDefaultFieldGauss));
NuclearSpin reference_spin(std::string_view label);

}  // namespace dnp

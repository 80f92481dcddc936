#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dnpsim/engine.hpp"
#include "dnpsim/floquet.hpp"

namespace dnp {

/// Output convention for polarisation values. The engine reports raw ⟨Î_z⟩ in [-1/2, 1/2].
struct PolarisationFormat {
    bool flip_sign = false;
    bool unit_scale = false;  // report 2⟨Î_z⟩ in [-1, 1]

    double apply(double value) const { return (flip_sign ? -value : value) * (unit_scale ? 2.0 : 1.0); }
};

PolarisationFormat format_from_strings(std::string_view sign, std::string_view scale);

/// T_us,tau_us,spin_label,polarisation,n_p,repetitions
void write_trace_csv(std::ostream& out, const PolarisationTrace& trace, const PolarisationFormat& fmt = {});

/// stage_index,repetition,T_us,tau_us,cumulative_time_us,spin_label,polarisation,n_p,repetitions
void write_schedule_csv(std::ostream& out, const ScheduleTrace& trace, const std::vector<ScheduleStage>& stages,
                        const PolarisationFormat& fmt = {});

/// T_us,tau_us,branch_index,eigenphase_rad
void write_spectrum_csv(std::ostream& out, const FloquetSpectrum& spectrum);

/// t_center_us,tau_center_us,gap_rad,branch_a,branch_b,participating_spins
void write_crossings_csv(std::ostream& out, const std::vector<AvoidedCrossing>& crossings);

struct Peak {
    double x = 0.0;
    double value = 0.0;
    std::size_t index = 0;
};

/// Global maximum refined by a parabola through the three surrounding points.
Peak find_peak(const std::vector<double>& x, const std::vector<double>& y);

/// Every interior local maximum, parabola-refined, in grid order.
std::vector<Peak> local_maxima(const std::vector<double>& x, const std::vector<double>& y);

struct Dip {
    double x = 0.0;      // parabola-refined minimum inside the bracket
    double value = 0.0;
    double left = 0.0;   // where y - floor crosses zero going down
    double right = 0.0;  // and back up
};

inline constexpr double kDipFloor = 0.01;

/// Runs of the trace below `floor`, bracketed by sign changes of y - floor.
/// Runs touching either end of the grid are dropped.
std::vector<Dip> find_dips(const std::vector<double>& x, const std::vector<double>& y, double floor = kDipFloor);

struct CompareOptions {
    int harmonic = 3;
    unsigned n_p = 4;
    unsigned repetitions = 100;
    double wait_time = kDefaultWaitUs;
    std::optional<std::string> blockade;  // default: largest A_x
    double window = 0.3;                  // half-width as a fraction of T_r
    /// Fixed period range for every spin instead of the per-spin window.
    std::optional<std::pair<double, double>> t_range;
    std::size_t steps = 201;
    int dip_orders = 3;
    std::size_t workers = 1;
    bool full_register = true;  // also sweep every spin together
};

struct ComparisonRow {
    std::string label;
    bool is_blockade = false;
    double omega_i = 0.0;
    double g = 0.0;
    double resonance_period = 0.0;
    std::optional<double> predicted_shift;   // ΔT_r/T_r from the closed form
    std::optional<double> predicted_period;  // T_r (1 + ΔT_r/T_r)
    std::optional<double> exact_shift;       // three-level crossing
    std::string note;
    double numeric_peak_period = 0.0;  // pair with the blockade spin, or alone for the blockade spin
    double numeric_peak_value = 0.0;
    double numeric_shift = 0.0;
    std::optional<double> full_peak_period;
    std::optional<double> full_peak_value;
    std::vector<double> analytic_dips;  // full-μ zeros, n = 1..dip_orders, single spin
    std::vector<double> numeric_dips;   // single-spin trace at R = 1
};

struct ComparisonReport {
    std::string blockade;
    CompareOptions options;
    std::vector<ComparisonRow> rows;
};

ComparisonReport compare_register(const SpinRegister& reg, const CompareOptions& options = {},
                                  Coupling coupling = Coupling::Projector);

void write_comparison_csv(std::ostream& out, const ComparisonReport& report);
void write_comparison_table(std::ostream& out, const ComparisonReport& report);

}  // namespace dnp

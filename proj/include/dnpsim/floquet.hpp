#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dnpsim/propagation.hpp"

namespace dnp {

/// Eigenphases of U(T) against T, stitched into continuous branches.
struct FloquetSpectrum {
    std::vector<double> t_grid;  // µs, refined grid (input points plus bisection midpoints)
    std::vector<double> tau;
    std::vector<std::string> labels;
    /// branches[i][b]: eigenphase of branch b at t_grid[i], in (-π, π].
    std::vector<std::vector<double>> branches;
    /// overlaps[i][b] = |⟨v_b(T_{i-1})|v_b(T_i)⟩|; 1 at i = 0.
    std::vector<std::vector<double>> overlaps;
    /// weights[i][b][n] = Σ_x |v(x)| |v(F_n x)|, F_n flipping the electron and nucleus n.
    /// 1 for an equal flip-flop superposition, 0 for a product state.
    std::vector<std::vector<std::vector<double>>> weights;
    unsigned refinement_levels = 0;

    std::size_t dimension() const { return branches.empty() ? 0 : branches.front().size(); }
    double min_overlap() const;
};

struct SpectrumOptions {
    std::size_t workers = 1;
    unsigned max_refinement = 6;
    double overlap_threshold = 0.9;
};

FloquetSpectrum compute_spectrum(const SpinSystem& system, const SequenceBuilder& builder,
                                 const std::vector<double>& t_grid, const SpectrumOptions& options = {});

struct AvoidedCrossing {
    double t_center = 0.0;  // µs
    double tau_center = 0.0;
    double gap = 0.0;       // rad
    std::pair<std::size_t, std::size_t> branch_pair;
    std::size_t grid_index = 0;
    /// Labels with weight >= participation threshold, strongest first.
    std::vector<std::string> participating_spins;
    std::vector<double> participation;  // matching weights
};

inline constexpr double kParticipationThreshold = 0.2;

/// Interior local minima of the wrapped gap between two branches that stay below
/// `gap_threshold`, keep their ordering across the minimum and dip by at least half their depth.
/// Minima of different pairs within one grid step and 10% in gap are merged.
std::vector<AvoidedCrossing> find_crossings(const FloquetSpectrum& spectrum, double gap_threshold,
                                            double participation_threshold = kParticipationThreshold);

/// Map an angle into (-π, π].
double wrap_phase(double phase);

}  // namespace dnp

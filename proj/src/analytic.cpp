#include "dnpsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "dnpsim/errors.hpp"
#include "dnpsim/linalg.hpp"
#include "dnpsim/modulation.hpp"

namespace dnp {

double flip_flop_rate(const NuclearSpin& nucleus, int harmonic) {
    if (harmonic < 1) throw ValidationError("harmonic", "must be >= 1");
    return nucleus.a_perp * flip_flop_factor(harmonic);
}

EffectiveSpinParams effective_params(const NuclearSpin& nucleus, double larmor, double period, int harmonic) {
    if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("period", "must be positive");
    EffectiveSpinParams p;
    p.harmonic = harmonic;
    p.g = flip_flop_rate(nucleus, harmonic);
    p.omega_i = precession_frequency(nucleus, larmor);
    p.omega_p = kTwoPi * harmonic / period;
    p.delta = p.omega_i - p.omega_p;
    p.large_detuning = std::abs(p.delta) > 0.1 * p.omega_i;
    return p;
}

ComplexMatrix flip_flop_hamiltonian(const SpinRegister& reg, double period, int harmonic) {
    const auto ops = build_operators(reg);
    ComplexMatrix h(reg.dimension(), reg.dimension());
    for (std::size_t n = 0; n < reg.size(); ++n) {
        const auto p = effective_params(reg.nuclei[n], reg.larmor, period, harmonic);
        h += p.g * (ops.sp * ops.im[n] + ops.sm * ops.ip[n]);
        h += p.delta * ops.iz[n];
    }
    return h;
}

PolarisationEstimate single_spin_polarisation(const EffectiveSpinParams& params, unsigned n_p, double period) {
    if (n_p < 1) throw ValidationError("n_p", "must be >= 1");
    PolarisationEstimate out;
    out.rabi = std::sqrt(params.delta * params.delta + 4.0 * params.g * params.g);
    if (params.g == 0.0) {
        out.zero_coupling = params.delta == 0.0;
        return out;
    }
    const double ratio = 2.0 * params.g / out.rabi;
    const double s = std::sin(0.5 * out.rabi * n_p * period);
    out.ceiling = ratio * ratio;
    out.value = out.ceiling * s * s;
    return out;
}

PulseCountEstimate optimal_pulse_count(const EffectiveSpinParams& params, double period) {
    if (!(period > 0.0)) throw ValidationError("period", "must be positive");
    const double rabi = std::sqrt(params.delta * params.delta + 4.0 * params.g * params.g);
    if (rabi == 0.0) throw ValidationError("params", "zero coupling and zero detuning: no transfer");
    PulseCountEstimate out;
    out.exact = std::numbers::pi / (rabi * period);
    const auto lo = static_cast<unsigned>(std::max(1.0, std::floor(out.exact)));
    const unsigned hi = lo + 1;
    out.rounded = single_spin_polarisation(params, lo, period).value >= single_spin_polarisation(params, hi, period).value
                      ? lo
                      : hi;
    return out;
}

namespace {

double resonance_of(const EffectiveSpinParams& p) {
    if (!(p.omega_i > 0.0)) throw ValidationError("omega_i", "must be positive");
    return kTwoPi * p.harmonic / p.omega_i;
}

void sort_dips(std::vector<SideDip>& dips) {
    std::sort(dips.begin(), dips.end(), [](const SideDip& a, const SideDip& b) { return a.period < b.period; });
}

}  // namespace

std::vector<SideDip> side_dips(const EffectiveSpinParams& params, unsigned n_p, int n_max) {
    if (n_p < 1) throw ValidationError("n_p", "must be >= 1");
    const double tr = resonance_of(params);
    const double mu = 2.0 * params.g / params.omega_i;
    std::vector<SideDip> out;
    for (int n = 1; n <= n_max; ++n) {
        const double nu = n / static_cast<double>(params.harmonic * n_p);
        const double arg = 1.0 - mu * mu * (1.0 / (nu * nu) - 1.0);
        if (arg < 0.0) continue;
        const double root = nu * std::sqrt(arg);
        for (int sign : {-1, 1}) {
            const double t = tr * (1.0 + sign * root) / (1.0 + mu * mu);
            if (t > 0.0) out.push_back({n, sign, t});
        }
    }
    sort_dips(out);
    return out;
}

std::vector<SideDip> side_dips_approx(const EffectiveSpinParams& params, unsigned n_p, int n_max) {
    if (n_p < 1) throw ValidationError("n_p", "must be >= 1");
    const double tr = resonance_of(params);
    std::vector<SideDip> out;
    for (int n = 1; n <= n_max; ++n) {
        const double nu = n / static_cast<double>(params.harmonic * n_p);
        for (int sign : {-1, 1})
            if (1.0 + sign * nu > 0.0) out.push_back({n, sign, tr * (1.0 + sign * nu)});
    }
    sort_dips(out);
    return out;
}

DarkBrightDecomposition dark_bright(double g1, double g2, double delta) {
    if (g1 < 0.0 || g2 < 0.0) throw ValidationError("g", "couplings must be >= 0");
    if (g1 == 0.0 && g2 == 0.0) throw ValidationError("g", "at least one coupling must be non-zero");
    DarkBrightDecomposition d;
    d.phi = std::atan2(g2, g1);
    d.g_rms = std::hypot(g1, g2);
    d.theta = std::atan2(2.0 * d.g_rms, delta);
    const double c = std::cos(d.phi);
    const double s = std::sin(d.theta);
    d.bright_ceiling = c * c;
    d.transfer_ceiling = c * c * s * s;
    return d;
}

double dark_bright_transfer(const DarkBrightDecomposition& d, double delta, unsigned n_p, double period) {
    const double w = std::sqrt(delta * delta + 4.0 * d.g_rms * d.g_rms);
    const double s = std::sin(0.5 * w * n_p * period);
    return d.transfer_ceiling * s * s;
}

double identical_pair_summed_asymptote() { return 0.75; }

BlockadeShift blockade_shift(const NuclearSpin& strong, const NuclearSpin& weak, double larmor, int harmonic) {
    BlockadeShift out;
    out.G = flip_flop_rate(strong, harmonic);
    out.omega_strong = precession_frequency(strong, larmor);
    out.omega_weak = precession_frequency(weak, larmor);
    out.delta_minus = out.omega_strong - out.omega_weak;
    if (std::abs(out.delta_minus) < kDegenerateTolerance)
        throw DegenerateSpins(fmt::format("{} and {} have |ω_B - ω_s| = {:.3g} rad/µs; the pair forms a dark mode",
                                          strong.label, weak.label, std::abs(out.delta_minus)));
    const double g2_over_d = out.G * out.G / out.delta_minus;
    out.relative = -g2_over_d / out.omega_weak;
    out.relative_exact = -g2_over_d / (out.omega_weak + g2_over_d);
    out.resonance_period = kTwoPi * harmonic / out.omega_weak;
    out.shifted_period = out.resonance_period * (1.0 + out.relative);
    return out;
}

BlockadePair make_blockade_pair(const NuclearSpin& strong, const NuclearSpin& weak, double larmor, double period,
                                int harmonic) {
    BlockadePair p;
    p.strong = effective_params(strong, larmor, period, harmonic);
    p.weak = effective_params(weak, larmor, period, harmonic);
    if (!(p.strong.g > p.weak.g))
        throw ValidationError("strong", fmt::format("{} must couple more strongly than {}", strong.label, weak.label));
    p.delta_minus = p.strong.delta - p.weak.delta;
    p.delta_plus = p.strong.delta + p.weak.delta;
    p.theta_p = std::atan2(2.0 * p.strong.g, p.strong.delta);
    return p;
}

double blockade_rabi(const BlockadePair& pair) { return 2.0 * pair.weak.g * std::sin(0.5 * pair.theta_p); }

namespace {

ComplexMatrix three_level_matrix(double delta_b, double delta_s, double big_g, double g) {
    const double dm = delta_b - delta_s;
    const double dp = delta_b + delta_s;
    return ComplexMatrix{{-0.5 * dm, big_g, 0.0}, {big_g, 0.5 * dp, g}, {0.0, g, 0.5 * dm}};
}

double smallest_gap(const ComplexMatrix& m) {
    const auto ev = hermitian_eigenvalues(m);
    return std::min(ev[1] - ev[0], ev[2] - ev[1]);
}

}  // namespace

ThreeLevelSystem three_level_blockade_eigensystem(const BlockadePair& pair) {
    ThreeLevelSystem out;
    const double db = pair.strong.delta;
    const double ds = pair.weak.delta;
    out.matrix = three_level_matrix(db, ds, pair.strong.g, pair.weak.g);
    const auto eig = hermitian_eigensolve(out.matrix);
    for (std::size_t i = 0; i < 3; ++i) out.eigenvalues[i] = eig.eigenvalues[i].real();
    out.eigenvectors = eig.eigenvectors;
    const double w = std::sqrt(db * db + 4.0 * pair.strong.g * pair.strong.g);
    out.unperturbed = {0.5 * (ds + w), 0.5 * (ds - w), 0.5 * (db - ds)};
    return out;
}

double degenerate_protocol_frequency(double omega_strong, double omega_weak, double G) {
    const double dm = omega_strong - omega_weak;
    if (std::abs(dm) < kDegenerateTolerance)
        throw DegenerateSpins(fmt::format("|ω_B - ω_s| = {:.3g} rad/µs is below the degeneracy tolerance", std::abs(dm)));
    return omega_weak + G * G / dm;
}

ThreeLevelCrossing three_level_crossing(const NuclearSpin& strong, const NuclearSpin& weak, double larmor,
                                        int harmonic) {
    const double big_g = flip_flop_rate(strong, harmonic);
    const double g = flip_flop_rate(weak, harmonic);
    const double wb = precession_frequency(strong, larmor);
    const double ws = precession_frequency(weak, larmor);
    const double dm = wb - ws;
    if (std::abs(dm) < kDegenerateTolerance)
        throw DegenerateSpins(fmt::format("{} and {} are degenerate", strong.label, weak.label));

    auto gap_at = [&](double wp) { return smallest_gap(three_level_matrix(wb - wp, ws - wp, big_g, g)); };

    const double half_width = 2.0 * std::abs(big_g * big_g / dm) + 10.0 * g;
    constexpr int kScan = 4001;
    const double step = 2.0 * half_width / (kScan - 1);
    double best_wp = ws;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double wp = ws - half_width + i * step;
        const double gap = gap_at(wp);
        if (gap < best_gap) {
            best_gap = gap;
            best_wp = wp;
        }
    }

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_wp - step, b = best_wp + step;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = gap_at(c), fd = gap_at(d);
    for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = gap_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = gap_at(d);
        }
    }

    ThreeLevelCrossing out;
    out.omega_p = 0.5 * (a + b);
    out.gap = gap_at(out.omega_p);
    out.period = kTwoPi * harmonic / out.omega_p;
    out.relative_shift = ws / out.omega_p - 1.0;
    out.perturbative = big_g < 0.3 * std::abs(dm) && std::abs(dm) < 0.1 * larmor;
    return out;
}

}  // namespace dnp

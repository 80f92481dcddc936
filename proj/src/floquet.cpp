#include "dnpsim/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include "dnpsim/engine.hpp"
#include "dnpsim/errors.hpp"
#include "dnpsim/linalg.hpp"
#include "dnpsim/parallel.hpp"

namespace dnp {

double wrap_phase(double phase) {
    constexpr double pi = std::numbers::pi;
    double r = std::remainder(phase, 2.0 * pi);
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

double FloquetSpectrum::min_overlap() const {
    double m = 1.0;
    for (const auto& row : overlaps)
        for (double o : row) m = std::min(m, o);
    return m;
}

namespace {

struct Point {
    double t = 0.0;
    double tau = 0.0;
    std::vector<double> phases;
    ComplexMatrix vectors;
};

Point evaluate(const SpinSystem& system, const SequenceBuilder& builder, double t) {
    const auto seq = builder(t);
    const auto eig = unitary_eigensolve(period_unitary(seq, system));
    Point p{t, seq.tau(), {}, eig.eigenvectors};
    p.phases.reserve(eig.eigenvalues.size());
    for (const auto& l : eig.eigenvalues) p.phases.push_back(wrap_phase(std::arg(l)));
    return p;
}

struct Matching {
    std::vector<std::size_t> target;  // row -> column
    std::vector<double> overlap;      // per row
};

/// Greedy assignment of eigenvectors at one point to those at the next by |⟨v_r|w_c⟩|.
Matching match(const ComplexMatrix& from, const ComplexMatrix& to) {
    const auto o = adjoint_times(from, to);
    const std::size_t d = o.rows();
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(d * d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) pairs.emplace_back(std::abs(o(r, c)), r, c);
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    Matching m{std::vector<std::size_t>(d, d), std::vector<double>(d, 0.0)};
    std::vector<bool> used(d, false);
    std::size_t assigned = 0;
    for (const auto& [v, r, c] : pairs) {
        if (m.target[r] != d || used[c]) continue;
        m.target[r] = c;
        m.overlap[r] = v;
        used[c] = true;
        if (++assigned == d) break;
    }
    return m;
}

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

std::vector<double> flip_weights(const ComplexMatrix& vecs, std::size_t col, std::size_t n_nuclei) {
    std::vector<double> out(n_nuclei, 0.0);
    const std::size_t d = vecs.rows();
    const std::size_t e_bit = std::size_t{1} << n_nuclei;
    for (std::size_t n = 0; n < n_nuclei; ++n) {
        const std::size_t mask = e_bit | (std::size_t{1} << (n_nuclei - 1 - n));
        double s = 0.0;
        for (std::size_t x = 0; x < d; ++x) s += std::abs(vecs(x, col)) * std::abs(vecs(x ^ mask, col));
        out[n] = s;
    }
    return out;
}

}  // namespace

FloquetSpectrum compute_spectrum(const SpinSystem& system, const SequenceBuilder& builder,
                                 const std::vector<double>& t_grid, const SpectrumOptions& options) {
    validate_grid(t_grid);
    if (!(options.overlap_threshold > 0.0 && options.overlap_threshold <= 1.0))
        throw ValidationError("overlap_threshold", "must lie in (0, 1]");
    const std::size_t workers = std::max<std::size_t>(1, options.workers);

    std::vector<Point> pts =
        parallel_map(t_grid.size(), workers, [&](std::size_t i) { return evaluate(system, builder, t_grid[i]); });

    FloquetSpectrum spec;
    std::vector<bool> check(pts.size() > 0 ? pts.size() - 1 : 0, true);
    for (unsigned level = 0; level < options.max_refinement; ++level) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < check.size(); ++i)
            if (check[i]) candidates.push_back(i);
        const auto worst = parallel_map(candidates.size(), workers, [&](std::size_t k) {
            const std::size_t i = candidates[k];
            return min_of(match(pts[i].vectors, pts[i + 1].vectors).overlap);
        });
        std::vector<std::size_t> bad;
        for (std::size_t k = 0; k < candidates.size(); ++k)
            if (worst[k] < options.overlap_threshold) bad.push_back(candidates[k]);
        if (bad.empty()) break;

        auto mids = parallel_map(bad.size(), workers, [&](std::size_t k) {
            const std::size_t i = bad[k];
            return evaluate(system, builder, 0.5 * (pts[i].t + pts[i + 1].t));
        });
        std::vector<Point> next;
        std::vector<bool> next_check;
        next.reserve(pts.size() + mids.size());
        std::size_t b = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            next.push_back(std::move(pts[i]));
            if (i + 1 == pts.size()) break;
            if (b < bad.size() && bad[b] == i) {
                next.push_back(std::move(mids[b++]));
                next_check.push_back(true);
                next_check.push_back(true);
            } else {
                next_check.push_back(false);
            }
        }
        pts = std::move(next);
        check = std::move(next_check);
        spec.refinement_levels = level + 1;
    }

    const std::size_t n_nuclei = system.reg().size();
    const std::size_t d = system.dimension();
    for (const auto& n : system.reg().nuclei) spec.labels.push_back(n.label);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pts[0].phases[a] < pts[0].phases[b]; });

    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<double> ov(d, 1.0);
        if (i > 0) {
            const auto m = match(pts[i - 1].vectors, pts[i].vectors);
            for (std::size_t br = 0; br < d; ++br) {
                ov[br] = m.overlap[order[br]];
                order[br] = m.target[order[br]];
            }
        }
        std::vector<double> phases(d);
        std::vector<std::vector<double>> w(d);
        for (std::size_t br = 0; br < d; ++br) {
            phases[br] = pts[i].phases[order[br]];
            w[br] = flip_weights(pts[i].vectors, order[br], n_nuclei);
        }
        spec.t_grid.push_back(pts[i].t);
        spec.tau.push_back(pts[i].tau);
        spec.branches.push_back(std::move(phases));
        spec.overlaps.push_back(std::move(ov));
        spec.weights.push_back(std::move(w));
    }
    return spec;
}

namespace {

double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2, double& y_min) {
    const double d0 = (y1 - y0) / (x1 - x0);
    const double d1 = (y2 - y1) / (x2 - x1);
    const double a = (d1 - d0) / (x2 - x0);
    y_min = y1;
    if (!(a > 0.0)) return x1;
    const double b = d0 - a * (x0 + x1);
    const double x = std::clamp(-b / (2.0 * a), x0, x2);
    y_min = std::clamp(y0 + (x - x0) * (d0 + a * (x - x1)), 0.0, y1);
    return x;
}

}  // namespace

std::vector<AvoidedCrossing> find_crossings(const FloquetSpectrum& spectrum, double gap_threshold,
                                            double participation_threshold) {
    if (!(gap_threshold > 0.0)) throw ValidationError("gap_threshold", "must be positive");
    std::vector<AvoidedCrossing> found;
    const auto& t = spectrum.t_grid;
    const std::size_t m = t.size();
    const std::size_t d = spectrum.dimension();
    if (m < 3) return found;

    std::vector<double> signed_gap(m), gap(m), left_max(m), right_max(m);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            for (std::size_t i = 0; i < m; ++i) {
                signed_gap[i] = wrap_phase(spectrum.branches[i][a] - spectrum.branches[i][b]);
                gap[i] = std::abs(signed_gap[i]);
            }
            left_max[0] = gap[0];
            for (std::size_t i = 1; i < m; ++i) left_max[i] = std::max(left_max[i - 1], gap[i]);
            right_max[m - 1] = gap[m - 1];
            for (std::size_t i = m - 1; i-- > 0;) right_max[i] = std::max(right_max[i + 1], gap[i]);

            for (std::size_t i = 1; i + 1 < m; ++i) {
                if (!(gap[i] < gap_threshold)) continue;
                if (!(gap[i] <= gap[i - 1] && gap[i] < gap[i + 1])) continue;
                if (std::signbit(signed_gap[i - 1]) != std::signbit(signed_gap[i + 1])) continue;
                const double prominence = std::min(left_max[i - 1], right_max[i + 1]) - gap[i];
                if (prominence < 0.5 * gap[i]) continue;

                AvoidedCrossing c;
                c.t_center = parabola_vertex(t[i - 1], gap[i - 1], t[i], gap[i], t[i + 1], gap[i + 1], c.gap);
                c.tau_center = c.t_center * spectrum.tau[i] / t[i];
                c.branch_pair = {a, b};
                c.grid_index = i;
                std::vector<std::pair<double, std::size_t>> ranked;
                for (std::size_t n = 0; n < spectrum.labels.size(); ++n) {
                    const double w = std::max(spectrum.weights[i][a][n], spectrum.weights[i][b][n]);
                    if (w >= participation_threshold) ranked.emplace_back(w, n);
                }
                std::stable_sort(ranked.begin(), ranked.end(),
                                 [](const auto& x, const auto& y) { return x.first > y.first; });
                for (const auto& [w, n] : ranked) {
                    c.participating_spins.push_back(spectrum.labels[n]);
                    c.participation.push_back(w);
                }
                found.push_back(std::move(c));
            }
        }
    }

    std::stable_sort(found.begin(), found.end(),
                     [](const AvoidedCrossing& x, const AvoidedCrossing& y) { return x.t_center < y.t_center; });
    std::vector<AvoidedCrossing> merged;
    for (auto& c : found) {
        const std::size_t i = c.grid_index;
        const double step = std::max(t[i] - t[i - 1], t[i + 1] - t[i]);
        bool duplicate = false;
        for (auto& kept : merged) {
            if (std::abs(kept.t_center - c.t_center) <= step &&
                std::abs(kept.gap - c.gap) <= 0.1 * std::max(kept.gap, c.gap) + 1e-9) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) merged.push_back(std::move(c));
    }
    return merged;
}

}  // namespace dnp

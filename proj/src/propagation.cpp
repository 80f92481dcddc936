#include "dnpsim/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "dnpsim/errors.hpp"
#include "dnpsim/modulation.hpp"

namespace dnp {

struct SpinSystem::Cache {
    std::mutex mutex;
    std::map<std::pair<double, double>, std::shared_ptr<const EigenDecomposition>> driven;
    std::array<std::shared_ptr<const EigenDecomposition>, 2> nuclear;
};

SpinSystem::SpinSystem(SpinRegister reg, Coupling coupling)
    : reg_(std::move(reg)), coupling_(coupling), cache_(std::make_shared<Cache>()) {
    reg_.validate();
    h0_ = static_hamiltonian(reg_, coupling_);
    eig_ = hermitian_eigensolve(h0_);
}

ComplexMatrix SpinSystem::free_propagator(double t) const { return expm_from_eigen(eig_, t); }

ComplexMatrix SpinSystem::pulse_propagator(double angle, double phase, double rabi) const {
    if (!(rabi > 0.0)) throw ValidationError("rabi", "finite pulse needs a positive Rabi frequency");
    std::shared_ptr<const EigenDecomposition> eig;
    {
        std::lock_guard lock(cache_->mutex);
        auto& slot = cache_->driven[{phase, rabi}];
        if (!slot) {
            std::vector<ComplexMatrix> drive(reg_.size() + 1);
            drive[0] = std::cos(phase) * spin_half('x') + std::sin(phase) * spin_half('y');
            slot = std::make_shared<EigenDecomposition>(hermitian_eigensolve(h0_ + rabi * embed_sites(drive)));
        }
        eig = slot;
    }
    return expm_from_eigen(*eig, angle / rabi);
}

ComplexMatrix SpinSystem::wait_propagator(double t, std::size_t electron_state) const {
    if (electron_state > 1) throw ValidationError("electron_state", "must be 0 or 1");
    std::shared_ptr<const EigenDecomposition> eig;
    {
        std::lock_guard lock(cache_->mutex);
        auto& slot = cache_->nuclear[electron_state];
        if (!slot) slot = std::make_shared<EigenDecomposition>(hermitian_eigensolve(nuclear_block(h0_, electron_state)));
        eig = slot;
    }
    return expm_from_eigen(*eig, t);
}

void apply_electron_left(ComplexMatrix& u, const ComplexMatrix& r) {
    const std::size_t d = u.rows() / 2;
    const std::size_t cols = u.cols();
    for (std::size_t i = 0; i < d; ++i) {
        Complex* top = &u(i, 0);
        Complex* bottom = &u(d + i, 0);
        for (std::size_t c = 0; c < cols; ++c) {
            const Complex a = top[c];
            const Complex b = bottom[c];
            top[c] = r(0, 0) * a + r(0, 1) * b;
            bottom[c] = r(1, 0) * a + r(1, 1) * b;
        }
    }
}

ComplexMatrix period_unitary(const PulseSequence& seq, const SpinSystem& system) {
    ComplexMatrix u = ComplexMatrix::identity(system.dimension());
    std::map<double, ComplexMatrix> free_cache;
    for (const auto& e : seq.events) {
        if (e.kind == EventKind::FreeEvolution) {
            if (e.duration == 0.0) continue;
            auto it = free_cache.find(e.duration);
            if (it == free_cache.end()) it = free_cache.emplace(e.duration, system.free_propagator(e.duration)).first;
            u = it->second * u;
        } else if (e.duration == 0.0) {
            apply_electron_left(u, electron_rotation(e.angle, e.phase));
        } else {
            const double rabi = e.angle / e.duration;
            u = system.pulse_propagator(e.angle, e.phase, rabi) * u;
        }
    }
    return u;
}

ComplexMatrix period_unitary(const PulseSequence& seq, const SpinRegister& reg, Coupling coupling) {
    return period_unitary(seq, SpinSystem(reg, coupling));
}

ComplexMatrix average_hamiltonian_numeric(const PulseSequence& seq, const SpinRegister& reg,
                                          std::optional<double> frame_frequency, int steps) {
    if (steps < 1) throw ValidationError("steps", "must be >= 1");
    const auto segments = toggling_segments(seq);
    const double period = seq.period;
    const double wf = frame_frequency.value_or(2.0 * std::numbers::pi * seq.harmonic / period);

    // Averages of f_a, f_a cos(ω_f t), f_a sin(ω_f t).
    std::array<double, 3> mean{}, mean_cos{}, mean_sin{};
    const double dt = period / steps;
    std::size_t seg = 0;
    for (int i = 0; i < steps; ++i) {
        const double t = (i + 0.5) * dt;
        while (seg + 1 < segments.size() && t >= segments[seg].start + segments[seg].duration) ++seg;
        const auto& s = segments[seg];
        const bool inside = t >= s.start && t < s.start + s.duration;
        if (!inside) continue;
        const double c = std::cos(wf * t);
        const double sn = std::sin(wf * t);
        for (int a = 0; a < 3; ++a) {
            mean[a] += s.f[a];
            mean_cos[a] += s.f[a] * c;
            mean_sin[a] += s.f[a] * sn;
        }
    }
    for (int a = 0; a < 3; ++a) {
        mean[a] /= steps;
        mean_cos[a] /= steps;
        mean_sin[a] /= steps;
    }

    const std::size_t sites = reg.size() + 1;
    const std::array<char, 3> axes{'x', 'y', 'z'};
    ComplexMatrix h(reg.dimension(), reg.dimension());
    for (std::size_t n = 0; n < reg.size(); ++n) {
        const auto& nuc = reg.nuclei[n];
        const double delta = precession_frequency(nuc, reg.larmor) - wf;
        std::vector<ComplexMatrix> z(sites);
        z[n + 1] = spin_half('z');
        h += delta * embed_sites(z);
        for (int a = 0; a < 3; ++a) {
            auto pair = [&](char nuclear_axis) {
                std::vector<ComplexMatrix> ops(sites);
                ops[0] = spin_half(axes[a]);
                ops[n + 1] = spin_half(nuclear_axis);
                return embed_sites(ops);
            };
            if (mean[a] != 0.0) h += (nuc.a_parallel * mean[a]) * pair('z');
            if (mean_cos[a] != 0.0) h += (nuc.a_perp * mean_cos[a]) * pair('x');
            if (mean_sin[a] != 0.0) h -= (nuc.a_perp * mean_sin[a]) * pair('y');
        }
    }
    return h;
}

}  // namespace dnp

#include "dnpsim/modulation.hpp"

#include <cmath>
#include <numbers>

#include "dnpsim/errors.hpp"

namespace dnp {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_period(double t, double period) {
    double x = std::fmod(t, period);
    if (x < 0.0) x += period;
    return x;
}

}  // namespace

FourierCoefficients modulation_coefficients(int k) {
    if (k < 1) throw ValidationError("k", "harmonic must be >= 1");
    const double kd = static_cast<double>(k);
    const double odd = (k % 2 == 1) ? 1.0 : 0.0;
    const double pre = odd / (kd * kPi);
    FourierCoefficients c;
    c.k = k;
    c.a1 = pre * (4.0 * std::sin(kd * kPi / 4.0) - 2.0 * std::sin(kd * kPi / 2.0));
    c.b1 = pre * (-4.0 * std::cos(kd * kPi / 4.0) + 2.0);
    const double s = std::sin(kd * kPi / 2.0);
    c.a2 = -s * c.b1;
    c.b2 = s * c.a1;
    return c;
}

double flip_flop_factor(int k) {
    const auto c = modulation_coefficients(k);
    return 0.25 * std::hypot(c.a1, c.b1);
}

double ModulationFunctions::f1(double t) const {
    const double x = wrap_period(t, period()) / tau;
    if (x < 0.5) return 1.0;
    if (x < 1.0) return -1.0;
    if (x < 2.0) return 0.0;
    if (x < 2.5) return -1.0;
    if (x < 3.0) return 1.0;
    return 0.0;
}

double ModulationFunctions::f2(double t) const { return f1(t - tau); }

std::vector<FourierCoefficients> ModulationFunctions::coefficients() const {
    std::vector<FourierCoefficients> out;
    for (int k = 1; k <= k_max; ++k) out.push_back(modulation_coefficients(k));
    return out;
}

double ModulationFunctions::partial_sum(int which, double t, int kmax) const {
    if (which != 1 && which != 2) throw ValidationError("which", "modulation function index must be 1 or 2");
    double s = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        const auto c = modulation_coefficients(k);
        const double arg = k * kPi * t / (2.0 * tau);
        s += (which == 1) ? c.a1 * std::cos(arg) + c.b1 * std::sin(arg) : c.a2 * std::cos(arg) + c.b2 * std::sin(arg);
    }
    return s;
}

ModulationFunctions modulation_functions(double tau, int k_max) {
    if (!(tau > 0.0)) throw InvalidTau("tau must be positive");
    if (k_max < 1) throw ValidationError("k_max", "must be >= 1");
    return {tau, k_max};
}

ComplexMatrix electron_rotation(double angle, double phase) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    const Complex off = Complex(0.0, -s) * std::exp(Complex(0.0, -phase));
    const Complex off_t = Complex(0.0, -s) * std::exp(Complex(0.0, phase));
    return {{c, off}, {off_t, c}};
}

std::vector<TogglingSegment> toggling_segments(const PulseSequence& seq) {
    if (!seq.ideal()) throw NotIdealPulses("toggling-frame segments need ideal pulses");
    const ComplexMatrix sz = spin_half('z');
    const ComplexMatrix sx = spin_half('x');
    const ComplexMatrix sy = spin_half('y');
    ComplexMatrix uc = ComplexMatrix::identity(2);
    std::vector<TogglingSegment> out;
    double t = 0.0;
    for (const auto& e : seq.events) {
        if (e.kind == EventKind::Rotation) {
            uc = electron_rotation(e.angle, e.phase) * uc;
            continue;
        }
        const ComplexMatrix img = adjoint_times(uc, sz * uc);
        TogglingSegment seg;
        seg.start = t;
        seg.duration = e.duration;
        seg.f = {2.0 * trace_of_product(sx, img).real(), 2.0 * trace_of_product(sy, img).real(),
                 2.0 * trace_of_product(sz, img).real()};
        for (auto& v : seg.f)
            if (std::abs(v) < 1e-14) v = 0.0;
        out.push_back(seg);
        t += e.duration;
    }
    return out;
}

}  // namespace dnp

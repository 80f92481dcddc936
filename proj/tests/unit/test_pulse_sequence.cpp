#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dnpsim/errors.hpp"
#include "dnpsim/modulation.hpp"
#include "dnpsim/pulse_sequence.hpp"

using namespace dnp;
using std::numbers::pi;

namespace {

std::vector<PulseEvent> rotations(const PulseSequence& s) {
    std::vector<PulseEvent> out;
    for (const auto& e : s.events)
        if (e.kind == EventKind::Rotation) out.push_back(e);
    return out;
}

}  // namespace

TEST_CASE("pulsepol: ideal period layout") {
    const auto s = pulsepol_sequence(1.0);
    CHECK(s.period == 4.0);
    CHECK(s.rotation_count() == 12);
    CHECK(s.free_count() == 8);
    CHECK(s.total_duration() == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(s.ideal());
    for (const auto& e : s.events)
        if (e.kind == EventKind::FreeEvolution) CHECK(e.duration == 0.5);
    CHECK(s.tau() == 1.0);
}

TEST_CASE("pulsepol: rotation angles and phases") {
    const auto r = rotations(pulsepol_sequence(0.7));
    const std::vector<double> angles{pi / 2, pi, pi / 2, pi / 2, pi, pi / 2};
    const std::vector<double> phases{phase::Y, phase::minus_X, phase::Y, phase::X, phase::Y, phase::X};
    REQUIRE(r.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(r[i].angle == doctest::Approx(angles[i % 6]));
        CHECK(r[i].phase == doctest::Approx(phases[i % 6]));
        CHECK(r[i].duration == 0.0);
    }
}

TEST_CASE("pulsepol: finite pulses are centred and the period is preserved") {
    const double tau = 1.74, rabi = 2.0 * pi * 20.0;  // 20 MHz drive
    const auto s = pulsepol_sequence(tau, PulseMode::finite(rabi));
    CHECK(s.total_duration() == doctest::Approx(4 * tau).epsilon(1e-14));
    CHECK_FALSE(s.ideal());
    CHECK(s.rotation_count() == 12);
    const double half = (pi / 2) / rabi, full = pi / rabi;
    // Walk the events and check each pulse group is centred on its ideal instant.
    std::vector<std::pair<double, double>> groups;  // (start, end)
    double t = 0.0;
    bool in_group = false;
    for (const auto& e : s.events) {
        if (e.kind == EventKind::Rotation) {
            if (!in_group) groups.push_back({t, t});
            in_group = true;
            groups.back().second = t + e.duration;
        } else {
            in_group = false;
        }
        t += e.duration;
    }
    REQUIRE(groups.size() == 9);
    CHECK(groups[0].first == 0.0);
    CHECK(groups[0].second == doctest::Approx(half));
    const std::vector<double> centres{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    for (std::size_t g = 1; g < 8; ++g) CHECK(0.5 * (groups[g].first + groups[g].second) == doctest::Approx(centres[g - 1] * tau));
    CHECK(groups[1].second - groups[1].first == doctest::Approx(full));
    CHECK(groups[2].second - groups[2].first == doctest::Approx(2 * half));
    CHECK(groups[8].second == doctest::Approx(4 * tau));
}

TEST_CASE("pulsepol: invalid tau") {
    CHECK_THROWS_AS(pulsepol_sequence(0.0), InvalidTau);
    CHECK_THROWS_AS(pulsepol_sequence(-1.0), InvalidTau);
    CHECK_THROWS_AS(pulsepol_sequence(0.01, PulseMode::finite(10.0)), InvalidTau);
    CHECK_THROWS_AS(PulseMode::finite(0.0), ValidationError);
}

TEST_CASE("cpmg: layout") {
    const auto s = cpmg_sequence(1.0);
    CHECK(s.period == 2.0);
    CHECK(s.rotation_count() == 2);
    CHECK(s.total_duration() == doctest::Approx(2.0));
    for (const auto& r : rotations(s)) {
        CHECK(r.angle == doctest::Approx(pi));
        CHECK(r.phase == 0.0);
    }
    const auto sq = electron_rotation(pi, phase::X) * electron_rotation(pi, phase::X);
    CHECK(max_abs_diff(sq, -1.0 * ComplexMatrix::identity(2)) < 1e-15);

    const auto f = cpmg_sequence(1.0, PulseMode::finite(50.0));
    CHECK(f.total_duration() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.events[0].duration == doctest::Approx(0.5 - 0.5 * pi / 50.0));
    CHECK_THROWS_AS(cpmg_sequence(0.0), InvalidTau);
}

TEST_CASE("builders and resonance periods") {
    const auto b = make_builder(Protocol::PulsePol, PulseMode::ideal(), 3);
    const auto s = b(6.9);
    CHECK(s.tau() == doctest::Approx(6.9 / 4));
    CHECK(s.harmonic == 3);
    const auto c = make_builder(Protocol::Cpmg)(3.0);
    CHECK(c.tau() == doctest::Approx(1.5));
    CHECK(resonance_period(Protocol::PulsePol, 3, 2.75) == doctest::Approx(6 * pi / 2.75));
    CHECK(protocol_from_string("cpmg") == Protocol::Cpmg);
    CHECK_THROWS_AS(protocol_from_string("xy8"), ValidationError);
}

TEST_CASE("rabi warning and timing table") {
    const auto reg = reference_register({"C3"});
    CHECK_FALSE(rabi_warning(PulseMode::ideal(), reg).has_value());
    CHECK(rabi_warning(PulseMode::finite(10.0), reg).has_value());
    CHECK_FALSE(rabi_warning(PulseMode::finite(100.0), reg).has_value());
    const auto table = pulsepol_sequence(1.0).timing_table();
    CHECK(table.find("rotation") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 22);
}

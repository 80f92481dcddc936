#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dnpsim/analytic.hpp"
#include "dnpsim/engine.hpp"
#include "dnpsim/errors.hpp"
#include "dnpsim/floquet.hpp"
#include "dnpsim/propagation.hpp"
#include "dnpsim/report.hpp"

namespace py = pybind11;
using namespace dnp;

namespace {

py::array_t<std::complex<double>> to_numpy(const ComplexMatrix& m) {
    py::array_t<std::complex<double>> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
    return out;
}

py::array_t<double> table(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    py::array_t<double> out({rows.size(), cols});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) view(i, j) = rows[i][j];
    return out;
}

SequenceBuilder builder_for(const std::string& protocol, int harmonic, double rabi) {
    if (rabi < 0.0) throw ValidationError("rabi", "must be >= 0");
    const auto mode = rabi > 0.0 ? PulseMode::finite(rabi) : PulseMode::ideal();
    return make_builder(protocol_from_string(protocol), mode, harmonic);
}

py::dict sweep(const SpinRegister& reg, const std::vector<double>& t_grid, const std::string& protocol, int harmonic,
               unsigned n_p, unsigned repetitions, double wait_time, std::size_t workers, double rabi,
               const std::string& coupling) {
    const auto builder = builder_for(protocol, harmonic, rabi);
    PolarisationTrace trace;
    {
        py::gil_scoped_release release;
        trace = sweep_trace(SpinSystem(reg, coupling_from_string(coupling)), builder, {n_p, repetitions, wait_time, 0},
                            t_grid, workers);
    }
    py::dict out;
    out["t"] = trace.t_grid;
    out["tau"] = trace.tau;
    out["labels"] = trace.labels;
    out["polarisation"] = table(trace.values, trace.labels.size());
    return out;
}

py::dict spectrum(const SpinRegister& reg, const std::vector<double>& t_grid, const std::string& protocol, int harmonic,
                  double gap_threshold, unsigned max_refinement, std::size_t workers, double rabi,
                  const std::string& coupling) {
    const auto builder = builder_for(protocol, harmonic, rabi);
    FloquetSpectrum s;
    std::vector<AvoidedCrossing> crossings;
    {
        py::gil_scoped_release release;
        s = compute_spectrum(SpinSystem(reg, coupling_from_string(coupling)), builder, t_grid,
                             {workers, max_refinement, 0.9});
        crossings = find_crossings(s, gap_threshold);
    }
    py::list cx;
    for (const auto& c : crossings) {
        py::dict d;
        d["t_center"] = c.t_center;
        d["tau_center"] = c.tau_center;
        d["gap"] = c.gap;
        d["branches"] = py::make_tuple(c.branch_pair.first, c.branch_pair.second);
        d["spins"] = c.participating_spins;
        d["participation"] = c.participation;
        cx.append(d);
    }
    py::dict out;
    out["t"] = s.t_grid;
    out["tau"] = s.tau;
    out["labels"] = s.labels;
    out["eigenphases"] = table(s.branches, s.dimension());
    out["min_overlap"] = s.min_overlap();
    out["crossings"] = cx;
    return out;
}

py::dict schedule(const SpinRegister& reg, const std::vector<std::tuple<double, unsigned, unsigned, double>>& stages,
                  const std::string& protocol, int harmonic, double rabi, const std::string& coupling) {
    const auto builder = builder_for(protocol, harmonic, rabi);
    std::vector<ScheduleStage> runs;
    for (const auto& [period, reps, n_p, wait] : stages) runs.push_back({builder(period), n_p, reps, wait, 0});
    ScheduleTrace trace;
    {
        py::gil_scoped_release release;
        trace = run_schedule(SpinSystem(reg, coupling_from_string(coupling)), runs);
    }
    std::vector<std::vector<double>> values;
    std::vector<double> time;
    std::vector<std::size_t> stage;
    for (const auto& row : trace.rows) {
        values.push_back(row.values);
        time.push_back(row.cumulative_time_us);
        stage.push_back(row.stage_index);
    }
    py::dict out;
    out["labels"] = trace.labels;
    out["stage"] = stage;
    out["time"] = time;
    out["polarisation"] = table(values, trace.labels.size());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "NV-centre nuclear polarisation simulator";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<NuclearSpin>(m, "NuclearSpin")
        .def(py::init([](std::string label, double a_parallel, double a_perp) {
                 return NuclearSpin{std::move(label), a_parallel, a_perp};
             }),
             py::arg("label"), py::arg("a_parallel"), py::arg("a_perp"))
        .def_readwrite("label", &NuclearSpin::label)
        .def_readwrite("a_parallel", &NuclearSpin::a_parallel)
        .def_readwrite("a_perp", &NuclearSpin::a_perp)
        .def("__repr__", [](const NuclearSpin& n) {
            return "NuclearSpin('" + n.label + "', a_parallel=" + std::to_string(n.a_parallel) +
                   ", a_perp=" + std::to_string(n.a_perp) + ")";
        });

    py::class_<SpinRegister>(m, "SpinRegister")
        .def(py::init<>())
        .def_readwrite("larmor", &SpinRegister::larmor)
        .def_readwrite("nuclei", &SpinRegister::nuclei)
        .def_property_readonly("dimension", &SpinRegister::dimension)
        .def("__len__", &SpinRegister::size)
        .def("validate", &SpinRegister::validate)
        .def("subset", &SpinRegister::subset, py::arg("labels"))
        .def("to_json", [](const SpinRegister& r) { return register_to_json(r); });

    m.def("load_register", &load_register, py::arg("text"), "Register from its JSON text.");
    m.def("load_register_file", &load_register_file, py::arg("path"));
    m.def("reference_register", &reference_register, py::arg("labels"),
          py::arg("larmor") = larmor_from_field(kDefaultFieldGauss),
          "Register of reference-table carbons, e.g. ['C3', 'C21'].");
    m.def("precession_frequency", &precession_frequency, py::arg("nucleus"), py::arg("larmor"));
    m.def("khz_to_rad_per_us", &khz_to_rad_per_us);

    m.def(
        "period_unitary",
        [](const SpinRegister& reg, double period, const std::string& protocol, int harmonic, double rabi,
           const std::string& coupling) {
            return to_numpy(period_unitary(builder_for(protocol, harmonic, rabi)(period), reg, coupling_from_string(coupling)));
        },
        py::arg("register"), py::arg("period"), py::arg("protocol") = "pulsepol", py::arg("harmonic") = 3,
        py::arg("rabi") = 0.0, py::arg("coupling") = "projector");

    m.def("sweep", &sweep, py::arg("register"), py::arg("t_grid"), py::arg("protocol") = "pulsepol",
          py::arg("harmonic") = 3, py::arg("n_p") = 4, py::arg("repetitions") = 100,
          py::arg("wait_time") = kDefaultWaitUs, py::arg("workers") = 1, py::arg("rabi") = 0.0,
          py::arg("coupling") = "projector",
          "⟨Iz⟩ of every nucleus against protocol period T (µs). Returns t, tau, labels, polarisation[T, spin].");
    m.def("spectrum", &spectrum, py::arg("register"), py::arg("t_grid"), py::arg("protocol") = "pulsepol",
          py::arg("harmonic") = 3, py::arg("gap_threshold") = 1.0, py::arg("max_refinement") = 6,
          py::arg("workers") = 1, py::arg("rabi") = 0.0, py::arg("coupling") = "projector",
          "Floquet eigenphases against T with detected avoided crossings.");
    m.def("schedule", &schedule, py::arg("register"), py::arg("stages"), py::arg("protocol") = "pulsepol",
          py::arg("harmonic") = 3, py::arg("rabi") = 0.0, py::arg("coupling") = "projector",
          "Stages are (T_us, repetitions, n_p, wait_us) tuples run back to back.");

    py::class_<EffectiveSpinParams>(m, "EffectiveSpinParams")
        .def_readonly("g", &EffectiveSpinParams::g)
        .def_readonly("delta", &EffectiveSpinParams::delta)
        .def_readonly("omega_i", &EffectiveSpinParams::omega_i)
        .def_readonly("omega_p", &EffectiveSpinParams::omega_p)
        .def_readonly("harmonic", &EffectiveSpinParams::harmonic)
        .def_readonly("large_detuning", &EffectiveSpinParams::large_detuning);
    m.def("effective_params", &effective_params, py::arg("nucleus"), py::arg("larmor"), py::arg("period"),
          py::arg("harmonic") = 3);
    m.def("flip_flop_rate", &flip_flop_rate, py::arg("nucleus"), py::arg("harmonic") = 3);
    m.def(
        "single_spin_polarisation",
        [](const EffectiveSpinParams& p, unsigned n_p, double period) {
            return single_spin_polarisation(p, n_p, period).value;
        },
        py::arg("params"), py::arg("n_p"), py::arg("period"));
    m.def(
        "side_dips",
        [](const EffectiveSpinParams& p, unsigned n_p, int n_max) {
            std::vector<std::tuple<int, int, double>> out;
            for (const auto& d : side_dips(p, n_p, n_max)) out.emplace_back(d.n, d.sign, d.period);
            return out;
        },
        py::arg("params"), py::arg("n_p"), py::arg("n_max") = 3, "(n, sign, period) tuples sorted by period.");
    m.def(
        "blockade_shift",
        [](const NuclearSpin& strong, const NuclearSpin& weak, double larmor, int harmonic) {
            const auto b = blockade_shift(strong, weak, larmor, harmonic);
            py::dict d;
            d["relative"] = b.relative;
            d["relative_exact"] = b.relative_exact;
            d["resonance_period"] = b.resonance_period;
            d["shifted_period"] = b.shifted_period;
            d["G"] = b.G;
            return d;
        },
        py::arg("strong"), py::arg("weak"), py::arg("larmor"), py::arg("harmonic") = 3);
}

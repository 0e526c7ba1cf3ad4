#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "husimi_flow/errors.hpp"
#include "husimi_flow/experiment.hpp"
#include "husimi_flow/hamiltonian.hpp"
#include "husimi_flow/propagator.hpp"

namespace py = pybind11;
using namespace husimi_flow;

namespace {

template <typename T>
py::array_t<T> grid_array(const std::vector<T>& v, const PhaseSpaceWindow& w) {
  py::array_t<T> out({static_cast<py::ssize_t>(w.np), static_cast<py::ssize_t>(w.nx)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict zero_dict(const HusimiZero& z) {
  py::dict d;
  d["x"] = z.x;
  d["p"] = z.p;
  d["z"] = z.z;
  d["residual"] = z.residual;
  d["local_q"] = z.local_q;
  d["significant"] = z.significant;
  d["reproduced"] = z.reproduced ? py::cast(*z.reproduced) : py::none();
  d["stable"] = z.stable();
  return d;
}

py::dict point_dict(const StagnationPoint& s) {
  py::dict d;
  d["id"] = s.id;
  d["x"] = s.x;
  d["p"] = s.p;
  d["z"] = s.z;
  d["kind"] = std::string(to_string(s.kind));
  d["class"] = std::string(to_string(s.classification.kind));
  d["lambda"] = py::make_tuple(s.classification.lambda_plus, s.classification.lambda_minus);
  d["index"] = s.index;
  d["predicted_index"] = s.classification.predicted_index;
  d["partner"] = s.partner;
  d["stable"] = s.stable;
  d["anomaly"] = s.anomaly;
  return d;
}

py::dict snapshot_dict(const Snapshot& s) {
  const auto& w = s.husimi.window;
  py::dict d;
  d["time"] = s.time;
  py::array_t<double> x(w.nx), p(w.np);
  for (int i = 0; i < w.nx; ++i) x.mutable_at(i) = w.x_at(i);
  for (int i = 0; i < w.np; ++i) p.mutable_at(i) = w.p_at(i);
  d["x"] = x;
  d["p"] = p;
  d["Q"] = grid_array(s.husimi.q, w);
  d["J"] = grid_array(s.current.j, w);
  d["J_classical"] = grid_array(s.classical.j, w);
  py::list zeros, points, dipoles;
  for (const auto& z : s.zeros.zeros) zeros.append(zero_dict(z));
  for (const auto& p : s.stagnation.points) points.append(point_dict(p));
  for (const auto& dp : s.dipoles.dipoles) dipoles.append(py::make_tuple(dp.saddle, dp.partner, dp.separation));
  d["zeros"] = zeros;
  d["stagnation"] = points;
  d["dipoles"] = dipoles;
  d["unpaired"] = s.dipoles.unpaired;
  d["anomalies"] = s.stagnation.anomalies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Husimi-function flow of a wavepacket scattering off a Gaussian barrier";

  py::register_exception<PhysicsError>(m, "PhysicsError", PyExc_RuntimeError);

  py::enum_<PotentialKind>(m, "Potential")
      .value("gaussian_barrier", PotentialKind::gaussian_barrier)
      .value("free", PotentialKind::free)
      .value("harmonic", PotentialKind::harmonic);

  py::class_<PhaseSpaceConfig>(m, "PhaseSpaceConfig")
      .def(py::init<>())
      .def_readwrite("hbar", &PhaseSpaceConfig::hbar)
      .def_readwrite("mass", &PhaseSpaceConfig::mass)
      .def_readwrite("omega", &PhaseSpaceConfig::omega)
      .def_readwrite("potential", &PhaseSpaceConfig::potential)
      .def_readwrite("v0", &PhaseSpaceConfig::v0)
      .def_readwrite("k", &PhaseSpaceConfig::k)
      .def_readwrite("x_min", &PhaseSpaceConfig::x_min)
      .def_readwrite("x_max", &PhaseSpaceConfig::x_max)
      .def_readwrite("dx", &PhaseSpaceConfig::dx)
      .def_readwrite("dt", &PhaseSpaceConfig::dt)
      .def_readwrite("trunc_order", &PhaseSpaceConfig::trunc_order)
      .def_readwrite("boundary_floor", &PhaseSpaceConfig::boundary_floor)
      .def_property_readonly("sigma_x", &PhaseSpaceConfig::sigma_x)
      .def_property_readonly("sigma_p", &PhaseSpaceConfig::sigma_p)
      .def("validate", &PhaseSpaceConfig::validate);

  py::class_<PhaseSpaceWindow>(m, "Window")
      .def(py::init<>())
      .def(py::init([](double x_lo, double x_hi, double p_lo, double p_hi, int nx, int np) {
             return PhaseSpaceWindow{x_lo, x_hi, p_lo, p_hi, nx, np};
           }),
           py::arg("x_lo"), py::arg("x_hi"), py::arg("p_lo"), py::arg("p_hi"), py::arg("nx") = 200,
           py::arg("np") = 200)
      .def_readwrite("x_lo", &PhaseSpaceWindow::x_lo)
      .def_readwrite("x_hi", &PhaseSpaceWindow::x_hi)
      .def_readwrite("p_lo", &PhaseSpaceWindow::p_lo)
      .def_readwrite("p_hi", &PhaseSpaceWindow::p_hi)
      .def_readwrite("nx", &PhaseSpaceWindow::nx)
      .def_readwrite("np", &PhaseSpaceWindow::np);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("preset", &RunConfig::preset)
      .def_readwrite("physics", &RunConfig::physics)
      .def_readwrite("x0", &RunConfig::x0)
      .def_readwrite("p0", &RunConfig::p0)
      .def_readwrite("window", &RunConfig::window)
      .def_readwrite("t_cap", &RunConfig::t_cap)
      .def("validate", &RunConfig::validate)
      .def("to_text", [](const RunConfig& c) { return to_text(c); })
      .def("hash", [](const RunConfig& c) { return config_hash(c); });

  m.def("preset", &preset_by_name, py::arg("name"));
  m.def("parse_config", [](const std::string& text, const RunConfig& base) { return parse_run_config(text, base); },
        py::arg("text"), py::arg("base") = paper_preset());

  m.def("z_from_xp", &z_from_xp, py::arg("x"), py::arg("p"), py::arg("cfg"));
  m.def("xp_from_z", [](complex z, const PhaseSpaceConfig& cfg) {
    const auto pt = xp_from_z(z, cfg);
    return py::make_tuple(pt.x, pt.p);
  });

  py::class_<AveragedHamiltonian>(m, "AveragedHamiltonian")
      .def(py::init<const PhaseSpaceConfig&>())
      .def_property_readonly("alpha", &AveragedHamiltonian::alpha)
      .def_property_readonly("max_order", &AveragedHamiltonian::max_order)
      .def("value", &AveragedHamiltonian::value)
      .def("value_xp", &AveragedHamiltonian::value_xp)
      .def("mixed_partial", py::overload_cast<complex, int, int>(&AveragedHamiltonian::mixed_partial, py::const_));

  m.def(
      "husimi",
      [](const RunConfig& rc, double t) {
        HusimiField f;
        {
          py::gil_scoped_release release;
          const auto psi = evolve(initial_coherent_state(rc.x0, rc.p0, rc.physics), t, {}, rc.physics).back();
          f = husimi_field(psi, rc.window, rc.physics, 0);
        }
        return grid_array(f.q, rc.window);
      },
      py::arg("config"), py::arg("time"), "Husimi density on the window, shape (np, nx).");

  m.def(
      "transmission",
      [](const RunConfig& rc) {
        const QuantumTransmission q = quantum_transmission(rc);
        py::dict d;
        d["t_final"] = q.t_final;
        d["T"] = q.transmission;
        d["R"] = q.reflection;
        d["norm_drift"] = q.norm_drift;
        d["barrier_mass"] = q.barrier_mass;
        d["stop"] = std::string(to_string(q.stop));
        return d;
      },
      py::arg("config"));

  m.def(
      "classical_transmission",
      [](const RunConfig& rc, double t_final) {
        return classical_transmission(rc.x0, rc.p0, rc.physics, t_final).transmission;
      },
      py::arg("config"), py::arg("t_final"));

  m.def(
      "sweep",
      [](const RunConfig& rc, std::vector<double> p0) {
        SweepResult sweep;
        {
          py::gil_scoped_release release;
          sweep = run_transmission_sweep(p0.empty() ? default_sweep_grid() : p0, rc);
        }
        py::list rows;
        for (const auto& r : sweep.rows) {
          py::dict d;
          d["p0"] = r.p0;
          d["t_final"] = r.t_final;
          d["T_Q"] = r.t_q;
          d["T_C"] = r.t_c;
          d["R_Q"] = r.r_q;
          d["R_C"] = r.r_c;
          d["D_T"] = r.d_t;
          d["D_R"] = r.d_r;
          d["stop"] = std::string(to_string(r.stop));
          d["failure"] = r.failure;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("p0") = std::vector<double>{});

  m.def(
      "snapshots",
      [](const RunConfig& rc, std::vector<double> times, bool reproducibility) {
        SnapshotOptions opts;
        opts.reproducibility = reproducibility;
        std::vector<Snapshot> snaps;
        {
          py::gil_scoped_release release;
          snaps = run_snapshot_pipeline(rc, times, opts);
        }
        py::list out;
        for (const auto& s : snaps) out.append(snapshot_dict(s));
        return out;
      },
      py::arg("config"), py::arg("times"), py::arg("reproducibility") = true);

  m.def(
      "continuity",
      [](const RunConfig& rc, double t, std::vector<int> orders) {
        ContinuityStudy study;
        {
          py::gil_scoped_release release;
          const auto psi = evolve(initial_coherent_state(rc.x0, rc.p0, rc.physics), t, {}, rc.physics).back();
          study = continuity_study(psi, rc.window, rc.physics, orders);
        }
        py::dict d;
        d["orders"] = study.orders;
        d["residual"] = study.residual_norms;
        d["components"] = study.component_norms;
        d["dq_dt"] = study.dq_dt_norm;
        return d;
      },
      py::arg("config"), py::arg("time"), py::arg("orders"));
}

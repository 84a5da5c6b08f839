#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pimpcs/dataset.hpp"
#include "pimpcs/evaluate.hpp"
#include "pimpcs/io.hpp"
#include "pimpcs/lyapunov.hpp"
#include "pimpcs/mpc.hpp"
#include "pimpcs/surrogate.hpp"

namespace py = pybind11;
using namespace pimpcs;

namespace {

using Arr6 = std::array<double, 6>;
using Arr2 = std::array<double, 2>;

State to_state(const Arr6& a) { return State{a}; }
Control to_control(const Arr2& a) { return Control{a}; }

py::array_t<double> rows(const std::vector<State>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{6}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < 6; ++j) m(i, j) = v[i][j];
  return out;
}

py::array_t<double> rows(const std::vector<Control>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{2}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) m(i, j) = v[i][j];
  return out;
}

std::vector<State> states_from(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || a.shape(1) != 6) throw std::invalid_argument("expected an (n, 6) array");
  auto r = a.unchecked<2>();
  std::vector<State> out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < 6; ++j) out[i][j] = r(i, j);
  return out;
}

py::array_t<double> matrix(const Mat6& m) {
  py::array_t<double> out({6, 6});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) w(i, j) = m(i, j);
  return out;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["dt"] = t.control_dt;
  d["states"] = rows(t.states);
  d["controls"] = rows(t.controls);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Planar quadcopter landing: MPC, surrogate network and evaluation";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

  py::class_<PlantParams>(m, "PlantParams")
      .def(py::init<>())
      .def_readwrite("mass", &PlantParams::mass)
      .def_readwrite("half_length", &PlantParams::half_length)
      .def_readwrite("inertia", &PlantParams::inertia)
      .def_readwrite("gravity", &PlantParams::gravity)
      .def_property_readonly("kappa", [](const PlantParams& p) {
        std::array<Arr6, 2> k;
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 6; ++j) k[i][j] = p.kappa(i, j);
        return k;
      });

  m.def("derivative",
        [](const Arr6& s, const Arr2& u, const PlantParams& p) {
          return derivative(to_state(s), to_control(u), p).data;
        },
        py::arg("state"), py::arg("control"), py::arg("plant") = PlantParams{});
  m.def("equilibrium_control", [](const PlantParams& p) { return equilibrium_control(p).data; },
        py::arg("plant") = PlantParams{});
  m.def("net_control",
        [](const Arr6& s, const Arr2& u_c, const PlantParams& p) {
          return net_control(to_state(s), to_control(u_c), p).data;
        },
        py::arg("state"), py::arg("u_c"), py::arg("plant") = PlantParams{});
  m.def("rk4_step",
        [](const Arr6& s, const Arr2& u, double dt, const PlantParams& p) {
          return rk4_step(to_state(s), to_control(u), dt, p).data;
        },
        py::arg("state"), py::arg("control"), py::arg("dt"), py::arg("plant") = PlantParams{});
  m.def("euler_step",
        [](const Arr6& s, const Arr2& u, double dt, const PlantParams& p) {
          return euler_step(to_state(s), to_control(u), dt, p).data;
        },
        py::arg("state"), py::arg("control"), py::arg("dt"), py::arg("plant") = PlantParams{});

  py::class_<MpcConfig>(m, "MpcConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &MpcConfig::horizon)
      .def_readwrite("dt", &MpcConfig::dt)
      .def_readwrite("max_iters", &MpcConfig::max_iters)
      .def_readwrite("tol", &MpcConfig::tol);

  m.def("mpc_solve",
        [](const Arr6& s, const MpcConfig& cfg, const PlantParams& p) {
          const ControlPlan plan = mpc_solve(to_state(s), std::nullopt, cfg, p);
          py::dict d;
          d["controls"] = rows(plan.controls);
          d["cost"] = plan.cost;
          d["iterations"] = plan.iterations;
          return d;
        },
        py::arg("state"), py::arg("config") = MpcConfig{}, py::arg("plant") = PlantParams{});

  py::class_<SurrogateParams>(m, "Surrogate")
      .def_static("init", &init_params, py::arg("seed") = 0)
      .def_static("load", &load_model, py::arg("path"))
      .def("save", [](const SurrogateParams& mu, const std::filesystem::path& path) {
        save_model(mu, path);
      })
      .def("__call__", [](const SurrogateParams& mu, const Arr6& s) {
        return forward(mu, to_state(s)).data;
      })
      .def_property_readonly("parameters",
                             [](const SurrogateParams& mu) {
                               return py::array_t<double>(static_cast<py::ssize_t>(mu.values.size()),
                                                          mu.values.data());
                             })
      .def_property_readonly("digest", &model_digest)
      .def_property_readonly("losses",
                             [](const SurrogateParams& mu) { return mu.provenance.losses.str(); })
      .def_property_readonly("seed", [](const SurrogateParams& mu) { return mu.provenance.seed; });
  m.attr("PARAM_COUNT") = kParamCount;

  m.def(
      "simulate",
      [](const Arr6& x0, py::object controller, const PlantParams& p, double duration) {
        SimulationSettings sim;
        sim.duration = duration;
        if (py::isinstance<py::str>(controller)) {
          if (controller.cast<std::string>() != "mpc")
            throw std::invalid_argument("controller must be 'mpc', a Surrogate or a callable");
          py::gil_scoped_release release;
          const Trajectory t = simulate(to_state(x0), mpc_controller(MpcConfig{}, p), sim, p);
          py::gil_scoped_acquire acquire;
          return trajectory_dict(t);
        }
        if (py::isinstance<SurrogateParams>(controller)) {
          const SurrogateParams mu = controller.cast<SurrogateParams>();
          Trajectory t;
          {
            py::gil_scoped_release release;
            t = simulate(to_state(x0), surrogate_policy(mu), sim, p);
          }
          return trajectory_dict(t);
        }
        auto fn = controller.cast<std::function<Arr2(const Arr6&)>>();
        const Policy pol = [fn](const State& s) { return Control{fn(s.data)}; };
        return trajectory_dict(simulate(to_state(x0), pol, sim, p));
      },
      py::arg("x0"), py::arg("controller") = "mpc", py::arg("plant") = PlantParams{},
      py::arg("duration") = 15.0);

  m.def(
      "classify_landing",
      [](py::array_t<double> states, double dt) {
        const LandingClass c = classify_landing(states_from(states), dt);
        py::dict d;
        d["success"] = c.success;
        d["safe"] = c.safe;
        d["landing_time"] = c.landing_time ? py::cast(*c.landing_time) : py::none();
        return d;
      },
      py::arg("states"), py::arg("dt") = 0.05);
  m.def(
      "tracking_error",
      [](py::array_t<double> a, py::array_t<double> b) {
        const TrackingError e = tracking_error(states_from(a), states_from(b));
        return py::make_tuple(py::array_t<double>(static_cast<py::ssize_t>(e.per_tick.size()),
                                                  e.per_tick.data()),
                              e.mean);
      },
      py::arg("trajectory"), py::arg("reference"));

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path) {
        const Dataset d = load_dataset(path);
        std::vector<State> s, sp;
        std::vector<Control> u;
        std::vector<int> traj, k;
        for (const auto& t : d.samples) {
          s.push_back(t.s);
          sp.push_back(t.s_plus);
          u.push_back(t.u_c);
          traj.push_back(t.traj_id);
          k.push_back(t.k);
        }
        py::dict out;
        out["s"] = rows(s);
        out["u_c"] = rows(u);
        out["s_plus"] = rows(sp);
        out["traj_id"] = py::array_t<int>(static_cast<py::ssize_t>(traj.size()), traj.data());
        out["k"] = py::array_t<int>(static_cast<py::ssize_t>(k.size()), k.data());
        out["trajectories"] = d.meta.trajectories;
        out["digest"] = dataset_digest(d);
        return out;
      },
      py::arg("path"));

  m.def(
      "fit_profile",
      [](py::array_t<double> s, py::array_t<double> s_plus, double eps, int max_iters) {
        const auto a = states_from(s);
        const auto b = states_from(s_plus);
        if (a.size() != b.size()) throw std::invalid_argument("s and s_plus differ in length");
        std::vector<StatePair> pairs(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) pairs[i] = {a[i], b[i]};
        FitOptions opts;
        opts.eps_floor = eps;
        opts.max_iters = max_iters;
        StabilityProfile prof;
        {
          py::gil_scoped_release release;
          prof = fit_profile(pairs, opts);
        }
        py::dict out;
        out["p"] = matrix(prof.p.mat());
        out["objective"] = prof.final_objective;
        out["violation_fraction"] = prof.violation_fraction;
        out["iterations"] = prof.iterations;
        return out;
      },
      py::arg("s"), py::arg("s_plus"), py::arg("eps") = 1e-6, py::arg("max_iters") = 2000);

  m.def("sha256", [](py::bytes b) { return sha256_hex(std::string(b)); });
}

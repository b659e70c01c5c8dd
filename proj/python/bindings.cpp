#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "pevgame/scenario.hpp"

namespace py = pybind11;
using namespace pevgame;

namespace {

py::dict bundle_to_dict(const OutputBundle& b) {
  py::dict d;
  d["converged"] = b.converged;
  d["sweeps"] = b.sweeps;
  d["final_potential_eur"] = b.final_potential;
  d["wall_seconds"] = b.wall_seconds;
  py::list iters;
  for (const IterationRecord& r : b.iterations) {
    py::dict ir;
    ir["k"] = r.k;
    ir["player"] = r.player;
    ir["j_old_eur"] = r.old_cost;
    ir["j_new_eur"] = r.new_cost;
    ir["accepted"] = r.accepted;
    ir["potential_eur"] = r.potential_after;
    iters.append(ir);
  }
  d["iterations"] = iters;
  py::list players;
  for (const PlayerStrategy& s : b.final_strategy.players) {
    py::dict ps;
    ps["u_kwh"] = s.u;
    ps["soc"] = s.x;
    ps["delta"] = s.delta;
    ps["ell_kwh"] = s.ell;
    ps["g_kwh"] = s.g;
    players.append(ps);
  }
  d["players"] = players;
  py::list agg;
  for (const AggregateRow& r : b.aggregate) {
    py::dict ar;
    ar["t"] = r.t;
    ar["demand_kwh"] = r.demand;
    ar["fleet_u_kwh"] = r.fleet_u;
    ar["total_kwh"] = r.total;
    ar["plugged"] = r.plugged;
    agg.append(ar);
  }
  d["aggregate"] = agg;
  return d;
}

ScenarioScale parse_scale(const std::string& scale) {
  if (scale == "paper") return ScenarioScale::Paper;
  if (scale == "desk") return ScenarioScale::Desk;
  throw std::invalid_argument("scale must be 'paper' or 'desk'");
}

}  // namespace

PYBIND11_MODULE(_pevgame, m) {
  m.doc() = "mixed-integer potential game engine for PEV charge scheduling";
  m.attr("__version__") = kPevgameVersion;

  py::register_exception<ScenarioError>(m, "ScenarioError");
  py::register_exception<InfeasibleScenario>(m, "InfeasibleScenario");

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_readonly("players", &ScenarioConfig::n)
      .def_readonly("horizon_slots", &ScenarioConfig::T)
      .def_readonly("slot_minutes", &ScenarioConfig::slot_minutes)
      .def_readwrite("epsilon_eur", &ScenarioConfig::epsilon_eur)
      .def_readwrite("max_sweeps", &ScenarioConfig::max_sweeps)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def("to_json", &scenario_to_json)
      .def("__repr__", [](const ScenarioConfig& c) {
        return "<pevgame.Scenario players=" + std::to_string(c.n) +
               " horizon=" + std::to_string(c.T) + ">";
      });

  m.def(
      "default_scenario",
      [](const std::string& scale, std::uint64_t seed) {
        return default_scenario(parse_scale(scale), seed);
      },
      py::arg("scale") = "desk", py::arg("seed") = 1);
  m.def("desk_scenario", &desk_scenario, py::arg("players"), py::arg("horizon_slots"),
        py::arg("seed") = 1);
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("scenario_from_json", &scenario_from_json, py::arg("text"));
  m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));

  m.def(
      "run",
      [](const ScenarioConfig& cfg, const std::string& out_dir) {
        return bundle_to_dict(run(cfg, out_dir));
      },
      py::arg("scenario"), py::arg("out_dir") = std::string{},
      "Run the sequential best-response loop; returns a result dict.");

  m.def(
      "certify",
      [](const ScenarioConfig& cfg, const std::string& strategy_path, double epsilon) {
        const CollectiveStrategy z = load_strategy(strategy_path);
        const double eps = epsilon > 0.0 ? epsilon : cfg.epsilon_eur;
        const CertifyResult res = certify_mine(cfg.game(), z, eps, cfg.solver);
        py::dict d;
        d["is_equilibrium"] = res.is_equilibrium;
        d["worst_improvement_eur"] = res.worst_improvement;
        d["worst_player"] = res.worst_player;
        d["improvements_eur"] = res.improvements;
        return d;
      },
      py::arg("scenario"), py::arg("strategy_path"), py::arg("epsilon") = 0.0,
      "Certify a saved strategy snapshot as an eps-equilibrium.");

  m.def(
      "oracle_check",
      [](int samples, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (int k = 0; k < samples; ++k) {
          std::uniform_int_distribution<int> t_dist(2, 3);
          const int T = t_dist(rng);
          auto inst = random_player_instance(rng, T, T == 2 ? 2 : 1);
          SolveOptions opts;
          const SolveResult bb = solve(inst.prog.qp, opts);
          const SolveResult bf = brute_force(inst.prog.qp, opts);
          if (bb.status != bf.status) return std::numeric_limits<double>::infinity();
          if (bb.status == SolveStatus::Optimal)
            worst = std::max(worst, std::abs(bb.objective - bf.objective));
        }
        return worst;
      },
      py::arg("samples") = 20, py::arg("seed") = 7,
      "Worst branch-and-bound vs enumeration objective gap over random programs.");
}

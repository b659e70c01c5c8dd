#include "pevgame/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pevgame {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

const json& need(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError("missing field '" + path + key + "'");
  return *it;
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& path) {
  try {
    return need(j, key, path).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError("field '" + path + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  return get_field<T>(j, key, path);
}

void check(bool cond, const std::string& msg) {
  if (!cond) throw ScenarioError(msg);
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ScenarioError("cannot open " + p.string() + " for writing");
  return out;
}

json strategy_to_json(const PlayerStrategy& s) {
  json j;
  j["u_kwh"] = s.u;
  j["soc"] = s.x;
  j["f_kwh"] = s.f;
  j["g_kwh"] = s.g;
  j["s_kwh"] = s.s;
  j["ell_kwh"] = s.ell;
  j["kappa_kwh"] = s.kappa;
  j["delta"] = s.delta;
  j["delta_c"] = s.delta_c;
  j["delta_d"] = s.delta_d;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  return j;
}

PlayerStrategy strategy_from_json(const json& j, const std::string& path) {
  PlayerStrategy s;
  s.u = get_field<std::vector<double>>(j, "u_kwh", path);
  s.x = get_field<std::vector<double>>(j, "soc", path);
  s.f = get_field<std::vector<double>>(j, "f_kwh", path);
  s.g = get_field<std::vector<double>>(j, "g_kwh", path);
  s.s = get_field<std::vector<double>>(j, "s_kwh", path);
  s.ell = get_field<std::vector<double>>(j, "ell_kwh", path);
  s.kappa = get_field<std::vector<double>>(j, "kappa_kwh", path);
  s.delta = get_field<std::vector<int>>(j, "delta", path);
  s.delta_c = get_field<std::vector<int>>(j, "delta_c", path);
  s.delta_d = get_field<std::vector<int>>(j, "delta_d", path);
  s.alpha = get_field<std::vector<int>>(j, "alpha", path);
  s.beta = get_field<std::vector<std::vector<int>>>(j, "beta", path);
  return s;
}

}  // namespace

std::vector<double> DemandCurve::sample(int T, int slot_minutes) const {
  std::vector<double> d(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double hour = (t + 0.5) * slot_minutes / 60.0;
    auto bump = [hour](double amp, double center, double width) {
      const double z = (hour - center) / width;
      return amp * std::exp(-0.5 * z * z);
    };
    d[static_cast<std::size_t>(t)] = base_kwh +
                                     bump(morning_peak_kwh, morning_center_hour, morning_width_hours) +
                                     bump(evening_peak_kwh, evening_center_hour, evening_width_hours);
  }
  return d;
}

Game ScenarioConfig::game() const {
  Game g;
  g.T = T;
  g.grid = grid;
  g.pevs = pevs;
  g.reward_mode = reward_mode;
  g.pattern_eps = pattern_eps_kwh;
  return g;
}

RunOptions ScenarioConfig::run_options() const {
  RunOptions ro;
  ro.epsilon = epsilon_eur;
  ro.max_sweeps = max_sweeps;
  ro.selection = selection;
  ro.seed = seed;
  ro.solver = solver;
  return ro;
}

void ScenarioConfig::validate() const {
  check(n >= 1, "players must be at least 1");
  check(T >= 1, "horizon_slots must be at least 1");
  check(slot_minutes >= 1, "slot_minutes must be at least 1");
  check(static_cast<int>(pevs.size()) == n,
        "pevs length " + std::to_string(pevs.size()) + " differs from players " + std::to_string(n));
  check(static_cast<int>(grid.demand.size()) == T,
        "grid.demand_kwh length " + std::to_string(grid.demand.size()) +
            " differs from horizon_slots " + std::to_string(T));
  try {
    game().validate();
    run_options().validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
}

ScenarioConfig desk_scenario(int n, int T, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.T = T;
  cfg.slot_minutes = 24 * 60 / T;
  cfg.seed = seed;
  cfg.reward_mode = RewardMode::Constant;
  cfg.demand_synthetic = true;
  cfg.demand_curve = DemandCurve{};
  cfg.grid.demand = cfg.demand_curve.sample(T, cfg.slot_minutes);

  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uni_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  for (int i = 0; i < n; ++i) {
    PevParams pev;
    pev.eta = 0.85;
    pev.capacity_kwh = uni(40.0, 75.0);
    pev.x0 = 0.23;
    pev.rho_plus = 1e-3;
    pev.rho_minus = 0.5e-3;
    pev.h_min = std::min(2, T);
    pev.mu.assign(static_cast<std::size_t>(T), 0.0);
    // one short driving block clear of the evening peak
    const int drive_start = uni_int(3, std::max(3, std::min(5, T - 2)));
    const int drive_len = uni_int(1, 2);
    const double drain = uni(0.02, 0.05);
    for (int t = drive_start; t < std::min(T, drive_start + drive_len); ++t)
      pev.mu[static_cast<std::size_t>(t)] = drain / drive_len;
    // flat floor with a short terminal ramp
    pev.x_ref.assign(static_cast<std::size_t>(T), 0.2);
    const double target = uni(0.25, 0.4);
    const int ramp_len = std::min(3, T - 1);
    for (int k = 0; k < ramp_len; ++k) {
      const int t = T - 1 - k;
      pev.x_ref[static_cast<std::size_t>(t)] =
          0.2 + (target - 0.2) * (ramp_len - k) / ramp_len;
    }
    cfg.pevs.push_back(std::move(pev));
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig default_scenario(ScenarioScale scale, std::uint64_t seed) {
  if (scale == ScenarioScale::Desk) return desk_scenario(4, 12, seed);

  ScenarioConfig cfg;
  cfg.n = 6;
  cfg.T = 48;
  cfg.slot_minutes = 30;
  cfg.seed = seed;
  cfg.reward_mode = RewardMode::Aggregate;
  cfg.demand_synthetic = true;
  cfg.demand_curve = DemandCurve{};
  cfg.grid.demand = cfg.demand_curve.sample(cfg.T, cfg.slot_minutes);

  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uni_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  for (int i = 0; i < cfg.n; ++i) {
    PevParams pev;
    pev.eta = 0.85;
    pev.capacity_kwh = uni(40.0, 75.0);
    pev.x0 = 0.23;
    pev.rho_plus = 1e-3;
    pev.rho_minus = 0.5e-3;
    pev.h_min = 5;
    pev.mu.assign(static_cast<std::size_t>(cfg.T), 0.0);

    // morning and evening commutes
    const int m_start = uni_int(12, 16);
    const int m_len = uni_int(2, 4);
    const double m_drain = uni(0.03, 0.07);
    for (int t = m_start; t < m_start + m_len; ++t)
      pev.mu[static_cast<std::size_t>(t)] = m_drain / m_len;
    const int e_start = uni_int(34, 37);
    const int e_len = uni_int(2, 4);
    const double e_drain = uni(0.03, 0.07);
    for (int t = e_start; t < e_start + e_len; ++t)
      pev.mu[static_cast<std::size_t>(t)] = e_drain / e_len;

    // SoC floor: 0.2 until the evening drive ends, then a bounded-slope
    // ramp towards the sampled target
    pev.x_ref.assign(static_cast<std::size_t>(cfg.T), 0.2);
    const double target = uni(0.2, 0.85);
    const int ramp_start = std::max(e_start + e_len, cfg.T - 12);
    const int ramp_len = cfg.T - 1 - ramp_start;
    const double max_slope = 0.06;
    const double reachable =
        std::min(target, 0.2 + max_slope * std::max(ramp_len, 1));
    for (int k = 0; ramp_len > 0 && k <= ramp_len; ++k) {
      const int t = ramp_start + k;
      pev.x_ref[static_cast<std::size_t>(t)] = 0.2 + (reachable - 0.2) * k / ramp_len;
    }
    cfg.pevs.push_back(std::move(pev));
  }
  cfg.validate();
  return cfg;
}

namespace {

json solver_to_json(const SolveOptions& s) {
  json j;
  j["rel_gap"] = s.rel_gap;
  j["abs_gap"] = s.abs_gap;
  j["integrality_tol"] = s.integrality_tol;
  j["qp_tol"] = s.qp_tol;
  j["regularization"] = s.regularization;
  j["node_limit"] = s.node_limit;
  j["time_limit_s"] = s.time_limit_s;
  j["brute_force_cap"] = s.brute_force_cap;
  return j;
}

SolveOptions solver_from_json(const json& j, const std::string& path) {
  SolveOptions s;
  s.rel_gap = get_or(j, "rel_gap", path, s.rel_gap);
  s.abs_gap = get_or(j, "abs_gap", path, s.abs_gap);
  s.integrality_tol = get_or(j, "integrality_tol", path, s.integrality_tol);
  s.qp_tol = get_or(j, "qp_tol", path, s.qp_tol);
  s.regularization = get_or(j, "regularization", path, s.regularization);
  s.node_limit = get_or(j, "node_limit", path, s.node_limit);
  s.time_limit_s = get_or(j, "time_limit_s", path, s.time_limit_s);
  s.brute_force_cap = get_or(j, "brute_force_cap", path, s.brute_force_cap);
  return s;
}

json curve_to_json(const DemandCurve& c) {
  json j;
  j["name"] = "double_peak";
  j["base_kwh"] = c.base_kwh;
  j["morning_peak_kwh"] = c.morning_peak_kwh;
  j["morning_center_hour"] = c.morning_center_hour;
  j["morning_width_hours"] = c.morning_width_hours;
  j["evening_peak_kwh"] = c.evening_peak_kwh;
  j["evening_center_hour"] = c.evening_center_hour;
  j["evening_width_hours"] = c.evening_width_hours;
  return j;
}

DemandCurve curve_from_json(const json& j, const std::string& path) {
  const std::string name = get_field<std::string>(j, "name", path);
  check(name == "double_peak", "field '" + path + "name': unknown curve '" + name + "'");
  DemandCurve c;
  c.base_kwh = get_or(j, "base_kwh", path, c.base_kwh);
  c.morning_peak_kwh = get_or(j, "morning_peak_kwh", path, c.morning_peak_kwh);
  c.morning_center_hour = get_or(j, "morning_center_hour", path, c.morning_center_hour);
  c.morning_width_hours = get_or(j, "morning_width_hours", path, c.morning_width_hours);
  c.evening_peak_kwh = get_or(j, "evening_peak_kwh", path, c.evening_peak_kwh);
  c.evening_width_hours = get_or(j, "evening_width_hours", path, c.evening_width_hours);
  c.evening_center_hour = get_or(j, "evening_center_hour", path, c.evening_center_hour);
  return c;
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["players"] = cfg.n;
  j["horizon_slots"] = cfg.T;
  j["slot_minutes"] = cfg.slot_minutes;
  j["epsilon_eur"] = cfg.epsilon_eur;
  j["max_sweeps"] = cfg.max_sweeps;
  j["seed"] = cfg.seed;
  j["selection"] =
      cfg.selection == SelectionPolicy::RoundRobin ? "round_robin" : "random_permutation";
  j["reward_mode"] = cfg.reward_mode == RewardMode::Aggregate ? "aggregate" : "constant";
  j["pattern_eps_kwh"] = cfg.pattern_eps_kwh;
  j["solver"] = solver_to_json(cfg.solver);

  json grid;
  grid["energy_cost_eur_per_kwh"] = cfg.grid.c_price;
  grid["reward_rate_eur_per_kwh"] = cfg.grid.r_bar;
  grid["grid_capacity_kwh"] = cfg.grid.d_bar;
  grid["max_plugged_pevs"] = cfg.grid.v_bar;
  grid["u_min_kwh"] = cfg.grid.u_min;
  grid["u_max_kwh"] = cfg.grid.u_max;
  grid["demand_kwh"] = cfg.grid.demand;
  if (cfg.demand_synthetic) grid["demand_curve"] = curve_to_json(cfg.demand_curve);
  j["grid"] = std::move(grid);

  json pevs = json::array();
  for (const PevParams& p : cfg.pevs) {
    json pj;
    pj["efficiency"] = p.eta;
    pj["capacity_kwh"] = p.capacity_kwh;
    pj["initial_soc"] = p.x0;
    pj["soc_ref"] = p.x_ref;
    pj["drain_soc"] = p.mu;
    pj["rho_charge_eur_per_kwh2"] = p.rho_plus;
    pj["rho_discharge_eur_per_kwh2"] = p.rho_minus;
    pj["min_plugged_slots"] = p.h_min;
    pj["plugged_before_horizon"] = p.delta_prev;
    pj["u_before_horizon_kwh"] = p.u_prev;
    pevs.push_back(std::move(pj));
  }
  j["pevs"] = std::move(pevs);
  return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  ScenarioConfig cfg;
  cfg.n = get_field<int>(j, "players", "");
  cfg.T = get_field<int>(j, "horizon_slots", "");
  cfg.slot_minutes = get_or(j, "slot_minutes", "", cfg.slot_minutes);
  cfg.epsilon_eur = get_or(j, "epsilon_eur", "", cfg.epsilon_eur);
  cfg.max_sweeps = get_or(j, "max_sweeps", "", cfg.max_sweeps);
  cfg.seed = get_or<std::uint64_t>(j, "seed", "", cfg.seed);
  const std::string sel = get_or<std::string>(j, "selection", "", "round_robin");
  check(sel == "round_robin" || sel == "random_permutation",
        "field 'selection': unknown policy '" + sel + "'");
  cfg.selection = sel == "round_robin" ? SelectionPolicy::RoundRobin
                                       : SelectionPolicy::RandomPermutation;
  const std::string rm = get_or<std::string>(j, "reward_mode", "", "aggregate");
  check(rm == "aggregate" || rm == "constant", "field 'reward_mode': unknown mode '" + rm + "'");
  cfg.reward_mode = rm == "aggregate" ? RewardMode::Aggregate : RewardMode::Constant;
  cfg.pattern_eps_kwh = get_or(j, "pattern_eps_kwh", "", cfg.pattern_eps_kwh);
  if (j.contains("solver")) cfg.solver = solver_from_json(j["solver"], "solver.");

  const json& grid = need(j, "grid", "");
  cfg.grid.c_price = get_field<double>(grid, "energy_cost_eur_per_kwh", "grid.");
  cfg.grid.r_bar = get_field<double>(grid, "reward_rate_eur_per_kwh", "grid.");
  cfg.grid.d_bar = get_field<double>(grid, "grid_capacity_kwh", "grid.");
  cfg.grid.v_bar = get_field<int>(grid, "max_plugged_pevs", "grid.");
  cfg.grid.u_min = get_field<double>(grid, "u_min_kwh", "grid.");
  cfg.grid.u_max = get_field<double>(grid, "u_max_kwh", "grid.");
  const bool has_inline = grid.contains("demand_kwh");
  const bool has_curve = grid.contains("demand_curve");
  check(has_inline || has_curve, "grid needs demand_kwh or demand_curve");
  if (has_curve) {
    cfg.demand_synthetic = true;
    cfg.demand_curve = curve_from_json(grid["demand_curve"], "grid.demand_curve.");
  }
  if (has_inline) {
    cfg.grid.demand = get_field<std::vector<double>>(grid, "demand_kwh", "grid.");
  } else {
    cfg.grid.demand = cfg.demand_curve.sample(cfg.T, cfg.slot_minutes);
  }

  const json& pevs = need(j, "pevs", "");
  check(pevs.is_array(), "field 'pevs': must be an array");
  for (int i = 0; i < cfg.n; ++i) {
    check(i < static_cast<int>(pevs.size()), "pevs[" + std::to_string(i) + "] missing");
    const json& pj = pevs[static_cast<std::size_t>(i)];
    const std::string path = "pevs[" + std::to_string(i) + "].";
    PevParams p;
    p.eta = get_field<double>(pj, "efficiency", path);
    p.capacity_kwh = get_field<double>(pj, "capacity_kwh", path);
    p.x0 = get_field<double>(pj, "initial_soc", path);
    p.x_ref = get_field<std::vector<double>>(pj, "soc_ref", path);
    if (pj.contains("drain_soc")) {
      p.mu = get_field<std::vector<double>>(pj, "drain_soc", path);
    } else if (pj.contains("drain_kwh")) {
      p.mu = get_field<std::vector<double>>(pj, "drain_kwh", path);
      for (double& v : p.mu) v /= p.capacity_kwh;
    } else {
      throw ScenarioError("field '" + path + "drain_soc' (or drain_kwh) missing");
    }
    p.rho_plus = get_field<double>(pj, "rho_charge_eur_per_kwh2", path);
    p.rho_minus = get_field<double>(pj, "rho_discharge_eur_per_kwh2", path);
    p.h_min = get_field<int>(pj, "min_plugged_slots", path);
    p.delta_prev = get_or(pj, "plugged_before_horizon", path, 0);
    p.u_prev = get_or(pj, "u_before_horizon_kwh", path, 0.0);
    cfg.pevs.push_back(std::move(p));
  }
  check(static_cast<int>(pevs.size()) == cfg.n,
        "pevs has " + std::to_string(pevs.size()) + " entries, players is " +
            std::to_string(cfg.n));
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  auto out = open_out(path);
  out << scenario_to_json(cfg);
}

void save_strategy(const CollectiveStrategy& z, const std::string& path) {
  json j;
  j["horizon_slots"] = z.T;
  json players = json::array();
  for (const PlayerStrategy& s : z.players) players.push_back(strategy_to_json(s));
  j["players"] = std::move(players);
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

CollectiveStrategy load_strategy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open strategy file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("strategy parse error: ") + e.what());
  }
  CollectiveStrategy z;
  z.T = get_field<int>(j, "horizon_slots", "");
  const json& players = need(j, "players", "");
  for (std::size_t i = 0; i < players.size(); ++i)
    z.players.push_back(strategy_from_json(players[i], "players[" + std::to_string(i) + "]."));
  return z;
}

OutputBundle run(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const Game game = cfg.game();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult rr = run_algorithm(game, cfg.run_options());
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;

  OutputBundle b;
  b.iterations = rr.records;
  b.converged = rr.state.converged;
  b.sweeps = rr.state.sweeps;
  b.final_potential = rr.state.potential;
  b.final_strategy = rr.state.strategies;
  b.wall_seconds = wall.count();

  const CollectiveStrategy& z = b.final_strategy;
  for (int i = 0; i < cfg.n; ++i) {
    const PlayerStrategy& s = z.players[static_cast<std::size_t>(i)];
    for (int t = 0; t < cfg.T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      b.trajectories.push_back(
          {i, t, s.x[ts], s.u[ts], s.delta[ts], s.delta_c[ts], s.delta_d[ts]});
    }
  }
  for (int t = 0; t < cfg.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    AggregateRow row{t, cfg.grid.demand[ts], 0.0, 0.0, 0};
    for (const PlayerStrategy& s : z.players) {
      row.fleet_u += s.u[ts];
      row.plugged += s.delta[ts];
    }
    row.total = row.demand + row.fleet_u;
    b.aggregate.push_back(row);
  }

  const JointReport joint = check_collective(game, z);
  if (!joint.feasible)
    throw std::logic_error("converged strategy violates coupling: " + joint.message);

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
      auto out = open_out(dir / "trajectories.csv");
      out << "pev,t,soc,u_kwh,delta,delta_c,delta_d\n";
      for (const auto& r : b.trajectories)
        out << r.pev << ',' << r.t << ',' << fmt(r.x) << ',' << fmt(r.u) << ',' << r.delta << ','
            << r.delta_c << ',' << r.delta_d << "\n";
    }
    {
      auto out = open_out(dir / "aggregate.csv");
      out << "t,demand_kwh,fleet_u_kwh,total_kwh,plugged\n";
      for (const auto& r : b.aggregate)
        out << r.t << ',' << fmt(r.demand) << ',' << fmt(r.fleet_u) << ',' << fmt(r.total) << ','
            << r.plugged << "\n";
    }
    {
      auto out = open_out(dir / "iterations.csv");
      out << "k,player,j_old_eur,j_new_eur,accepted,potential_eur\n";
      for (const auto& r : b.iterations)
        out << r.k << ',' << r.player << ',' << fmt(r.old_cost) << ',' << fmt(r.new_cost) << ','
            << (r.accepted ? 1 : 0) << ',' << fmt(r.potential_after) << "\n";
    }
    save_strategy(z, (dir / "strategy.json").string());
    emit_plotdata(cfg, b, out_dir);

    json manifest;
    manifest["pevgame_version"] = kPevgameVersion;
    manifest["seed"] = cfg.seed;
    manifest["wall_seconds"] = b.wall_seconds;
    manifest["converged"] = b.converged;
    manifest["sweeps"] = b.sweeps;
    manifest["iterations"] = b.iterations.size();
    manifest["final_potential_eur"] = b.final_potential;
    manifest["scenario"] = json::parse(scenario_to_json(cfg));
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return b;
}

void emit_plotdata(const ScenarioConfig& cfg, const OutputBundle& bundle,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  for (int i = 0; i < cfg.n; ++i) {
    auto out = open_out(dir / ("fig2_pev" + std::to_string(i) + ".csv"));
    out << "t,soc,soc_ref,delta,drain_soc\n";
    const PlayerStrategy& s = bundle.final_strategy.players[static_cast<std::size_t>(i)];
    const PevParams& p = cfg.pevs[static_cast<std::size_t>(i)];
    for (int t = 0; t < cfg.T; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      out << t << ',' << fmt(s.x[ts]) << ',' << fmt(p.x_ref[ts]) << ',' << s.delta[ts] << ','
          << fmt(p.mu[ts]) << "\n";
    }
  }
  {
    auto out = open_out(dir / "fig3_demand.csv");
    out << "t,demand_kwh,fleet_u_kwh,total_kwh,capacity_kwh\n";
    for (const auto& r : bundle.aggregate)
      out << r.t << ',' << fmt(r.demand) << ',' << fmt(r.fleet_u) << ',' << fmt(r.total) << ','
          << fmt(cfg.grid.d_bar) << "\n";
  }
  {
    auto out = open_out(dir / "fig4_potential.csv");
    out << "k,potential_eur\n";
    for (const auto& r : bundle.iterations) out << r.k << ',' << fmt(r.potential_after) << "\n";
  }
}

RandomPlayerInstance random_player_instance(std::mt19937_64& rng, int T, int h_min) {
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uni_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  RandomPlayerInstance inst;
  inst.T = T;
  inst.grid.c_price = uni(5e-4, 2e-3);
  inst.grid.r_bar = uni(5e-4, 2e-3);
  inst.grid.d_bar = 45.0;
  inst.grid.v_bar = 5;
  inst.grid.u_min = -7.5;
  inst.grid.u_max = 7.5;
  inst.grid.demand.resize(static_cast<std::size_t>(T));
  for (double& d : inst.grid.demand) d = uni(10.0, 40.0);

  PevParams& pev = inst.pev;
  pev.eta = uni(0.7, 1.0);
  pev.capacity_kwh = uni(40.0, 75.0);
  pev.x0 = uni(0.3, 0.8);
  pev.rho_plus = uni(2e-4, 2e-3);
  pev.rho_minus = uni(2e-4, 2e-3);
  pev.h_min = std::min(h_min, T);
  pev.mu.assign(static_cast<std::size_t>(T), 0.0);
  double total_drain = 0.0;
  for (int t = 0; t < T; ++t) {
    if (uni(0.0, 1.0) < 0.25) {
      pev.mu[static_cast<std::size_t>(t)] = uni(0.01, 0.05);
      total_drain += pev.mu[static_cast<std::size_t>(t)];
    }
  }
  const double floor = std::max(0.0, std::min(pev.x0 - total_drain - 0.02, uni(0.05, 0.3)));
  pev.x_ref.assign(static_cast<std::size_t>(T), floor);
  if (uni(0.0, 1.0) < 0.5) {
    // terminal requirement that forces some charging
    pev.x_ref.back() = std::min(1.0, pev.x0 + uni(0.0, 0.05));
  }
  pev.delta_prev = uni(0.0, 1.0) < 0.3 ? 1 : 0;
  pev.u_prev = pev.delta_prev == 1 ? uni(-7.5, 7.5) : 0.0;

  AggregateSignals& sig = inst.sig;
  sig.price.resize(static_cast<std::size_t>(T));
  sig.reward.resize(static_cast<std::size_t>(T));
  sig.plugs_free.resize(static_cast<std::size_t>(T));
  sig.u_lo.resize(static_cast<std::size_t>(T));
  sig.u_hi.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const double d = inst.grid.demand[ts];
    sig.price[ts] = inst.grid.c_price * (d + uni(0.0, 15.0));
    sig.reward[ts] = inst.grid.r_bar * std::max(0.0, d + uni(-15.0, 0.0));
    sig.plugs_free[ts] = uni_int(0, 3);
    const double others = uni(-0.4 * d, 0.8 * (inst.grid.d_bar - d));
    sig.u_lo[ts] = -d - others;
    sig.u_hi[ts] = inst.grid.d_bar - d - others;
  }
  inst.prog = build_player_program(inst.pev, inst.grid, inst.sig, T);
  return inst;
}

}  // namespace pevgame

#pragma once

#include <map>
#include <string>
#include <vector>

#include "pevgame/mld_patterns.hpp"
#include "pevgame/qp_model.hpp"

namespace pevgame {

/// Physical parameters of one vehicle. mu is the SoC-fraction drain per
/// slot while driving; slots with mu > 0 force the vehicle off the plug.
struct PevParams {
  double eta = 0.85;          // battery efficiency, 0 < eta <= 1
  double capacity_kwh = 60.0;
  double x0 = 0.23;           // initial SoC fraction
  std::vector<double> x_ref;  // per-slot SoC floor, length T
  std::vector<double> mu;     // per-slot driving drain (SoC fraction), length T
  double rho_plus = 1e-3;     // charge degradation weight, eur/kWh^2
  double rho_minus = 0.5e-3;  // discharge degradation weight, eur/kWh^2
  int h_min = 1;              // minimum consecutive plugged slots
  int delta_prev = 0;         // plug state before the horizon
  double u_prev = 0.0;        // energy exchanged before the horizon, kWh

  double b() const { return eta / capacity_kwh; }
  void validate(int T) const;
};

/// Shared station and grid parameters.
struct GridParams {
  double c_price = 1.09e-3;    // eur/kWh
  double r_bar = 1.23e-3;      // eur/kWh reward coefficient
  std::vector<double> demand;  // non-PEV load d(t), kWh, length T
  double d_bar = 45.0;         // grid capacity per slot, kWh
  int v_bar = 5;               // simultaneous plug limit
  double u_min = -7.5;         // kWh, < 0
  double u_max = 7.5;          // kWh, > 0

  void validate(int T) const;
};

/// What the aggregator broadcasts to one player: the price and reward
/// trajectories, free plugs excluding the player itself, and the per-slot
/// box on u implied by the grid-capacity row given the others' demand.
struct AggregateSignals {
  std::vector<double> price;   // eur/kWh
  std::vector<double> reward;  // eur/kWh
  std::vector<int> plugs_free;
  std::vector<double> u_lo;  // kWh
  std::vector<double> u_hi;  // kWh

  /// Signals seen when every other player is at rest.
  static AggregateSignals rest(const GridParams& grid, int T);
  void validate(int T, const GridParams& grid) const;
};

/// Dense ids of one player's variables, one entry per slot (0-based).
/// beta[t] holds beta^(h)(t) for h = 1..h_eff(t) where
/// h_eff(t) = min(h_min, T - 1 - t): a plug-in near the horizon end only
/// has to persist until T.
struct PlayerVariables {
  int T = 0;
  int h_min = 0;
  std::vector<VarId> u, x, delta, delta_c, delta_d, f, g, s, ell, kappa, alpha;
  std::vector<std::vector<VarId>> beta;
  std::map<std::string, VarId> labels;

  int h_eff(int t) const { return std::min(h_min, T - 1 - t); }
  int num_vars() const;
};

struct PlayerProgram {
  MixedIntegerQP qp;
  PlayerVariables vars;
};

struct BuildOptions {
  double pattern_eps = 1e-6;  // kWh band of the charge/discharge indicators
};

/// One player's full mixed-integer quadratic program: SoC dynamics, the
/// logical rules compiled through the inequality patterns, the coupling
/// boxes implied by the others' strategies, and the parameterized cost.
PlayerProgram build_player_program(const PevParams& pev, const GridParams& grid,
                                   const AggregateSignals& sig, int T,
                                   const BuildOptions& opts = {});

/// Objective: sum_t price(t) ell(t) + reward(t) g(t)
///          + rho_minus (g - s)^2 + rho_plus (ell - kappa)^2.
QuadraticObjective build_cost(const PevParams& pev, const AggregateSignals& sig,
                              const PlayerVariables& vars);

/// One player's packed feasible point.
struct PlayerStrategy {
  std::vector<double> u, x, f, g, s, ell, kappa;
  std::vector<int> delta, delta_c, delta_d, alpha;
  std::vector<std::vector<int>> beta;

  static PlayerStrategy rest(const PevParams& pev, int T);
};

/// Extracts the canonical per-slot values from a feasible assignment;
/// binaries are rounded to exact {0, 1}. Throws if the assignment is not
/// feasible for the program at the given tolerance.
PlayerStrategy pack_strategy(const PlayerProgram& prog, const Assignment& a, double tol = 1e-6);

/// Inverse of pack_strategy for the same variable layout.
Assignment unpack_strategy(const PlayerVariables& vars, const PlayerStrategy& strat);

}  // namespace pevgame

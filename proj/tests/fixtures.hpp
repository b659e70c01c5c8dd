#pragma once

// Shared generators for randomized tests: small games with feasible rest
// points, and feasible unilateral deviations sampled via consistent binary
// words plus a random-objective continuous solve.

#include <optional>
#include <random>

#include "pevgame/game.hpp"
#include "pevgame/miqp.hpp"
#include "pevgame/scenario.hpp"

namespace pevgame::testing {

inline double uni(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uni_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Small randomized game whose rest point is feasible by construction:
/// SoC floors stay below the drained trajectory and demand leaves slack.
inline Game random_small_game(std::mt19937_64& rng, int n, int T) {
  Game g;
  g.T = T;
  g.reward_mode = RewardMode::Aggregate;
  g.grid.c_price = uni(rng, 5e-4, 2e-3);
  g.grid.r_bar = uni(rng, 5e-4, 2e-3);
  g.grid.d_bar = 45.0;
  g.grid.v_bar = uni_int(rng, std::max(1, n - 1), n + 1);
  g.grid.u_min = -7.5;
  g.grid.u_max = 7.5;
  g.grid.demand.resize(static_cast<std::size_t>(T));
  for (double& d : g.grid.demand) d = uni(rng, 10.0, 35.0);
  for (int i = 0; i < n; ++i) {
    PevParams pev;
    pev.eta = uni(rng, 0.7, 1.0);
    pev.capacity_kwh = uni(rng, 40.0, 75.0);
    pev.x0 = uni(rng, 0.4, 0.8);
    pev.rho_plus = uni(rng, 2e-4, 2e-3);
    pev.rho_minus = uni(rng, 2e-4, 2e-3);
    pev.h_min = uni_int(rng, 1, std::min(2, T));
    pev.mu.assign(static_cast<std::size_t>(T), 0.0);
    double drain = 0.0;
    for (int t = 0; t < T; ++t) {
      if (uni(rng, 0.0, 1.0) < 0.2) {
        pev.mu[static_cast<std::size_t>(t)] = uni(rng, 0.01, 0.04);
        drain += pev.mu[static_cast<std::size_t>(t)];
      }
    }
    pev.x_ref.assign(static_cast<std::size_t>(T), std::max(0.0, pev.x0 - drain - 0.05));
    g.pevs.push_back(std::move(pev));
  }
  return g;
}

/// All delta words consistent with the driving pattern, the plug budget and
/// the minimum-consecutive rule (the direct word predicate, horizon-clamped).
inline bool word_feasible(const std::vector<int>& word, const PevParams& pev,
                          const std::vector<int>& plugs_free) {
  const int T = static_cast<int>(word.size());
  for (int t = 0; t < T; ++t) {
    if (word[static_cast<std::size_t>(t)] == 1 &&
        (pev.mu[static_cast<std::size_t>(t)] > 0.0 || plugs_free[static_cast<std::size_t>(t)] < 1))
      return false;
    const int prev = t == 0 ? pev.delta_prev : word[static_cast<std::size_t>(t - 1)];
    if (prev == 0 && word[static_cast<std::size_t>(t)] == 1) {
      const int he = std::min(pev.h_min, T - 1 - t);
      for (int h = 1; h <= he; ++h)
        if (word[static_cast<std::size_t>(t + h)] != 1) return false;
    }
  }
  return true;
}

/// Samples a feasible strategy for player i against z_{-i}: picks a
/// consistent binary word, fixes all binaries accordingly and solves the
/// continuous part under a random linear objective.
inline std::optional<PlayerStrategy> random_feasible_strategy(const Game& game,
                                                              const CollectiveStrategy& z, int i,
                                                              std::mt19937_64& rng,
                                                              int attempts = 40) {
  const std::vector<double> reward = reward_signal(z, game.grid, i);
  const AggregateSignals sig = make_signals(game, z, i, reward);
  PlayerProgram prog =
      build_player_program(game.pevs[static_cast<std::size_t>(i)], game.grid, sig, game.T,
                           {game.pattern_eps});
  const PevParams& pev = game.pevs[static_cast<std::size_t>(i)];
  const int T = game.T;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::vector<int> word(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) word[static_cast<std::size_t>(t)] = uni_int(rng, 0, 1);
    if (!word_feasible(word, pev, sig.plugs_free)) continue;

    std::map<VarId, double> fix;
    bool ok = true;
    int prev = pev.delta_prev;
    for (int t = 0; t < T && ok; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      const int d = word[ts];
      fix[prog.vars.delta[ts]] = d;
      const int alpha = (prev == 0 && d == 1) ? 1 : 0;
      fix[prog.vars.alpha[ts]] = alpha;
      for (int h = 1; h <= prog.vars.h_eff(t); ++h) {
        fix[prog.vars.beta[ts][static_cast<std::size_t>(h - 1)]] =
            (alpha == 1 && word[static_cast<std::size_t>(t + h)] == 1) ? 1 : 0;
      }
      if (d == 0) {
        fix[prog.vars.delta_c[ts]] = 1;
        fix[prog.vars.delta_d[ts]] = 1;
      } else {
        // charging needs room above +eps, discharging below -eps
        const double lo = std::max(game.grid.u_min, sig.u_lo[ts]);
        const double hi = std::min(game.grid.u_max, sig.u_hi[ts]);
        const bool can_charge = hi >= game.pattern_eps;
        const bool can_discharge = lo <= -game.pattern_eps;
        if (!can_charge && !can_discharge) {
          ok = false;
          break;
        }
        bool charge = can_charge && (!can_discharge || uni(rng, 0.0, 1.0) < 0.5);
        fix[prog.vars.delta_c[ts]] = charge ? 1 : 0;
        fix[prog.vars.delta_d[ts]] = charge ? 0 : 1;
      }
      prev = d;
    }
    if (!ok) continue;

    // random linear pull on the exchanged energy, tiny regularization makes
    // the continuous solve strictly convex
    MixedIntegerQP qp = prog.qp;
    QuadraticObjective random_obj;
    LinearExpr pull;
    for (int t = 0; t < T; ++t)
      pull.add_term(prog.vars.u[static_cast<std::size_t>(t)], uni(rng, -1.0, 1.0));
    random_obj.add_linear(pull);
    qp.objective() = random_obj;
    SolveOptions opts;
    opts.regularization = 1e-6;
    const RelaxationResult rr = solve_qp_relaxation(qp, fix, opts);
    if (rr.status != SolveStatus::Optimal) continue;
    try {
      return pack_strategy(prog, rr.point, 1e-6);
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  return std::nullopt;
}

}  // namespace pevgame::testing

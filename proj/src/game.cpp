#include "pevgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace pevgame {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

void Game::validate() const {
  if (pevs.empty()) throw std::invalid_argument("game needs at least one player");
  grid.validate(T);
  for (const PevParams& pev : pevs) pev.validate(T);
  if (!(pattern_eps > 0.0)) throw std::invalid_argument("pattern_eps must be positive");
}

void RunOptions::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least one");
  solver.validate();
  // accept/reject decisions must not be corrupted by solver tolerance
  if (solver.abs_gap > epsilon / 100.0 || solver.rel_gap > epsilon / 100.0) {
    throw std::invalid_argument("solver gaps must be at most epsilon / 100");
  }
}

std::vector<double> aggregate_demand(const CollectiveStrategy& z, int i) {
  std::vector<double> a(static_cast<std::size_t>(z.T), 0.0);
  for (int j = 0; j < static_cast<int>(z.players.size()); ++j) {
    if (j == i) continue;
    const PlayerStrategy& s = z.players[static_cast<std::size_t>(j)];
    for (int t = 0; t < z.T; ++t) a[static_cast<std::size_t>(t)] += s.ell[static_cast<std::size_t>(t)];
  }
  return a;
}

std::vector<double> price_signal(const CollectiveStrategy& z, const GridParams& grid, int i) {
  std::vector<double> p = aggregate_demand(z, i);
  for (int t = 0; t < z.T; ++t) {
    auto ts = static_cast<std::size_t>(t);
    p[ts] = grid.c_price * (grid.demand[ts] + p[ts]);
  }
  return p;
}

std::vector<int> plug_signal(const CollectiveStrategy& z, const GridParams& grid, int i) {
  std::vector<int> free(static_cast<std::size_t>(z.T), grid.v_bar);
  for (int j = 0; j < static_cast<int>(z.players.size()); ++j) {
    if (j == i) continue;
    const PlayerStrategy& s = z.players[static_cast<std::size_t>(j)];
    for (int t = 0; t < z.T; ++t) free[static_cast<std::size_t>(t)] -= s.delta[static_cast<std::size_t>(t)];
  }
  for (int& v : free) v = std::max(v, 0);
  return free;
}

std::vector<double> reward_signal(const CollectiveStrategy& z, const GridParams& grid, int i) {
  std::vector<double> r(static_cast<std::size_t>(z.T), 0.0);
  for (int j = 0; j < static_cast<int>(z.players.size()); ++j) {
    if (j == i) continue;
    const PlayerStrategy& s = z.players[static_cast<std::size_t>(j)];
    for (int t = 0; t < z.T; ++t) r[static_cast<std::size_t>(t)] += s.g[static_cast<std::size_t>(t)];
  }
  for (int t = 0; t < z.T; ++t) {
    auto ts = static_cast<std::size_t>(t);
    r[ts] = grid.r_bar * (r[ts] + grid.demand[ts]);
  }
  return r;
}

AggregateSignals make_signals(const Game& game, const CollectiveStrategy& z, int i,
                              const std::vector<double>& reward_row) {
  AggregateSignals sig;
  sig.price = price_signal(z, game.grid, i);
  sig.reward = reward_row;
  sig.plugs_free = plug_signal(z, game.grid, i);
  sig.u_lo.resize(static_cast<std::size_t>(z.T));
  sig.u_hi.resize(static_cast<std::size_t>(z.T));
  for (int t = 0; t < z.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    double others = 0.0;
    for (int j = 0; j < static_cast<int>(z.players.size()); ++j) {
      if (j == i) continue;
      others += z.players[static_cast<std::size_t>(j)].u[ts];
    }
    sig.u_lo[ts] = -game.grid.demand[ts] - others;
    sig.u_hi[ts] = game.grid.d_bar - game.grid.demand[ts] - others;
  }
  return sig;
}

double player_phi(const Game& game, const PlayerStrategy& s, int i,
                  const std::vector<double>& reward_row) {
  const PevParams& pev = game.pevs[static_cast<std::size_t>(i)];
  double phi = 0.0;
  for (int t = 0; t < game.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const double dg = s.g[ts] - s.s[ts];
    const double dl = s.ell[ts] - s.kappa[ts];
    phi += game.grid.c_price * game.grid.demand[ts] * s.ell[ts] + reward_row[ts] * s.g[ts] +
           pev.rho_minus * dg * dg + pev.rho_plus * dl * dl;
  }
  return phi;
}

double player_cost(const Game& game, const CollectiveStrategy& z, int i,
                   const std::vector<double>& reward_row) {
  double cost = player_phi(game, z.players[static_cast<std::size_t>(i)], i, reward_row);
  const std::vector<double>& ell_i = z.players[static_cast<std::size_t>(i)].ell;
  for (int j = 0; j < static_cast<int>(z.players.size()); ++j) {
    if (j == i) continue;
    cost += game.grid.c_price * dot(z.players[static_cast<std::size_t>(j)].ell, ell_i);
  }
  return cost;
}

double potential(const Game& game, const CollectiveStrategy& z, const RewardTable& rewards) {
  double p = 0.0;
  for (int i = 0; i < static_cast<int>(z.players.size()); ++i) {
    p += player_phi(game, z.players[static_cast<std::size_t>(i)], i,
                    rewards[static_cast<std::size_t>(i)]);
    for (int j = 0; j < i; ++j) {
      p += game.grid.c_price *
           dot(z.players[static_cast<std::size_t>(j)].ell, z.players[static_cast<std::size_t>(i)].ell);
    }
  }
  return p;
}

RewardTable initial_rewards(const Game& game, const CollectiveStrategy& z) {
  RewardTable rewards(game.pevs.size());
  for (int i = 0; i < game.num_players(); ++i) {
    if (game.reward_mode == RewardMode::Aggregate) {
      rewards[static_cast<std::size_t>(i)] = reward_signal(z, game.grid, i);
    } else {
      std::vector<double> r(static_cast<std::size_t>(game.T));
      for (int t = 0; t < game.T; ++t)
        r[static_cast<std::size_t>(t)] = game.grid.r_bar * game.grid.demand[static_cast<std::size_t>(t)];
      rewards[static_cast<std::size_t>(i)] = std::move(r);
    }
  }
  return rewards;
}

BestResponse best_response(const Game& game, const CollectiveStrategy& z, int i,
                           const std::vector<double>& reward_row, const SolveOptions& opts) {
  const AggregateSignals sig = make_signals(game, z, i, reward_row);
  PlayerProgram prog = build_player_program(game.pevs[static_cast<std::size_t>(i)], game.grid,
                                            sig, game.T, {game.pattern_eps});
  const Assignment current = unpack_strategy(prog.vars, z.players[static_cast<std::size_t>(i)]);
  SolveResult sr = solve(prog.qp, opts, &current);
  if (sr.status == SolveStatus::Infeasible) {
    std::ostringstream msg;
    msg << "best response of player " << i << " is infeasible; free plugs per slot:";
    for (int v : sig.plugs_free) msg << ' ' << v;
    msg << "; capacity box upper per slot:";
    for (double v : sig.u_hi) msg << ' ' << v;
    throw InfeasibleScenario(msg.str());
  }
  if (sr.status != SolveStatus::Optimal) {
    throw SolverFailure("best response of player " + std::to_string(i) +
                        " hit a node or time limit before proving optimality");
  }
  BestResponse br;
  br.strategy = pack_strategy(prog, sr.assignment, opts.integrality_tol);
  br.objective = sr.objective;
  br.current_cost = eval_objective(prog.qp.objective(), current);
  br.nodes = sr.nodes_explored;
  return br;
}

CollectiveStrategy phase0_init(const Game& game, const SolveOptions& opts) {
  game.validate();
  CollectiveStrategy z;
  z.T = game.T;
  z.players.reserve(game.pevs.size());
  for (const PevParams& pev : game.pevs) z.players.push_back(PlayerStrategy::rest(pev, game.T));

  for (int i = 0; i < game.num_players(); ++i) {
    const std::vector<double> zero_reward(static_cast<std::size_t>(game.T), 0.0);
    const AggregateSignals sig = make_signals(game, z, i, zero_reward);
    PlayerProgram prog = build_player_program(game.pevs[static_cast<std::size_t>(i)], game.grid,
                                              sig, game.T, {game.pattern_eps});
    prog.qp.objective() = QuadraticObjective{};  // pure feasibility pass
    SolveResult sr = solve(prog.qp, opts);
    if (sr.status == SolveStatus::Infeasible) {
      throw InfeasibleScenario("initialization: player " + std::to_string(i) +
                               " has no feasible schedule given players 0.." +
                               std::to_string(i - 1));
    }
    if (sr.status != SolveStatus::Optimal) {
      throw SolverFailure("initialization of player " + std::to_string(i) +
                          " hit a node or time limit");
    }
    z.players[static_cast<std::size_t>(i)] = pack_strategy(prog, sr.assignment, opts.integrality_tol);
  }
  return z;
}

RunResult run_algorithm(const Game& game, const RunOptions& opts) {
  game.validate();
  opts.validate();
  RunResult out;
  CollectiveStrategy z = phase0_init(game, opts.solver);
  RewardTable rewards = initial_rewards(game, z);

  const int n = game.num_players();
  std::mt19937_64 rng(opts.seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  int k = 0;
  int sweep = 0;
  bool converged = false;
  while (sweep < opts.max_sweeps && !converged) {
    ++sweep;
    if (opts.selection == SelectionPolicy::RandomPermutation) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    bool any_accept = false;
    for (int i : order) {
      if (game.reward_mode == RewardMode::Aggregate) {
        rewards[static_cast<std::size_t>(i)] = reward_signal(z, game.grid, i);
      }
      BestResponse br = best_response(game, z, i, rewards[static_cast<std::size_t>(i)], opts.solver);
      const bool accepted = br.current_cost - br.objective >= opts.epsilon;
      if (accepted) {
        z.players[static_cast<std::size_t>(i)] = br.strategy;
        any_accept = true;
      }
      IterationRecord rec;
      rec.k = k++;
      rec.player = i;
      rec.old_cost = br.current_cost;
      rec.new_cost = br.objective;
      rec.accepted = accepted;
      rec.potential_after = potential(game, z, rewards);
      out.records.push_back(rec);
    }
    converged = !any_accept;
  }

  out.state.strategies = std::move(z);
  out.state.rewards = std::move(rewards);
  out.state.potential = out.records.empty() ? 0.0 : out.records.back().potential_after;
  out.state.iterations = k;
  out.state.sweeps = sweep;
  out.state.converged = converged;
  return out;
}

CertifyResult certify_mine(const Game& game, const CollectiveStrategy& z, double epsilon,
                           const SolveOptions& opts) {
  CertifyResult res;
  res.improvements.resize(static_cast<std::size_t>(game.num_players()), 0.0);
  RewardTable rewards = initial_rewards(game, z);
  for (int i = 0; i < game.num_players(); ++i) {
    BestResponse br = best_response(game, z, i, rewards[static_cast<std::size_t>(i)], opts);
    const double improvement = br.current_cost - br.objective;
    res.improvements[static_cast<std::size_t>(i)] = improvement;
    if (improvement > res.worst_improvement) {
      res.worst_improvement = improvement;
      res.worst_player = i;
    }
  }
  res.is_equilibrium = res.worst_improvement < epsilon;
  return res;
}

JointReport check_collective(const Game& game, const CollectiveStrategy& z, double tol) {
  JointReport rep;
  RewardTable rewards = initial_rewards(game, z);
  for (int i = 0; i < game.num_players(); ++i) {
    const AggregateSignals sig = make_signals(game, z, i, rewards[static_cast<std::size_t>(i)]);
    PlayerProgram prog = build_player_program(game.pevs[static_cast<std::size_t>(i)], game.grid,
                                              sig, game.T, {game.pattern_eps});
    const Assignment a = unpack_strategy(prog.vars, z.players[static_cast<std::size_t>(i)]);
    const FeasibilityReport fr = prog.qp.check_feasible(a, tol);
    if (!fr.feasible) {
      rep.feasible = false;
      rep.message = "player " + std::to_string(i) + " violates its program (" +
                    std::to_string(fr.violations.size()) + " rows)";
      return rep;
    }
  }
  for (int t = 0; t < game.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    double total_u = 0.0;
    int plugged = 0;
    for (const PlayerStrategy& s : z.players) {
      total_u += s.u[ts];
      plugged += s.delta[ts];
    }
    const double load = game.grid.demand[ts] + total_u;
    if (load < -tol || load > game.grid.d_bar + tol) {
      rep.feasible = false;
      rep.message = "slot " + std::to_string(t) + ": total load " + std::to_string(load) +
                    " outside [0, " + std::to_string(game.grid.d_bar) + "]";
      return rep;
    }
    if (plugged > game.grid.v_bar) {
      rep.feasible = false;
      rep.message = "slot " + std::to_string(t) + ": " + std::to_string(plugged) +
                    " vehicles plugged, limit " + std::to_string(game.grid.v_bar);
      return rep;
    }
  }
  return rep;
}

}  // namespace pevgame

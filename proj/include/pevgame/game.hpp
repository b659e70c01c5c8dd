#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pevgame/miqp.hpp"
#include "pevgame/pev.hpp"

namespace pevgame {

/// How the aggregator forms the per-player reward trajectory. Constant uses
/// r_bar * d(t) for everyone; Aggregate adds the others' discharged energy,
/// refreshed each time a player is selected. The exact-potential identity is
/// stated for rewards held fixed, so the potential bookkeeping freezes each
/// player's reward row between refreshes.
enum class RewardMode { Constant, Aggregate };

enum class SelectionPolicy { RoundRobin, RandomPermutation };

struct Game {
  int T = 0;
  GridParams grid;
  std::vector<PevParams> pevs;
  RewardMode reward_mode = RewardMode::Aggregate;
  double pattern_eps = 1e-6;

  int num_players() const { return static_cast<int>(pevs.size()); }
  void validate() const;
};

struct CollectiveStrategy {
  int T = 0;
  std::vector<PlayerStrategy> players;
};

using RewardTable = std::vector<std::vector<double>>;  // one row per player

// Aggregate quantities seen by player i (everything excludes i itself).
std::vector<double> aggregate_demand(const CollectiveStrategy& z, int i);
std::vector<double> price_signal(const CollectiveStrategy& z, const GridParams& grid, int i);
std::vector<int> plug_signal(const CollectiveStrategy& z, const GridParams& grid, int i);
std::vector<double> reward_signal(const CollectiveStrategy& z, const GridParams& grid, int i);

/// Bundles price, reward, free plugs and the capacity box for player i.
AggregateSignals make_signals(const Game& game, const CollectiveStrategy& z, int i,
                              const std::vector<double>& reward_row);

/// Strategy-only part of the cost: phi_i = sum_t c d ell + r g + degradation.
double player_phi(const Game& game, const PlayerStrategy& s, int i,
                  const std::vector<double>& reward_row);

/// Full cost J_i = phi_i + sum_{j != i} c <ell_j, ell_i> under the given
/// frozen reward row.
double player_cost(const Game& game, const CollectiveStrategy& z, int i,
                   const std::vector<double>& reward_row);

/// Exact potential P = sum_i (phi_i + sum_{j<i} c <ell_j, ell_i>); each
/// unordered pair counted once.
double potential(const Game& game, const CollectiveStrategy& z, const RewardTable& rewards);

RewardTable initial_rewards(const Game& game, const CollectiveStrategy& z);

class InfeasibleScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BestResponse {
  PlayerStrategy strategy;
  double objective = 0.0;     // cost of the response under the given signals
  double current_cost = 0.0;  // cost of the unchanged strategy, same signals
  std::int64_t nodes = 0;
};

/// Optimal unilateral deviation of player i given everyone else fixed.
/// Throws InfeasibleScenario when the player program has no feasible point.
BestResponse best_response(const Game& game, const CollectiveStrategy& z, int i,
                           const std::vector<double>& reward_row, const SolveOptions& opts);

/// Sequential feasibility pass: players in index order solve their program
/// with a zero objective given the predecessors' choices. Throws
/// InfeasibleScenario naming the first player with no feasible schedule.
CollectiveStrategy phase0_init(const Game& game, const SolveOptions& opts);

struct IterationRecord {
  int k = 0;
  int player = 0;
  double old_cost = 0.0;
  double new_cost = 0.0;
  bool accepted = false;
  double potential_after = 0.0;
};

struct GameState {
  CollectiveStrategy strategies;
  RewardTable rewards;
  double potential = 0.0;
  int iterations = 0;
  int sweeps = 0;
  bool converged = false;
};

struct RunOptions {
  double epsilon = 1e-4;  // accept threshold, eur
  int max_sweeps = 100;
  SelectionPolicy selection = SelectionPolicy::RoundRobin;
  std::uint64_t seed = 1;
  SolveOptions solver;

  void validate() const;
};

struct RunResult {
  GameState state;
  std::vector<IterationRecord> records;
};

/// Sequential best-response loop: the aggregator picks players (round robin
/// or a seeded permutation per sweep), sends signals, and the picked player
/// adopts its best response iff it improves its cost by at least epsilon.
/// Terminates when a full sweep passes with no accepted update.
RunResult run_algorithm(const Game& game, const RunOptions& opts);

struct CertifyResult {
  bool is_equilibrium = false;
  double worst_improvement = 0.0;
  int worst_player = -1;
  std::vector<double> improvements;
};

/// One best response per player without accepting any: the point is an
/// eps-equilibrium iff no player can improve by epsilon or more.
CertifyResult certify_mine(const Game& game, const CollectiveStrategy& z, double epsilon,
                           const SolveOptions& opts);

struct JointReport {
  bool feasible = true;
  std::string message;
};

/// Checks every player's local program plus the shared capacity and plug
/// rows at the given tolerance.
JointReport check_collective(const Game& game, const CollectiveStrategy& z, double tol = 1e-6);

}  // namespace pevgame

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pevgame/game.hpp"

namespace pevgame {

inline constexpr const char* kPevgameVersion = "0.1.0";

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of the synthetic double-peak daily demand curve; hours refer
/// to the 24 h horizon regardless of slot length.
struct DemandCurve {
  double base_kwh = 22.0;
  double morning_peak_kwh = 13.0;
  double morning_center_hour = 8.5;
  double morning_width_hours = 1.5;
  double evening_peak_kwh = 27.5;
  double evening_center_hour = 19.0;
  double evening_width_hours = 2.0;

  std::vector<double> sample(int T, int slot_minutes) const;
};

struct ScenarioConfig {
  int n = 0;  // number of PEVs
  int T = 0;  // slots in the horizon
  int slot_minutes = 30;
  double epsilon_eur = 1e-4;
  int max_sweeps = 100;
  std::uint64_t seed = 1;
  SelectionPolicy selection = SelectionPolicy::RoundRobin;
  RewardMode reward_mode = RewardMode::Aggregate;
  double pattern_eps_kwh = 1e-6;
  SolveOptions solver;
  GridParams grid;  // demand resolved to per-slot values
  std::vector<PevParams> pevs;
  bool demand_synthetic = false;
  DemandCurve demand_curve;  // meaningful iff demand_synthetic

  Game game() const;
  RunOptions run_options() const;
  void validate() const;
};

enum class ScenarioScale { Paper, Desk };

/// Paper scale reproduces the published simulation parameters with seeded
/// per-vehicle heterogeneity and the synthetic demand curve whose evening
/// peak exceeds the grid capacity. Desk scale is a small variant of the
/// same physics (N=4, T=12, h=2) whose demand also exceeds capacity at one
/// slot; its rewards are constant so the potential is exact.
ScenarioConfig default_scenario(ScenarioScale scale, std::uint64_t seed = 1);

/// Desk-style scenario with explicit player count and horizon.
ScenarioConfig desk_scenario(int n, int T, std::uint64_t seed);

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& cfg);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

struct PevTrajectoryRow {
  int pev, t;
  double x, u;
  int delta, delta_c, delta_d;
};

struct AggregateRow {
  int t;
  double demand, fleet_u, total;
  int plugged;
};

struct OutputBundle {
  std::vector<PevTrajectoryRow> trajectories;
  std::vector<AggregateRow> aggregate;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  int sweeps = 0;
  double final_potential = 0.0;
  CollectiveStrategy final_strategy;
  double wall_seconds = 0.0;
};

/// Executes the initialization pass and the best-response loop, assembles
/// the output tables, and (when out_dir is nonempty) writes the CSV files,
/// the strategy snapshot, the figure data and the run manifest.
OutputBundle run(const ScenarioConfig& cfg, const std::string& out_dir = {});

/// Writes the per-figure columnar files from an existing bundle.
void emit_plotdata(const ScenarioConfig& cfg, const OutputBundle& bundle,
                   const std::string& out_dir);

void save_strategy(const CollectiveStrategy& z, const std::string& path);
CollectiveStrategy load_strategy(const std::string& path);

/// Randomized single-player instance for solver cross-checks: parameters
/// drawn from the published ranges, small horizon, signals as if the other
/// players were mid-game.
struct RandomPlayerInstance {
  PevParams pev;
  GridParams grid;
  AggregateSignals sig;
  int T = 0;
  PlayerProgram prog;
};

RandomPlayerInstance random_player_instance(std::mt19937_64& rng, int T, int h_min);

}  // namespace pevgame

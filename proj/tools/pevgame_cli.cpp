#include <cmath>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "pevgame/scenario.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitConfigError = 4;

pevgame::ScenarioConfig resolve_scenario(const std::string& file, const std::string& scale,
                                         std::uint64_t seed) {
  if (!file.empty()) return pevgame::load_scenario(file);
  const auto s = scale == "paper" ? pevgame::ScenarioScale::Paper : pevgame::ScenarioScale::Desk;
  return pevgame::default_scenario(s, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-integer potential game engine for PEV charge scheduling"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir = "out";
  std::string scale = "desk";
  std::string strategy_file;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double epsilon = 0.0;
  bool epsilon_set = false;
  int max_sweeps = 0;
  int samples = 50;

  auto* init = app.add_subcommand("init", "write a default scenario file");
  std::string init_out = "scenario.json";
  init->add_option("--scale", scale, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  init->add_option("--out", init_out, "output file");
  init->add_option("--seed", seed, "sampling seed")->each([&](const std::string&) { seed_set = true; });

  auto* runc = app.add_subcommand("run", "run the best-response loop on a scenario");
  runc->add_option("--scenario", scenario_file, "scenario file (omit to use --scale default)");
  runc->add_option("--scale", scale, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  runc->add_option("--out", out_dir, "output directory");
  runc->add_option("--epsilon", epsilon, "accept threshold, eur")
      ->each([&](const std::string&) { epsilon_set = true; });
  runc->add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
  runc->add_option("--max-sweeps", max_sweeps, "sweep limit override");

  auto* cert = app.add_subcommand("certify", "check a saved strategy for eps-equilibrium");
  cert->add_option("--scenario", scenario_file, "scenario file")->required();
  cert->add_option("--strategy", strategy_file, "strategy snapshot from a run")->required();
  cert->add_option("--epsilon", epsilon, "threshold override, eur")
      ->each([&](const std::string&) { epsilon_set = true; });

  auto* oracle = app.add_subcommand("oracle", "cross-check branch-and-bound against enumeration");
  oracle->add_option("--samples", samples, "number of randomized player programs");
  oracle->add_option("--seed", seed, "sampling seed")->each([&](const std::string&) { seed_set = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      const auto cfg = pevgame::default_scenario(
          scale == "paper" ? pevgame::ScenarioScale::Paper : pevgame::ScenarioScale::Desk,
          seed_set ? seed : 1);
      pevgame::save_scenario(cfg, init_out);
      std::cout << "wrote " << init_out << " (players=" << cfg.n << ", horizon=" << cfg.T << ")\n";
      return kExitConverged;
    }

    if (runc->parsed()) {
      pevgame::ScenarioConfig cfg = resolve_scenario(scenario_file, scale, seed_set ? seed : 1);
      if (seed_set) cfg.seed = seed;
      if (epsilon_set) cfg.epsilon_eur = epsilon;
      if (max_sweeps > 0) cfg.max_sweeps = max_sweeps;
      cfg.validate();
      const pevgame::OutputBundle b = pevgame::run(cfg, out_dir);
      std::cout << (b.converged ? "converged" : "not converged") << " after " << b.sweeps
                << " sweeps, " << b.iterations.size() << " iterations; final potential "
                << b.final_potential << " eur; outputs in " << out_dir << "\n";
      return b.converged ? kExitConverged : kExitNotConverged;
    }

    if (cert->parsed()) {
      const pevgame::ScenarioConfig cfg = pevgame::load_scenario(scenario_file);
      const pevgame::CollectiveStrategy z = pevgame::load_strategy(strategy_file);
      const double eps = epsilon_set ? epsilon : cfg.epsilon_eur;
      const auto res = pevgame::certify_mine(cfg.game(), z, eps, cfg.solver);
      std::cout << (res.is_equilibrium ? "certified" : "not an equilibrium")
                << ": worst improvement " << res.worst_improvement << " eur";
      if (res.worst_player >= 0) std::cout << " (player " << res.worst_player << ")";
      std::cout << " against epsilon " << eps << "\n";
      return res.is_equilibrium ? kExitConverged : kExitNotConverged;
    }

    if (oracle->parsed()) {
      std::mt19937_64 rng(seed_set ? seed : 7);
      double worst = 0.0;
      int mismatches = 0;
      for (int k = 0; k < samples; ++k) {
        std::uniform_int_distribution<int> t_dist(2, 3);
        const int T = t_dist(rng);
        const int h = T == 2 ? 2 : 1;
        auto inst = pevgame::random_player_instance(rng, T, h);
        pevgame::SolveOptions opts;
        const auto bb = pevgame::solve(inst.prog.qp, opts);
        const auto bf = pevgame::brute_force(inst.prog.qp, opts);
        if (bb.status != bf.status) {
          ++mismatches;
          std::cout << "sample " << k << ": status mismatch\n";
          continue;
        }
        if (bb.status == pevgame::SolveStatus::Optimal) {
          const double diff = std::abs(bb.objective - bf.objective);
          worst = std::max(worst, diff);
          if (diff > 1e-6) {
            ++mismatches;
            std::cout << "sample " << k << ": objective gap " << diff << "\n";
          }
        }
      }
      std::cout << samples << " samples, worst objective gap " << worst << ", " << mismatches
                << " mismatches\n";
      return mismatches == 0 ? kExitConverged : kExitNotConverged;
    }
  } catch (const pevgame::InfeasibleScenario& e) {
    std::cerr << "infeasible scenario: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const pevgame::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfigError;
}

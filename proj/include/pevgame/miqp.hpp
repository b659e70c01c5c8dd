#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>

#include "pevgame/qp_model.hpp"

namespace pevgame {

struct SolveOptions {
  double rel_gap = 1e-8;
  double abs_gap = 1e-9;
  double integrality_tol = 1e-6;
  double qp_tol = 1e-9;
  double regularization = 1e-9;  // added to every diagonal entry of the quadratic
  std::int64_t node_limit = 0;   // 0 = unlimited
  double time_limit_s = 0.0;     // 0 = unlimited
  int brute_force_cap = 20;
  bool keep_node_log = false;

  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, NodeLimit, TimeLimit };

/// One explored node: 'b' branched, 'i' infeasible, 'p' pruned by bound,
/// 'f' integral (polished into a candidate incumbent), 'x' fathomed
/// degenerate.
struct NodeLogEntry {
  std::int64_t seq = 0;
  double parent_bound = 0.0;
  double bound = 0.0;
  char event = 'b';
};

/// Result of a mixed-integer solve. objective is the unregularized
/// objective evaluated at the incumbent; best_bound is a bound on the
/// regularized objective (the one branch-and-bound actually minimizes,
/// which exceeds the true objective by at most regularization * |x|^2).
struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  Assignment assignment;
  double objective = std::numeric_limits<double>::infinity();
  double best_bound = -std::numeric_limits<double>::infinity();
  std::int64_t nodes_explored = 0;
  std::vector<NodeLogEntry> node_log;  // filled when opts.keep_node_log

  bool has_incumbent() const { return !assignment.empty(); }
};

/// Structured-text dump of the explored node tree for diagnostics.
void dump_node_log(const SolveResult& res, std::ostream& os);

/// Unrecoverable numerical failure in the QP subsolver; aborts the run
/// with the node diagnostics attached.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Continuous relaxation under partial fixings: binaries relax to [0, 1]
/// except the fixed ones; fixed variables are substituted out. An
/// infeasible verdict carries a verified inconsistency certificate (or a
/// least-violation phase-1 optimum above qp_tol as fallback).
struct RelaxationResult {
  SolveStatus status = SolveStatus::Infeasible;
  Assignment point;
  double objective = std::numeric_limits<double>::infinity();      // true objective
  double objective_reg = std::numeric_limits<double>::infinity();  // with regularization
  bool infeasibility_certified = false;
  std::string message;
};

RelaxationResult solve_qp_relaxation(const MixedIntegerQP& p,
                                     const std::map<VarId, double>& fixings,
                                     const SolveOptions& opts = {});

/// Exact branch-and-bound over the binary variables with a dual active-set
/// QP relaxation at each node. Deterministic: most-fractional branching
/// (ties to the lowest id), best-first node order (ties to insertion).
/// warm_start, when given and feasible, seeds the incumbent.
SolveResult solve(const MixedIntegerQP& p, const SolveOptions& opts = {},
                  const Assignment* warm_start = nullptr);

/// Reference oracle: enumerates every assignment of the unfixed binaries
/// (refusing above opts.brute_force_cap), solving the continuous QP for
/// each. Rows whose support is fully binary are checked arithmetically
/// before any QP is built.
SolveResult brute_force(const MixedIntegerQP& p, const SolveOptions& opts = {});

}  // namespace pevgame

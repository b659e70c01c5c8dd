#include "pevgame/miqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "pevgame/qp_solver.hpp"

namespace pevgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

using Fixings = std::map<VarId, double>;

// Dense reduction of the program under a set of fixings: fixed variables
// (by bound or by fixing) are substituted out; remaining bounds become
// inequality rows; rows are scaled to unit infinity-norm and exact
// duplicates dropped. The regularized objective constant keeps node bounds
// comparable across different fixing sets.
struct DenseReduction {
  DenseQp qp;
  std::vector<VarId> free_vars;
  Assignment base;  // full-length, fixed entries filled in
  double reg_constant = 0.0;
  bool infeasible_constant_row = false;
  std::string constant_row_message;
};

DenseReduction reduce(const MixedIntegerQP& p, const Fixings& fixings, double regularization) {
  DenseReduction out;
  const int nv = p.num_vars();
  out.base.assign(static_cast<std::size_t>(nv), 0.0);
  std::vector<char> is_fixed(static_cast<std::size_t>(nv), 0);
  std::vector<int> to_free(static_cast<std::size_t>(nv), -1);

  for (const VarSpec& vs : p.vars()) {
    const auto id = static_cast<std::size_t>(vs.id);
    auto it = fixings.find(vs.id);
    if (it != fixings.end()) {
      if (it->second < vs.lower - 1e-12 || it->second > vs.upper + 1e-12) {
        out.infeasible_constant_row = true;
        out.constant_row_message = "fixing outside bounds for variable " + vs.label;
        return out;
      }
      is_fixed[id] = 1;
      out.base[id] = it->second;
    } else if (vs.lower == vs.upper) {
      is_fixed[id] = 1;
      out.base[id] = vs.lower;
    } else {
      to_free[id] = static_cast<int>(out.free_vars.size());
      out.free_vars.push_back(vs.id);
    }
  }
  const int n = static_cast<int>(out.free_vars.size());

  // objective: monomial convention w_ij x_i x_j maps to G with
  // G_ii = 2 w_ii, G_ij = w_ij (i != j) so that 0.5 x'Gx reproduces it
  out.qp.G = Eigen::MatrixXd::Zero(n, n);
  out.qp.g0 = Eigen::VectorXd::Zero(n);
  double constant = 0.0;
  for (const auto& [key, w] : p.objective().pairs()) {
    const auto [i, j] = key;
    const int fi = to_free[static_cast<std::size_t>(i)];
    const int fj = to_free[static_cast<std::size_t>(j)];
    if (fi >= 0 && fj >= 0) {
      if (fi == fj) {
        out.qp.G(fi, fi) += 2.0 * w;
      } else {
        out.qp.G(fi, fj) += w;
        out.qp.G(fj, fi) += w;
      }
    } else if (fi >= 0) {
      out.qp.g0[fi] += w * out.base[static_cast<std::size_t>(j)];
    } else if (fj >= 0) {
      out.qp.g0[fj] += w * out.base[static_cast<std::size_t>(i)];
    } else {
      constant += w * out.base[static_cast<std::size_t>(i)] * out.base[static_cast<std::size_t>(j)];
    }
  }
  for (const auto& [vid, c] : p.objective().linear().coeffs()) {
    const int fi = to_free[static_cast<std::size_t>(vid)];
    if (fi >= 0)
      out.qp.g0[fi] += c;
    else
      constant += c * out.base[static_cast<std::size_t>(vid)];
  }
  constant += p.objective().linear().constant();
  for (int i = 0; i < n; ++i) out.qp.G(i, i) += 2.0 * regularization;
  for (int vid = 0; vid < nv; ++vid) {
    if (is_fixed[static_cast<std::size_t>(vid)]) {
      const double val = out.base[static_cast<std::size_t>(vid)];
      constant += regularization * val * val;
    }
  }
  out.reg_constant = constant;

  // rows: substitute fixings, normalize, dedupe
  std::vector<Eigen::VectorXd> eq_rows, in_rows;
  std::vector<double> eq_consts, in_consts;
  std::set<std::pair<std::vector<std::pair<int, double>>, double>> seen_eq, seen_in;

  auto push_row = [&](const LinearExpr& expr, Sense sense, double rhs) -> bool {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    double c0 = -rhs;
    double maxabs = 0.0;
    for (const auto& [vid, coeff] : expr.coeffs()) {
      const int fi = to_free[static_cast<std::size_t>(vid)];
      if (fi >= 0) {
        a[fi] += coeff;
        maxabs = std::max(maxabs, std::abs(a[fi]));
      } else {
        c0 += coeff * out.base[static_cast<std::size_t>(vid)];
      }
    }
    if (maxabs == 0.0) {
      // fully substituted row: a plain arithmetic check
      const double viol = sense == Sense::Leq   ? c0
                          : sense == Sense::Geq ? -c0
                                                : std::abs(c0);
      if (viol > 1e-9) {
        out.infeasible_constant_row = true;
        out.constant_row_message = "constant row violated by " + std::to_string(viol);
        return false;
      }
      return true;
    }
    const double scale = 1.0 / maxabs;
    // orient: equalities as a x + c = 0, inequalities as a x + c >= 0
    double sign = scale;
    if (sense == Sense::Leq) sign = -scale;
    a *= sign;
    c0 *= sign;
    std::vector<std::pair<int, double>> key;
    for (int i = 0; i < n; ++i)
      if (a[i] != 0.0) key.emplace_back(i, a[i]);
    if (sense == Sense::Eq) {
      if (seen_eq.emplace(key, c0).second) {
        eq_rows.push_back(std::move(a));
        eq_consts.push_back(c0);
      }
    } else {
      if (seen_in.emplace(std::move(key), c0).second) {
        in_rows.push_back(std::move(a));
        in_consts.push_back(c0);
      }
    }
    return true;
  };

  for (const LinearConstraint& row : p.constraints()) {
    if (!push_row(row.expr, row.sense, row.rhs)) return out;
  }
  for (VarId vid : out.free_vars) {
    const VarSpec& vs = p.var(vid);
    if (std::isfinite(vs.upper))
      if (!push_row(LinearExpr::variable(vid), Sense::Leq, vs.upper)) return out;
    if (std::isfinite(vs.lower))
      if (!push_row(LinearExpr::variable(vid), Sense::Geq, vs.lower)) return out;
  }

  out.qp.CE.resize(static_cast<Eigen::Index>(eq_rows.size()), n);
  out.qp.ce0.resize(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    out.qp.CE.row(static_cast<Eigen::Index>(i)) = eq_rows[i].transpose();
    out.qp.ce0[static_cast<Eigen::Index>(i)] = eq_consts[i];
  }
  out.qp.CI.resize(static_cast<Eigen::Index>(in_rows.size()), n);
  out.qp.ci0.resize(static_cast<Eigen::Index>(in_rows.size()));
  for (std::size_t i = 0; i < in_rows.size(); ++i) {
    out.qp.CI.row(static_cast<Eigen::Index>(i)) = in_rows[i].transpose();
    out.qp.ci0[static_cast<Eigen::Index>(i)] = in_consts[i];
  }
  return out;
}

struct NodeSolve {
  QpStatus status = QpStatus::Failure;
  double objective_reg = kInf;  // regularized objective incl. constant
  Assignment full;              // full-length assignment
  bool certified = false;       // meaningful when infeasible
  std::string message;
};

// Checks that the weighted row combination has a (numerically) zero normal,
// a negative constant, and nonnegative weights on inequality rows.
bool verify_farkas(const DenseQp& qp, const std::vector<FarkasTerm>& terms, double value) {
  if (terms.empty() || value >= 0.0) return false;
  const int n = qp.num_vars();
  const int meq = qp.num_eq();
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(n);
  double weight_scale = 0.0;
  for (const FarkasTerm& ft : terms) {
    if (ft.row >= meq && ft.weight < -1e-9) return false;
    const Eigen::VectorXd row =
        ft.row < meq ? qp.CE.row(ft.row).transpose() : qp.CI.row(ft.row - meq).transpose();
    combo += ft.weight * row;
    weight_scale = std::max(weight_scale, std::abs(ft.weight));
  }
  const double residual = combo.cwiseAbs().maxCoeff();
  return residual <= 1e-6 * std::max(1.0, weight_scale) && value < -residual;
}

// Least-violation pass over the reduced rows: min sum of squared slacks.
// A strictly positive optimum is itself an infeasibility certificate.
struct Phase1Out {
  bool infeasible = false;
  double worst_violation = 0.0;
  bool solved = false;
};

Phase1Out phase1_least_violation(const DenseQp& qp, double qp_tol) {
  Phase1Out out;
  const int n = qp.num_vars();
  const int meq = qp.num_eq();
  const int mi = qp.num_ineq();
  const int ntot = n + mi + meq;
  DenseQp p1;
  p1.G = Eigen::MatrixXd::Zero(ntot, ntot);
  for (int i = 0; i < n; ++i) p1.G(i, i) = 1e-9;
  for (int i = n; i < ntot; ++i) p1.G(i, i) = 2.0;
  p1.g0 = Eigen::VectorXd::Zero(ntot);
  p1.CE.resize(meq, ntot);
  p1.CE.setZero();
  p1.CE.leftCols(n) = qp.CE;
  for (int i = 0; i < meq; ++i) p1.CE(i, n + mi + i) = 1.0;
  p1.ce0 = qp.ce0;
  p1.CI.resize(2 * mi, ntot);
  p1.CI.setZero();
  p1.CI.topLeftCorner(mi, n) = qp.CI;
  for (int i = 0; i < mi; ++i) {
    p1.CI(i, n + i) = 1.0;           // CI x + ci0 + s >= 0
    p1.CI(mi + i, n + i) = 1.0;      // s >= 0
  }
  p1.ci0.resize(2 * mi);
  p1.ci0.head(mi) = qp.ci0;
  p1.ci0.tail(mi).setZero();
  const QpResult qr = solve_dense_qp(p1, qp_tol);
  if (qr.status != QpStatus::Optimal) return out;
  out.solved = true;
  double worst = 0.0;
  for (int i = 0; i < mi + meq; ++i) worst = std::max(worst, std::abs(qr.x[n + i]));
  out.worst_violation = worst;
  out.infeasible = worst > 10.0 * qp_tol;
  return out;
}

NodeSolve solve_relaxation(const MixedIntegerQP& p, const Fixings& fixings,
                           const SolveOptions& opts) {
  NodeSolve out;
  DenseReduction red = reduce(p, fixings, opts.regularization);
  if (red.infeasible_constant_row) {
    out.status = QpStatus::Infeasible;
    out.certified = true;  // a violated constant row is its own certificate
    out.message = red.constant_row_message;
    return out;
  }
  if (red.free_vars.empty()) {
    out.status = QpStatus::Optimal;
    out.objective_reg = red.reg_constant;
    out.full = red.base;
    return out;
  }
  QpResult qr = solve_dense_qp(red.qp, opts.qp_tol);
  if (qr.status == QpStatus::Failure) {
    out.status = QpStatus::Failure;
    out.message = qr.message;
    return out;
  }
  if (qr.status == QpStatus::Infeasible) {
    out.status = QpStatus::Infeasible;
    out.message = qr.message;
    out.certified = verify_farkas(red.qp, qr.farkas, qr.farkas_value);
    if (!out.certified) {
      const Phase1Out p1 = phase1_least_violation(red.qp, opts.qp_tol);
      if (p1.solved && p1.infeasible) {
        out.certified = true;
        out.message += "; phase-1 least violation " + std::to_string(p1.worst_violation);
      } else if (p1.solved && !p1.infeasible) {
        out.status = QpStatus::Failure;
        out.message = "infeasible verdict contradicted by phase-1 (" + out.message + ")";
      }
    }
    return out;
  }
  out.status = QpStatus::Optimal;
  out.objective_reg = qr.objective + red.reg_constant;
  out.full = red.base;
  for (std::size_t i = 0; i < red.free_vars.size(); ++i)
    out.full[static_cast<std::size_t>(red.free_vars[i])] = qr.x[static_cast<Eigen::Index>(i)];
  return out;
}

struct Node {
  Fixings fixings;
  double bound = -kInf;
  std::int64_t seq = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;
  }
};

}  // namespace

void SolveOptions::validate() const {
  require(rel_gap > 0.0 && abs_gap > 0.0 && integrality_tol > 0.0 && qp_tol > 0.0,
          "solver tolerances must be positive");
  require(regularization > 0.0, "regularization must be positive");
  require(brute_force_cap >= 0, "brute_force_cap must be nonnegative");
}

RelaxationResult solve_qp_relaxation(const MixedIntegerQP& p,
                                     const std::map<VarId, double>& fixings,
                                     const SolveOptions& opts) {
  opts.validate();
  RelaxationResult out;
  NodeSolve ns = solve_relaxation(p, fixings, opts);
  out.message = ns.message;
  if (ns.status == QpStatus::Failure) throw SolverFailure("QP relaxation failed: " + ns.message);
  if (ns.status == QpStatus::Infeasible) {
    out.status = SolveStatus::Infeasible;
    out.infeasibility_certified = ns.certified;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.point = std::move(ns.full);
  out.objective_reg = ns.objective_reg;
  out.objective = eval_objective(p.objective(), out.point);
  return out;
}

SolveResult solve(const MixedIntegerQP& p, const SolveOptions& opts,
                  const Assignment* warm_start) {
  opts.validate();
  SolveResult res;
  const auto t_start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (opts.time_limit_s <= 0.0) return false;
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
    return el.count() > opts.time_limit_s;
  };

  std::vector<VarId> branchable;
  for (const VarSpec& vs : p.vars())
    if (vs.kind == VarKind::Binary && vs.lower < vs.upper) branchable.push_back(vs.id);

  double incumbent_reg = kInf;
  Assignment incumbent;

  // polish a candidate integral point: re-solve with every binary pinned to
  // its rounded value so binaries are exact and equalities hold to machine
  // precision; returns whether the pinned program was feasible
  auto try_incumbent = [&](const Assignment& a) -> bool {
    Fixings fix;
    for (VarId b : branchable) {
      const double v = a[static_cast<std::size_t>(b)];
      fix[b] = v > 0.5 ? 1.0 : 0.0;
    }
    NodeSolve ns = solve_relaxation(p, fix, opts);
    res.nodes_explored++;
    if (ns.status == QpStatus::Failure) throw SolverFailure("incumbent polish failed: " + ns.message);
    if (ns.status != QpStatus::Optimal) return false;
    if (ns.objective_reg < incumbent_reg) {
      incumbent_reg = ns.objective_reg;
      incumbent = std::move(ns.full);
    }
    return true;
  };

  if (warm_start != nullptr && warm_start->size() == static_cast<std::size_t>(p.num_vars())) {
    if (p.check_feasible(*warm_start, opts.integrality_tol).feasible) {
      try_incumbent(*warm_start);
    }
  }

  auto gap_margin = [&]() {
    if (incumbent_reg == kInf) return 0.0;
    return std::max(opts.abs_gap, opts.rel_gap * std::abs(incumbent_reg));
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t seq = 0;
  open.push({Fixings{}, -kInf, seq++});
  double best_open_bound = -kInf;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    best_open_bound = node.bound;
    if (incumbent_reg < kInf && node.bound >= incumbent_reg - gap_margin()) {
      // best-first order: every remaining node is at least as bad
      break;
    }
    if (opts.node_limit > 0 && res.nodes_explored >= opts.node_limit) {
      res.status = SolveStatus::NodeLimit;
      res.assignment = incumbent;
      res.objective = incumbent.empty() ? kInf : eval_objective(p.objective(), incumbent);
      res.best_bound = node.bound;
      return res;
    }
    if (out_of_time()) {
      res.status = SolveStatus::TimeLimit;
      res.assignment = incumbent;
      res.objective = incumbent.empty() ? kInf : eval_objective(p.objective(), incumbent);
      res.best_bound = node.bound;
      return res;
    }

    NodeSolve ns = solve_relaxation(p, node.fixings, opts);
    res.nodes_explored++;
    if (ns.status == QpStatus::Failure) {
      throw SolverFailure("QP relaxation failed at node with " +
                          std::to_string(node.fixings.size()) + " fixings: " + ns.message);
    }
    auto log = [&](double bound, char event) {
      if (opts.keep_node_log) res.node_log.push_back({node.seq, node.bound, bound, event});
    };
    if (ns.status == QpStatus::Infeasible) {
      log(kInf, 'i');
      continue;
    }
    const double bound = std::max(ns.objective_reg, node.bound);
    if (incumbent_reg < kInf && bound >= incumbent_reg - gap_margin()) {
      log(ns.objective_reg, 'p');
      continue;
    }

    // branch variable: most fractional unfixed binary, ties to lowest id
    VarId branch_var = -1;
    double worst_frac = opts.integrality_tol;
    for (VarId b : branchable) {
      if (node.fixings.count(b)) continue;
      const double v = ns.full[static_cast<std::size_t>(b)];
      const double frac = std::abs(v - std::round(v));
      if (frac > worst_frac) {
        worst_frac = frac;
        branch_var = b;
      }
    }
    if (branch_var < 0) {
      // integral within tolerance: the relaxation optimum settles this
      // subtree, so polishing it (feasible or better or not) fathoms the node
      if (try_incumbent(ns.full)) {
        log(ns.objective_reg, 'f');
        continue;
      }
      // rounding killed feasibility: branch on the most displaced binary
      for (VarId b : branchable) {
        if (node.fixings.count(b)) continue;
        const double v = ns.full[static_cast<std::size_t>(b)];
        const double frac = std::abs(v - std::round(v));
        if (frac > 0.0 && (branch_var < 0 || frac > worst_frac)) {
          worst_frac = frac;
          branch_var = b;
        }
      }
      if (branch_var < 0) {
        log(ns.objective_reg, 'x');
        continue;  // exactly integral yet unusable: fathom
      }
    }
    log(ns.objective_reg, 'b');
    for (double val : {0.0, 1.0}) {
      Node child;
      child.fixings = node.fixings;
      child.fixings[branch_var] = val;
      child.bound = bound;
      child.seq = seq++;
      open.push(std::move(child));
    }
  }

  if (incumbent.empty()) {
    res.status = SolveStatus::Infeasible;
    res.objective = kInf;
    res.best_bound = kInf;
    return res;
  }
  res.status = SolveStatus::Optimal;
  res.assignment = std::move(incumbent);
  res.objective = eval_objective(p.objective(), res.assignment);
  res.best_bound = open.empty() ? incumbent_reg : std::min(incumbent_reg, best_open_bound);
  return res;
}

void dump_node_log(const SolveResult& res, std::ostream& os) {
  os << "nodes_explored=" << res.nodes_explored << " status=" << static_cast<int>(res.status)
     << "\n";
  for (const NodeLogEntry& e : res.node_log) {
    os << "  node " << e.seq << " event=" << e.event << " parent_bound=" << e.parent_bound
       << " bound=" << e.bound << "\n";
  }
}

SolveResult brute_force(const MixedIntegerQP& p, const SolveOptions& opts) {
  opts.validate();
  std::vector<VarId> bins;
  for (const VarSpec& vs : p.vars())
    if (vs.kind == VarKind::Binary && vs.lower < vs.upper) bins.push_back(vs.id);
  const int nb = static_cast<int>(bins.size());
  if (nb > opts.brute_force_cap) {
    throw std::invalid_argument("brute_force refused: " + std::to_string(nb) +
                                " binaries exceed cap " + std::to_string(opts.brute_force_cap));
  }

  // rows whose free support is entirely binary can be checked per mask
  // without building a QP
  std::vector<int> bin_pos(static_cast<std::size_t>(p.num_vars()), -1);
  for (int k = 0; k < nb; ++k) bin_pos[static_cast<std::size_t>(bins[k])] = k;
  struct BinRow {
    std::vector<std::pair<int, double>> terms;  // (mask position, coeff)
    double base = 0.0;
    Sense sense;
    double rhs;
  };
  std::vector<BinRow> bin_rows;
  for (const LinearConstraint& row : p.constraints()) {
    BinRow br;
    br.sense = row.sense;
    br.rhs = row.rhs;
    bool pure = true;
    for (const auto& [vid, coeff] : row.expr.coeffs()) {
      const VarSpec& vs = p.var(vid);
      const int pos = bin_pos[static_cast<std::size_t>(vid)];
      if (pos >= 0) {
        br.terms.emplace_back(pos, coeff);
      } else if (vs.lower == vs.upper) {
        br.base += coeff * vs.lower;
      } else {
        pure = false;
        break;
      }
    }
    if (pure) bin_rows.push_back(std::move(br));
  }

  SolveResult res;
  double best_reg = kInf;
  const std::uint64_t total = nb >= 64 ? 0 : (std::uint64_t{1} << nb);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    bool ok = true;
    for (const BinRow& br : bin_rows) {
      double lhs = br.base;
      for (const auto& [pos, coeff] : br.terms)
        lhs += coeff * static_cast<double>((mask >> pos) & 1U);
      const double viol = br.sense == Sense::Leq   ? lhs - br.rhs
                          : br.sense == Sense::Geq ? br.rhs - lhs
                                                   : std::abs(lhs - br.rhs);
      if (viol > 1e-9) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    Fixings fix;
    for (int k = 0; k < nb; ++k)
      fix[bins[static_cast<std::size_t>(k)]] = static_cast<double>((mask >> k) & 1U);
    NodeSolve ns = solve_relaxation(p, fix, opts);
    res.nodes_explored++;
    if (ns.status == QpStatus::Failure)
      throw SolverFailure("brute force QP failed: " + ns.message);
    if (ns.status != QpStatus::Optimal) continue;
    if (ns.objective_reg < best_reg) {
      best_reg = ns.objective_reg;
      res.assignment = std::move(ns.full);
    }
  }
  if (res.assignment.empty()) {
    res.status = SolveStatus::Infeasible;
    res.objective = kInf;
    res.best_bound = kInf;
    return res;
  }
  res.status = SolveStatus::Optimal;
  res.objective = eval_objective(p.objective(), res.assignment);
  res.best_bound = best_reg;
  return res;
}

}  // namespace pevgame

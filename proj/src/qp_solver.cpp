#include "pevgame/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pevgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMachEps = std::numeric_limits<double>::epsilon();

// Working state of the Goldfarb-Idnani iteration. Constraint indices are
// stacked: 0..meq-1 equalities, then meq.. inequalities. st.active holds the
// iq active rows; st.u[0..iq-1] their multipliers and st.u[iq] the candidate.
struct GiState {
  int n = 0;
  Eigen::MatrixXd J;  // L^{-T}, rotated so the first iq columns span N*
  Eigen::MatrixXd R;  // upper triangular basis factor
  std::vector<int> active;
  Eigen::VectorXd u;
  int iq = 0;
  double R_norm = 1.0;
};

bool add_constraint(GiState& st, Eigen::VectorXd& d) {
  const int n = st.n;
  for (int j = n - 1; j >= st.iq + 1; --j) {
    double cc = d[j - 1];
    double ss = d[j];
    const double h = std::hypot(cc, ss);
    if (h < kMachEps) continue;
    d[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d[j - 1] = -h;
    } else {
      d[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = st.J(k, j - 1);
      const double t2 = st.J(k, j);
      st.J(k, j - 1) = t1 * cc + t2 * ss;
      st.J(k, j) = xny * (t1 + st.J(k, j - 1)) - t2;
    }
  }
  st.iq++;
  st.R.col(st.iq - 1).head(st.iq) = d.head(st.iq);
  st.R.col(st.iq - 1).tail(n - st.iq).setZero();
  if (std::abs(d[st.iq - 1]) <= kMachEps * st.R_norm) {
    st.iq--;  // degenerate: normal numerically in span of the basis
    return false;
  }
  st.R_norm = std::max(st.R_norm, std::abs(d[st.iq - 1]));
  return true;
}

// Removes stacked row `row` from the active set; shifts multipliers,
// including the candidate slot at u[iq].
void delete_constraint(GiState& st, int meq, int row) {
  const int n = st.n;
  int qq = -1;
  for (int i = meq; i < st.iq; ++i) {
    if (st.active[static_cast<std::size_t>(i)] == row) {
      qq = i;
      break;
    }
  }
  if (qq < 0) return;
  for (int i = qq; i < st.iq - 1; ++i) {
    st.active[static_cast<std::size_t>(i)] = st.active[static_cast<std::size_t>(i + 1)];
    st.u[i] = st.u[i + 1];
    st.R.col(i) = st.R.col(i + 1);
  }
  st.u[st.iq - 1] = st.u[st.iq];
  st.u[st.iq] = 0.0;
  st.R.col(st.iq - 1).setZero();
  st.active.pop_back();
  st.iq--;
  for (int j = qq; j < st.iq; ++j) {
    double cc = st.R(j, j);
    double ss = st.R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h < kMachEps) continue;
    cc /= h;
    ss /= h;
    st.R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      st.R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      st.R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < st.iq; ++k) {
      const double t1 = st.R(j, k);
      const double t2 = st.R(j + 1, k);
      st.R(j, k) = t1 * cc + t2 * ss;
      st.R(j + 1, k) = xny * (t1 + st.R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = st.J(k, j);
      const double t2 = st.J(k, j + 1);
      st.J(k, j) = t1 * cc + t2 * ss;
      st.J(k, j + 1) = xny * (st.J(k, j) + t1) - t2;
    }
  }
}

Eigen::VectorXd stacked_row(const DenseQp& qp, int idx) {
  if (idx < qp.num_eq()) return qp.CE.row(idx).transpose();
  return qp.CI.row(idx - qp.num_eq()).transpose();
}

double stacked_const(const DenseQp& qp, int idx) {
  if (idx < qp.num_eq()) return qp.ce0[idx];
  return qp.ci0[idx - qp.num_eq()];
}

// Certificate when the candidate row cannot be restored: candidate normal
// lies in the span of the active normals, candidate = sum_j r_j active_j,
// and the implied constant is negative at every point of the active face.
void build_farkas(QpResult& res, const GiState& st, const Eigen::VectorXd& r, int candidate,
                  const DenseQp& qp) {
  res.farkas.clear();
  res.farkas.push_back({candidate, 1.0});
  double value = stacked_const(qp, candidate);
  for (int j = 0; j < st.iq; ++j) {
    const int row = st.active[static_cast<std::size_t>(j)];
    if (r[j] != 0.0) res.farkas.push_back({row, -r[j]});
    value -= r[j] * stacked_const(qp, row);
  }
  res.farkas_value = value;
}

struct PolishOut {
  Eigen::VectorXd x;
  Eigen::VectorXd mult;
  bool ok = false;
};

// KKT re-solve on a fixed active set via the Schur complement; strips the
// roundoff accumulated by the incremental Givens updates.
PolishOut polish_active_set(const DenseQp& qp, const Eigen::LLT<Eigen::MatrixXd>& llt,
                            const std::vector<int>& active) {
  PolishOut out;
  const int n = qp.num_vars();
  const int k = static_cast<int>(active.size());
  if (k == 0) {
    out.x = llt.solve(-qp.g0);
    out.mult.resize(0);
    out.ok = true;
    return out;
  }
  Eigen::MatrixXd N(k, n);
  Eigen::VectorXd c(k);
  for (int i = 0; i < k; ++i) {
    N.row(i) = stacked_row(qp, active[static_cast<std::size_t>(i)]).transpose();
    c[i] = stacked_const(qp, active[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd v = llt.solve(qp.g0);
  const Eigen::MatrixXd W = llt.matrixL().solve(N.transpose());
  const Eigen::MatrixXd S = W.transpose() * W;
  Eigen::LLT<Eigen::MatrixXd> sllt(S);
  if (sllt.info() != Eigen::Success) return out;
  Eigen::VectorXd rhs = N * v + c;
  Eigen::VectorXd mult = sllt.solve(rhs);
  rhs -= S * mult;  // one refinement round
  mult += sllt.solve(rhs);
  out.x = llt.solve(N.transpose() * mult - qp.g0);
  out.mult = std::move(mult);
  out.ok = true;
  return out;
}

double worst_violation(const DenseQp& qp, const Eigen::VectorXd& x) {
  double worst = 0.0;
  if (qp.num_eq() > 0) worst = (qp.CE * x + qp.ce0).cwiseAbs().maxCoeff();
  if (qp.num_ineq() > 0) worst = std::max(worst, -std::min(0.0, (qp.CI * x + qp.ci0).minCoeff()));
  return worst;
}

}  // namespace

QpResult solve_dense_qp(const DenseQp& qp, double tol) {
  QpResult res;
  const int n = qp.num_vars();
  const int meq = qp.num_eq();
  const int mi = qp.num_ineq();
  if (qp.g0.size() != n || qp.CE.cols() != n || qp.CI.cols() != n || qp.ce0.size() != meq ||
      qp.ci0.size() != mi) {
    res.message = "inconsistent problem dimensions";
    return res;
  }
  if (!(tol > 0.0)) {
    res.message = "tolerance must be positive";
    return res;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(qp.G);
  if (llt.info() != Eigen::Success) {
    res.message = "objective matrix is not positive definite";
    return res;
  }

  GiState st;
  st.n = n;
  st.J = llt.matrixL().transpose().solve(Eigen::MatrixXd::Identity(n, n));
  st.R = Eigen::MatrixXd::Zero(n, n);
  st.u = Eigen::VectorXd::Zero(meq + mi + 1);
  st.active.reserve(static_cast<std::size_t>(std::min(n, meq + mi)));

  Eigen::VectorXd x = llt.solve(-qp.g0);
  Eigen::VectorXd d(n), z(n), r(meq + mi + 1), np(n);

  auto compute_step_dirs = [&](const Eigen::VectorXd& normal) {
    d.noalias() = st.J.transpose() * normal;
    if (st.iq < n)
      z.noalias() = st.J.rightCols(n - st.iq) * d.tail(n - st.iq);
    else
      z.setZero();
    for (int i = st.iq - 1; i >= 0; --i) {
      double sum = d[i];
      for (int j = i + 1; j < st.iq; ++j) sum -= st.R(i, j) * r[j];
      r[i] = sum / st.R(i, i);
    }
  };

  // equality phase: force every equality into the active set
  for (int i = 0; i < meq; ++i) {
    np = qp.CE.row(i).transpose();
    compute_step_dirs(np);
    const double slack = np.dot(x) + qp.ce0[i];
    if (z.squaredNorm() <= kMachEps * kMachEps) {
      if (std::abs(slack) > tol) {
        res.status = QpStatus::Infeasible;
        res.message = "dependent inconsistent equality row";
        build_farkas(res, st, r, i, qp);
        res.farkas_value = -std::abs(slack);
        return res;
      }
      continue;  // redundant equality
    }
    const double t2 = -slack / z.dot(np);
    x += t2 * z;
    st.u.head(st.iq) -= t2 * r.head(st.iq);
    st.u[st.iq] = t2;
    st.active.push_back(i);
    if (!add_constraint(st, d)) {
      st.active.pop_back();
      res.message = "equality basis became degenerate";
      return res;
    }
  }

  const long max_iter = 100L * (n + meq + mi + 10);
  long iter = 0;
  std::vector<char> excluded(static_cast<std::size_t>(mi), 0);
  std::vector<char> in_active(static_cast<std::size_t>(mi), 0);
  Eigen::VectorXd s(std::max(mi, 1));

  auto pick_violated = [&]() -> int {
    std::fill(in_active.begin(), in_active.end(), 0);
    for (int i = meq; i < st.iq; ++i)
      in_active[static_cast<std::size_t>(st.active[static_cast<std::size_t>(i)] - meq)] = 1;
    int ip = -1;
    double worst = -tol;
    for (int i = 0; i < mi; ++i) {
      if (in_active[static_cast<std::size_t>(i)] || excluded[static_cast<std::size_t>(i)])
        continue;
      if (s[i] < worst) {
        worst = s[i];
        ip = i;
      }
    }
    return ip;
  };

  while (true) {
    if (++iter > max_iter) {
      res.message = "iteration limit exceeded";
      return res;
    }
    if (mi > 0) s.noalias() = qp.CI * x + qp.ci0;
    std::fill(excluded.begin(), excluded.end(), 0);
    int current = pick_violated();
    if (current < 0) break;  // primal feasible within tol

    st.u[st.iq] = 0.0;
    bool scan_again = false;
    while (!scan_again) {
      if (++iter > max_iter) {
        res.message = "iteration limit exceeded";
        return res;
      }
      np = qp.CI.row(current).transpose();
      compute_step_dirs(np);

      double t1 = kInf;
      int drop = -1;
      for (int k = meq; k < st.iq; ++k) {
        if (r[k] > 0.0 && st.u[k] / r[k] < t1) {
          t1 = st.u[k] / r[k];
          drop = st.active[static_cast<std::size_t>(k)];
        }
      }
      double t2 = kInf;
      if (z.squaredNorm() > kMachEps * kMachEps) t2 = -s[current] / z.dot(np);
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        res.status = QpStatus::Infeasible;
        res.message = "no primal or dual step exists";
        build_farkas(res, st, r, meq + current, qp);
        return res;
      }
      if (t2 >= kInf) {
        // dual-only step: relax the blocking constraint and retry
        st.u.head(st.iq) -= t * r.head(st.iq);
        st.u[st.iq] += t;
        delete_constraint(st, meq, drop);
        continue;
      }
      x += t * z;
      st.u.head(st.iq) -= t * r.head(st.iq);
      st.u[st.iq] += t;
      if (std::abs(t - t2) < kMachEps) {
        st.active.push_back(meq + current);
        if (add_constraint(st, d)) {
          scan_again = true;
          continue;
        }
        // numerically degenerate addition: undo the step; switching to a
        // different candidate is only valid if no dual weight accumulated
        st.active.pop_back();
        x -= t * z;
        st.u.head(st.iq) += t * r.head(st.iq);
        st.u[st.iq] -= t;
        if (std::abs(st.u[st.iq]) > 1e-12 * (1.0 + st.u.head(st.iq + 1).cwiseAbs().maxCoeff())) {
          res.message = "degenerate constraint addition with accumulated dual weight";
          return res;
        }
        excluded[static_cast<std::size_t>(current)] = 1;
        s.noalias() = qp.CI * x + qp.ci0;
        current = pick_violated();
        if (current < 0) {
          scan_again = true;  // nothing else violated; terminate via scan
          continue;
        }
        st.u[st.iq] = 0.0;
        continue;
      }
      // partial step: drop the blocking constraint, keep pursuing current
      delete_constraint(st, meq, drop);
      s[current] = np.dot(x) + qp.ci0[current];
    }
  }

  res.iterations = static_cast<int>(iter);
  PolishOut polished = polish_active_set(qp, llt, st.active);
  Eigen::VectorXd best_x = x;
  Eigen::VectorXd mult = st.u.head(st.iq);
  if (polished.ok) {
    const double v_polish = worst_violation(qp, polished.x);
    const double v_raw = worst_violation(qp, x);
    bool mult_ok = true;
    for (int i = meq; i < static_cast<int>(polished.mult.size()); ++i) {
      if (polished.mult[i] < -tol) mult_ok = false;
    }
    if (mult_ok && v_polish <= std::max(v_raw, tol)) {
      best_x = polished.x;
      mult = polished.mult;
    }
  }

  res.x = best_x;
  res.primal_residual = worst_violation(qp, best_x);
  if (res.primal_residual > 10.0 * tol) {
    res.status = QpStatus::Failure;
    res.message = "primal residual above tolerance after polish";
    return res;
  }

  res.eq_mult = Eigen::VectorXd::Zero(meq);
  res.ineq_mult = Eigen::VectorXd::Zero(mi);
  Eigen::VectorXd grad = qp.G * best_x + qp.g0;
  double comp = 0.0;
  for (int i = 0; i < static_cast<int>(st.active.size()); ++i) {
    const int row = st.active[static_cast<std::size_t>(i)];
    const double m = i < mult.size() ? mult[i] : 0.0;
    if (row < meq) {
      res.eq_mult[row] = m;
      grad -= m * qp.CE.row(row).transpose();
    } else {
      const double lam = std::max(0.0, m);
      res.ineq_mult[row - meq] = lam;
      grad -= lam * qp.CI.row(row - meq).transpose();
      comp = std::max(comp,
                      std::abs(lam * (qp.CI.row(row - meq).dot(best_x) + qp.ci0[row - meq])));
    }
  }
  res.stationarity_residual = grad.cwiseAbs().maxCoeff();
  res.complementarity = comp;
  res.objective = 0.5 * best_x.dot(qp.G * best_x) + qp.g0.dot(best_x);
  res.status = QpStatus::Optimal;
  return res;
}

}  // namespace pevgame

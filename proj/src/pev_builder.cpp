#include "pevgame/pev.hpp"

#include <algorithm>
#include <cmath>

namespace pevgame {

namespace {

std::string slot_label(const char* base, int t) { return std::string(base) + "[" + std::to_string(t) + "]"; }

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void PevParams::validate(int T) const {
  require(T >= 1, "horizon must be at least one slot");
  require(eta > 0.0 && eta <= 1.0, "efficiency must be in (0, 1]");
  require(capacity_kwh > 0.0, "battery capacity must be positive");
  require(x0 >= 0.0 && x0 <= 1.0, "initial SoC outside [0, 1]");
  require(static_cast<int>(x_ref.size()) == T, "x_ref length differs from horizon");
  require(static_cast<int>(mu.size()) == T, "mu length differs from horizon");
  for (double v : x_ref) require(v >= 0.0 && v <= 1.0, "x_ref entry outside [0, 1]");
  for (double v : mu) require(v >= 0.0, "mu entry negative");
  require(rho_plus > 0.0 && rho_minus > 0.0, "degradation weights must be positive");
  require(h_min >= 1 && h_min <= T, "h_min outside {1..T}");
  require(delta_prev == 0 || delta_prev == 1, "delta_prev must be 0 or 1");
}

void GridParams::validate(int T) const {
  require(static_cast<int>(demand.size()) == T, "demand length differs from horizon");
  for (double v : demand) require(v >= 0.0, "demand entry negative");
  require(d_bar > 0.0, "grid capacity must be positive");
  require(v_bar >= 1, "plug count must be at least one");
  require(u_min < 0.0 && u_max > 0.0, "u bounds must straddle zero");
}

AggregateSignals AggregateSignals::rest(const GridParams& grid, int T) {
  AggregateSignals sig;
  sig.price.resize(static_cast<std::size_t>(T));
  sig.reward.resize(static_cast<std::size_t>(T));
  sig.plugs_free.assign(static_cast<std::size_t>(T), grid.v_bar);
  sig.u_lo.resize(static_cast<std::size_t>(T));
  sig.u_hi.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const double d = grid.demand[static_cast<std::size_t>(t)];
    sig.price[static_cast<std::size_t>(t)] = grid.c_price * d;
    sig.reward[static_cast<std::size_t>(t)] = grid.r_bar * d;
    sig.u_lo[static_cast<std::size_t>(t)] = -d;
    sig.u_hi[static_cast<std::size_t>(t)] = grid.d_bar - d;
  }
  return sig;
}

void AggregateSignals::validate(int T, const GridParams& grid) const {
  require(static_cast<int>(price.size()) == T, "price length differs from horizon");
  require(static_cast<int>(reward.size()) == T, "reward length differs from horizon");
  require(static_cast<int>(plugs_free.size()) == T, "plugs_free length differs from horizon");
  require(static_cast<int>(u_lo.size()) == T, "u_lo length differs from horizon");
  require(static_cast<int>(u_hi.size()) == T, "u_hi length differs from horizon");
  for (int v : plugs_free)
    require(v >= 0 && v <= grid.v_bar, "plugs_free entry outside [0, v_bar]");
}

int PlayerVariables::num_vars() const {
  int n = 11 * T;
  for (const auto& bt : beta) n += static_cast<int>(bt.size());
  return n;
}

PlayerProgram build_player_program(const PevParams& pev, const GridParams& grid,
                                   const AggregateSignals& sig, int T,
                                   const BuildOptions& opts) {
  pev.validate(T);
  grid.validate(T);
  sig.validate(T, grid);
  require(opts.pattern_eps > 0.0, "pattern_eps must be positive");
  require(pev.u_prev >= grid.u_min && pev.u_prev <= grid.u_max, "u_prev outside [u_min, u_max]");

  PlayerProgram prog;
  MixedIntegerQP& qp = prog.qp;
  PlayerVariables& v = prog.vars;
  v.T = T;
  v.h_min = pev.h_min;

  auto add_family = [&](std::vector<VarId>& ids, const char* base, auto make_spec) {
    ids.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      VarSpec spec = make_spec(t);
      spec.label = slot_label(base, t);
      const VarId id = qp.add_var(spec);
      ids.push_back(id);
      v.labels.emplace(spec.label, id);
    }
  };
  auto cont = [](double lo, double hi) {
    return [lo, hi](int) { return VarSpec{-1, VarKind::Continuous, lo, hi, {}}; };
  };
  auto binary = [] (int) { return VarSpec{-1, VarKind::Binary, 0.0, 1.0, {}}; };

  add_family(v.u, "u", cont(grid.u_min, grid.u_max));
  add_family(v.x, "x", [&](int t) {
    return VarSpec{-1, VarKind::Continuous,
                   std::max(0.0, pev.x_ref[static_cast<std::size_t>(t)]), 1.0, {}};
  });
  // a driving slot pins the plug variable to zero through its upper bound
  add_family(v.delta, "delta", [&](int t) {
    const double hi = pev.mu[static_cast<std::size_t>(t)] > 0.0 ? 0.0 : 1.0;
    return VarSpec{-1, VarKind::Binary, 0.0, hi, {}};
  });
  add_family(v.delta_c, "delta_c", binary);
  add_family(v.delta_d, "delta_d", binary);
  add_family(v.f, "f", cont(grid.u_min, grid.u_max));
  add_family(v.g, "g", cont(grid.u_min, grid.u_max));
  add_family(v.s, "s", cont(grid.u_min, grid.u_max));
  add_family(v.ell, "ell", cont(grid.u_min, grid.u_max));
  add_family(v.kappa, "kappa", cont(grid.u_min, grid.u_max));
  add_family(v.alpha, "alpha", binary);
  v.beta.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    for (int h = 1; h <= v.h_eff(t); ++h) {
      VarSpec spec{-1, VarKind::Binary, 0.0, 1.0,
                   "beta" + std::to_string(h) + "[" + std::to_string(t) + "]"};
      const VarId id = qp.add_var(spec);
      v.beta[static_cast<std::size_t>(t)].push_back(id);
      v.labels.emplace(spec.label, id);
    }
  }

  const double eps = opts.pattern_eps;
  const LinearExpr one(1.0);

  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const LinearExpr u_t = LinearExpr::variable(v.u[ts]);
    const LinearExpr delta_t = LinearExpr::variable(v.delta[ts]);
    const ExprBounds u_bounds{grid.u_max, grid.u_min};

    // SoC recursion x(t) = x(t-1) + b f(t) - (1 - delta(t)) mu(t)
    {
      LinearExpr row = LinearExpr::variable(v.x[ts]) - LinearExpr::variable(v.f[ts], pev.b()) -
                       LinearExpr::variable(v.delta[ts], pev.mu[ts]);
      double rhs = -pev.mu[ts];
      if (t == 0)
        rhs += pev.x0;
      else
        row -= LinearExpr::variable(v.x[ts - 1]);
      qp.add_constraint(std::move(row), Sense::Eq, rhs, slot_label("soc", t));
    }

    // u(t) in [u_min delta, u_max delta]
    qp.add_constraint(u_t - delta_t * grid.u_max, Sense::Leq, 0.0, slot_label("u_ub", t));
    qp.add_constraint(delta_t * grid.u_min - u_t, Sense::Leq, 0.0, slot_label("u_lb", t));

    // charge / discharge indicators against u(t) and 0
    for (auto& c : pattern_geq(v.delta_c[ts], u_t, 0.0, u_bounds, eps))
      qp.add_constraint(std::move(c));
    for (auto& c : pattern_leq(v.delta_d[ts], u_t, 0.0, u_bounds, eps))
      qp.add_constraint(std::move(c));

    // bilinear auxiliaries
    const LinearExpr not_c = one - LinearExpr::variable(v.delta_c[ts]);
    const LinearExpr not_d = one - LinearExpr::variable(v.delta_d[ts]);
    const LinearExpr u_prev_expr =
        t == 0 ? LinearExpr(pev.u_prev) : LinearExpr::variable(v.u[ts - 1]);
    const ExprBounds prev_bounds =
        t == 0 ? ExprBounds{pev.u_prev, pev.u_prev} : u_bounds;
    for (auto& c : pattern_implies(v.f[ts], u_t, v.delta[ts], u_bounds))
      qp.add_constraint(std::move(c));
    for (auto& c : pattern_implies(v.g[ts], u_t, not_c, u_bounds)) qp.add_constraint(std::move(c));
    for (auto& c : pattern_implies(v.s[ts], u_prev_expr, not_c, prev_bounds))
      qp.add_constraint(std::move(c));
    for (auto& c : pattern_implies(v.ell[ts], u_t, not_d, u_bounds))
      qp.add_constraint(std::move(c));
    for (auto& c : pattern_implies(v.kappa[ts], u_prev_expr, not_d, prev_bounds))
      qp.add_constraint(std::move(c));

    // auxiliaries live in U(t) as well (f's membership coincides with its
    // pattern rows, so it is not repeated)
    for (VarId aux : {v.g[ts], v.s[ts], v.ell[ts], v.kappa[ts]}) {
      const LinearExpr a = LinearExpr::variable(aux);
      qp.add_constraint(a - delta_t * grid.u_max, Sense::Leq, 0.0);
      qp.add_constraint(delta_t * grid.u_min - a, Sense::Leq, 0.0);
    }

    // unplugged iff neither charging nor discharging
    for (auto& c : pattern_and(one - delta_t, LinearExpr::variable(v.delta_c[ts]),
                               LinearExpr::variable(v.delta_d[ts])))
      qp.add_constraint(std::move(c));

    // plug-in edge detector alpha(t) = (1 - delta(t-1)) and delta(t)
    const LinearExpr not_prev =
        t == 0 ? LinearExpr(1.0 - pev.delta_prev) : one - LinearExpr::variable(v.delta[ts - 1]);
    for (auto& c : pattern_and(LinearExpr::variable(v.alpha[ts]), not_prev, delta_t))
      qp.add_constraint(std::move(c));

    // plug-in persistence: beta^h(t) = alpha(t) and delta(t+h), with the
    // horizon-clamped count equality
    const int he = v.h_eff(t);
    if (he >= 1) {
      LinearExpr sum;
      for (int h = 1; h <= he; ++h) {
        const VarId b = v.beta[ts][static_cast<std::size_t>(h - 1)];
        for (auto& c : pattern_and(LinearExpr::variable(b), LinearExpr::variable(v.alpha[ts]),
                                   LinearExpr::variable(v.delta[ts + static_cast<std::size_t>(h)])))
          qp.add_constraint(std::move(c));
        sum += LinearExpr::variable(b);
      }
      sum -= LinearExpr::variable(v.alpha[ts], static_cast<double>(he));
      qp.add_constraint(std::move(sum), Sense::Eq, 0.0, slot_label("persist", t));
    }

    // coupling boxes from the aggregate: grid capacity and free plugs
    qp.add_constraint(u_t, Sense::Leq, sig.u_hi[ts], slot_label("cap_ub", t));
    qp.add_constraint(u_t, Sense::Geq, sig.u_lo[ts], slot_label("cap_lb", t));
    qp.add_constraint(delta_t, Sense::Leq, std::min(1.0, static_cast<double>(sig.plugs_free[ts])),
                      slot_label("plug", t));
  }

  qp.objective() = build_cost(pev, sig, v);
  return prog;
}

QuadraticObjective build_cost(const PevParams& pev, const AggregateSignals& sig,
                              const PlayerVariables& vars) {
  QuadraticObjective obj;
  for (int t = 0; t < vars.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    obj.add_linear(LinearExpr::variable(vars.ell[ts], sig.price[ts]) +
                   LinearExpr::variable(vars.g[ts], sig.reward[ts]));
    obj.add_square(LinearExpr::variable(vars.g[ts]) - LinearExpr::variable(vars.s[ts]),
                   pev.rho_minus);
    obj.add_square(LinearExpr::variable(vars.ell[ts]) - LinearExpr::variable(vars.kappa[ts]),
                   pev.rho_plus);
  }
  return obj;
}

PlayerStrategy PlayerStrategy::rest(const PevParams& pev, int T) {
  PlayerStrategy st;
  const auto n = static_cast<std::size_t>(T);
  st.u.assign(n, 0.0);
  st.f.assign(n, 0.0);
  st.g.assign(n, 0.0);
  st.s.assign(n, 0.0);
  st.ell.assign(n, 0.0);
  st.kappa.assign(n, 0.0);
  st.delta.assign(n, 0);
  st.delta_c.assign(n, 1);
  st.delta_d.assign(n, 1);
  st.alpha.assign(n, 0);
  st.x.resize(n);
  double x = pev.x0;
  for (int t = 0; t < T; ++t) {
    x -= pev.mu[static_cast<std::size_t>(t)];
    st.x[static_cast<std::size_t>(t)] = x;
  }
  st.beta.resize(n);
  for (int t = 0; t < T; ++t) {
    const int he = std::min(pev.h_min, T - 1 - t);
    st.beta[static_cast<std::size_t>(t)].assign(static_cast<std::size_t>(std::max(he, 0)), 0);
  }
  return st;
}

PlayerStrategy pack_strategy(const PlayerProgram& prog, const Assignment& a, double tol) {
  const FeasibilityReport report = prog.qp.check_feasible(a, tol);
  if (!report.feasible) {
    const Violation& v = report.violations.front();
    throw std::invalid_argument(
        "assignment infeasible for player program: first violation kind " +
        std::to_string(static_cast<int>(v.kind)) + " at index " + std::to_string(v.index) +
        " by " + std::to_string(v.amount));
  }
  const PlayerVariables& vars = prog.vars;
  PlayerStrategy st;
  auto take = [&](const std::vector<VarId>& ids, std::vector<double>& out) {
    out.reserve(ids.size());
    for (VarId id : ids) out.push_back(a[static_cast<std::size_t>(id)]);
  };
  auto take_bin = [&](const std::vector<VarId>& ids, std::vector<int>& out) {
    out.reserve(ids.size());
    for (VarId id : ids) out.push_back(a[static_cast<std::size_t>(id)] > 0.5 ? 1 : 0);
  };
  take(vars.u, st.u);
  take(vars.x, st.x);
  take(vars.f, st.f);
  take(vars.g, st.g);
  take(vars.s, st.s);
  take(vars.ell, st.ell);
  take(vars.kappa, st.kappa);
  take_bin(vars.delta, st.delta);
  take_bin(vars.delta_c, st.delta_c);
  take_bin(vars.delta_d, st.delta_d);
  take_bin(vars.alpha, st.alpha);
  st.beta.resize(vars.beta.size());
  for (std::size_t t = 0; t < vars.beta.size(); ++t) take_bin(vars.beta[t], st.beta[t]);
  return st;
}

Assignment unpack_strategy(const PlayerVariables& vars, const PlayerStrategy& strat) {
  Assignment a(static_cast<std::size_t>(vars.num_vars()), 0.0);
  auto put = [&](const std::vector<VarId>& ids, const std::vector<double>& in) {
    for (std::size_t i = 0; i < ids.size(); ++i) a[static_cast<std::size_t>(ids[i])] = in.at(i);
  };
  auto put_bin = [&](const std::vector<VarId>& ids, const std::vector<int>& in) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      a[static_cast<std::size_t>(ids[i])] = static_cast<double>(in.at(i));
  };
  put(vars.u, strat.u);
  put(vars.x, strat.x);
  put(vars.f, strat.f);
  put(vars.g, strat.g);
  put(vars.s, strat.s);
  put(vars.ell, strat.ell);
  put(vars.kappa, strat.kappa);
  put_bin(vars.delta, strat.delta);
  put_bin(vars.delta_c, strat.delta_c);
  put_bin(vars.delta_d, strat.delta_d);
  put_bin(vars.alpha, strat.alpha);
  for (std::size_t t = 0; t < vars.beta.size(); ++t) put_bin(vars.beta[t], strat.beta.at(t));
  return a;
}

}  // namespace pevgame

#include "pevgame/mld_patterns.hpp"

#include <string>

namespace pevgame {

namespace {

void require_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("pattern tolerance eps must be > 0");
}

void require_threshold(double c, const ExprBounds& b) {
  if (b.m > b.M) throw std::invalid_argument("ExprBounds with m > M");
  if (c > b.M || c < b.m) {
    throw DegenerateProposition("threshold " + std::to_string(c) + " outside [" +
                                std::to_string(b.m) + ", " + std::to_string(b.M) +
                                "]: proposition is constant, fix the binary via bounds");
  }
}

}  // namespace

ExprBounds ExprBounds::of(const LinearExpr& f, const MixedIntegerQP& registry) {
  ExprBounds b{f.constant(), f.constant()};
  for (const auto& [v, c] : f.coeffs()) {
    const VarSpec& spec = registry.var(v);
    if (c >= 0.0) {
      b.M += c * spec.upper;
      b.m += c * spec.lower;
    } else {
      b.M += c * spec.lower;
      b.m += c * spec.upper;
    }
  }
  return b;
}

std::array<LinearConstraint, 2> pattern_geq(VarId delta, const LinearExpr& f, double c,
                                            const ExprBounds& b, double eps) {
  require_eps(eps);
  require_threshold(c, b);
  // (c - m) delta <= f - m
  LinearExpr r1 = LinearExpr::variable(delta, c - b.m) - f;
  // (M - c + eps) delta >= f - c + eps
  LinearExpr r2 = LinearExpr::variable(delta, b.M - c + eps) - f;
  return {LinearConstraint(std::move(r1), Sense::Leq, -b.m),
          LinearConstraint(std::move(r2), Sense::Geq, eps - c)};
}

std::array<LinearConstraint, 2> pattern_leq(VarId delta, const LinearExpr& f, double c,
                                            const ExprBounds& b, double eps) {
  require_eps(eps);
  require_threshold(c, b);
  // (M - c) delta <= M - f
  LinearExpr r1 = LinearExpr::variable(delta, b.M - c) + f;
  // (c + eps - m) delta >= eps + c - f
  LinearExpr r2 = LinearExpr::variable(delta, c + eps - b.m) + f;
  return {LinearConstraint(std::move(r1), Sense::Leq, b.M),
          LinearConstraint(std::move(r2), Sense::Geq, eps + c)};
}

std::array<LinearConstraint, 3> pattern_and(const LinearExpr& delta, const LinearExpr& sigma,
                                            const LinearExpr& gamma) {
  LinearExpr r1 = delta - sigma;
  LinearExpr r2 = delta - gamma;
  LinearExpr r3 = sigma + gamma - delta;
  return {LinearConstraint(std::move(r1), Sense::Leq, 0.0),
          LinearConstraint(std::move(r2), Sense::Leq, 0.0),
          LinearConstraint(std::move(r3), Sense::Leq, 1.0)};
}

std::array<LinearConstraint, 3> pattern_and(VarId delta, VarId sigma, VarId gamma) {
  return pattern_and(LinearExpr::variable(delta), LinearExpr::variable(sigma),
                     LinearExpr::variable(gamma));
}

std::array<LinearConstraint, 4> pattern_implies(VarId g, const LinearExpr& f,
                                                const LinearExpr& ind, const ExprBounds& b) {
  if (b.m > b.M) throw std::invalid_argument("ExprBounds with m > M");
  const LinearExpr gv = LinearExpr::variable(g);
  // m ind <= g <= M ind
  LinearExpr r1 = ind * b.m - gv;
  LinearExpr r2 = gv - ind * b.M;
  // -M (1 - ind) <= g - f <= -m (1 - ind)
  LinearExpr r3 = f - gv + ind * b.M;  // <= M
  LinearExpr r4 = gv - f - ind * b.m;  // <= -m
  return {LinearConstraint(std::move(r1), Sense::Leq, 0.0),
          LinearConstraint(std::move(r2), Sense::Leq, 0.0),
          LinearConstraint(std::move(r3), Sense::Leq, b.M),
          LinearConstraint(std::move(r4), Sense::Leq, -b.m)};
}

std::array<LinearConstraint, 4> pattern_implies(VarId g, const LinearExpr& f, VarId delta,
                                                const ExprBounds& b) {
  return pattern_implies(g, f, LinearExpr::variable(delta), b);
}

}  // namespace pevgame

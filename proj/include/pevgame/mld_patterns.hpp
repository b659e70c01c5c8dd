#pragma once

#include <array>

#include "pevgame/qp_model.hpp"

namespace pevgame {

/// Extreme values of a linear form over the box of its variables,
/// computed by interval arithmetic (exact for linear forms).
struct ExprBounds {
  double M = 0.0;  // max of f over the box
  double m = 0.0;  // min of f over the box

  static ExprBounds of(const LinearExpr& f, const MixedIntegerQP& registry);
};

/// Thrown when the proposition compares f against a threshold outside
/// [m, M]: the proposition is constant and the binary should be fixed by a
/// bound instead of encoded.
class DegenerateProposition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mixed-integer inequality families encoding logical propositions over a
// linear form f with box extremes b = {M, m}. The eps band makes the "else"
// branch strict: for the geq family, delta = 1 <=> f >= c while delta = 0
// forces f <= c - eps.

/// [delta = 1] <=> [f >= c]
std::array<LinearConstraint, 2> pattern_geq(VarId delta, const LinearExpr& f, double c,
                                            const ExprBounds& b, double eps);

/// [delta = 1] <=> [f <= c]
std::array<LinearConstraint, 2> pattern_leq(VarId delta, const LinearExpr& f, double c,
                                            const ExprBounds& b, double eps);

/// [delta = 1] <=> [sigma = 1] and [gamma = 1]; arguments are binary-valued
/// linear expressions so complements like (1 - delta) can be passed directly.
std::array<LinearConstraint, 3> pattern_and(const LinearExpr& delta, const LinearExpr& sigma,
                                            const LinearExpr& gamma);
std::array<LinearConstraint, 3> pattern_and(VarId delta, VarId sigma, VarId gamma);

/// [ind = 0] => [g = 0] and [ind = 1] => [g = f]; linearizes the bilinear
/// product g = f * ind. The indicator is a binary-valued linear expression.
std::array<LinearConstraint, 4> pattern_implies(VarId g, const LinearExpr& f,
                                                const LinearExpr& ind, const ExprBounds& b);
std::array<LinearConstraint, 4> pattern_implies(VarId g, const LinearExpr& f, VarId delta,
                                                const ExprBounds& b);

}  // namespace pevgame

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pevgame {

using VarId = std::int32_t;

enum class VarKind { Continuous, Binary };

struct VarSpec {
  VarId id = -1;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  std::string label;
};

/// Sparse linear form sum(coeff[v] * x[v]) + constant. Zero coefficients are
/// never stored, so two expressions are equal iff their maps are equal.
class LinearExpr {
 public:
  LinearExpr() = default;
  explicit LinearExpr(double constant) : constant_(constant) {}

  static LinearExpr variable(VarId v, double coeff = 1.0) {
    LinearExpr e;
    e.add_term(v, coeff);
    return e;
  }

  LinearExpr& add_term(VarId v, double coeff);
  LinearExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(double scale);

  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator*(LinearExpr a, double s) { return a *= s; }
  friend LinearExpr operator*(double s, LinearExpr a) { return a *= s; }

  const std::map<VarId, double>& coeffs() const { return coeffs_; }
  double constant() const { return constant_; }
  bool empty() const { return coeffs_.empty(); }

  double eval(const std::vector<double>& assignment) const;

 private:
  std::map<VarId, double> coeffs_;
  double constant_ = 0.0;
};

enum class Sense { Leq, Eq, Geq };

/// Stored with the expression's constant folded into rhs, so expr.constant()
/// is always zero here.
struct LinearConstraint {
  LinearExpr expr;
  Sense sense = Sense::Leq;
  double rhs = 0.0;
  std::string label;

  LinearConstraint() = default;
  LinearConstraint(LinearExpr e, Sense s, double r, std::string lbl = {});

  // signed violation: positive means the row is violated by that amount
  double violation(const std::vector<double>& assignment) const;
};

/// Convex quadratic objective. Pair coefficients are stored once per
/// unordered pair (i <= j) with full monomial weight: eval sums
/// q_ij * x_i * x_j over stored entries (x_i^2 terms on the diagonal).
/// add_symmetric() converts from symmetric-matrix convention (off-diagonal
/// entries counted twice in z' Q z).
class QuadraticObjective {
 public:
  QuadraticObjective& add_pair(VarId i, VarId j, double w);
  QuadraticObjective& add_symmetric(VarId i, VarId j, double q) {
    return add_pair(i, j, i == j ? q : 2.0 * q);
  }
  /// Adds w * (expr)^2, expanded into pair and linear terms.
  QuadraticObjective& add_square(const LinearExpr& expr, double w);
  QuadraticObjective& add_linear(const LinearExpr& expr);

  const std::map<std::pair<VarId, VarId>, double>& pairs() const { return quad_; }
  const LinearExpr& linear() const { return linear_; }

  double eval(const std::vector<double>& assignment) const;
  bool is_zero() const { return quad_.empty() && linear_.empty() && linear_.constant() == 0.0; }

 private:
  std::map<std::pair<VarId, VarId>, double> quad_;
  LinearExpr linear_;
};

using Assignment = std::vector<double>;

struct Violation {
  enum class Kind { LowerBound, UpperBound, Integrality, Row } kind;
  int index;      // variable id or constraint index
  double amount;  // violation magnitude, > tol
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

/// Registry of decision variables plus linear constraints and a quadratic
/// objective. Immutable once built; shared read-only by solver code.
class MixedIntegerQP {
 public:
  VarId add_var(VarSpec spec);
  VarId add_continuous(double lower, double upper, std::string label = {});
  VarId add_binary(std::string label = {});

  void add_constraint(LinearConstraint c);
  void add_constraint(LinearExpr expr, Sense sense, double rhs, std::string label = {}) {
    add_constraint(LinearConstraint(std::move(expr), sense, rhs, std::move(label)));
  }

  QuadraticObjective& objective() { return objective_; }
  const QuadraticObjective& objective() const { return objective_; }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  const VarSpec& var(VarId id) const { return vars_.at(static_cast<std::size_t>(id)); }
  const std::vector<VarSpec>& vars() const { return vars_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  std::vector<VarId> binary_ids() const;

  FeasibilityReport check_feasible(const Assignment& a, double tol = 1e-6) const;

 private:
  std::vector<VarSpec> vars_;
  std::vector<LinearConstraint> constraints_;
  QuadraticObjective objective_;
};

double eval_expr(const LinearExpr& expr, const Assignment& a);
double eval_objective(const QuadraticObjective& obj, const Assignment& a);

}  // namespace pevgame

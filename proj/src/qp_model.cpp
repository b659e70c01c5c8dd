#include "pevgame/qp_model.hpp"

#include <cmath>
#include <cstdlib>

namespace pevgame {

namespace {
constexpr double kDropTol = 0.0;  // exact zero only; keep stored coefficients canonical

void check_var_in_range(VarId v, std::size_t n) {
  if (v < 0 || static_cast<std::size_t>(v) >= n) {
    throw std::out_of_range("variable id " + std::to_string(v) + " outside registry of size " +
                            std::to_string(n));
  }
}
}  // namespace

LinearExpr& LinearExpr::add_term(VarId v, double coeff) {
  if (v < 0) throw std::invalid_argument("negative variable id in expression");
  auto it = coeffs_.find(v);
  if (it == coeffs_.end()) {
    if (coeff != kDropTol) coeffs_.emplace(v, coeff);
  } else {
    it->second += coeff;
    if (it->second == kDropTol) coeffs_.erase(it);
  }
  return *this;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  for (const auto& [v, c] : other.coeffs_) add_term(v, c);
  constant_ += other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  for (const auto& [v, c] : other.coeffs_) add_term(v, -c);
  constant_ -= other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double scale) {
  if (scale == 0.0) {
    coeffs_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& [v, c] : coeffs_) c *= scale;
  constant_ *= scale;
  return *this;
}

double LinearExpr::eval(const std::vector<double>& assignment) const {
  double acc = constant_;
  for (const auto& [v, c] : coeffs_) {
    check_var_in_range(v, assignment.size());
    acc += c * assignment[static_cast<std::size_t>(v)];
  }
  return acc;
}

LinearConstraint::LinearConstraint(LinearExpr e, Sense s, double r, std::string lbl)
    : expr(std::move(e)), sense(s), rhs(r), label(std::move(lbl)) {
  rhs -= expr.constant();
  expr.add_constant(-expr.constant());
}

double LinearConstraint::violation(const std::vector<double>& assignment) const {
  const double lhs = expr.eval(assignment);
  switch (sense) {
    case Sense::Leq:
      return lhs - rhs;
    case Sense::Geq:
      return rhs - lhs;
    case Sense::Eq:
      return std::abs(lhs - rhs);
  }
  return 0.0;
}

QuadraticObjective& QuadraticObjective::add_pair(VarId i, VarId j, double w) {
  if (i < 0 || j < 0) throw std::invalid_argument("negative variable id in objective");
  if (w == 0.0) return *this;
  auto key = i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
  auto it = quad_.find(key);
  if (it == quad_.end()) {
    quad_.emplace(key, w);
  } else {
    it->second += w;
    if (it->second == 0.0) quad_.erase(it);
  }
  return *this;
}

QuadraticObjective& QuadraticObjective::add_square(const LinearExpr& expr, double w) {
  if (w == 0.0) return *this;
  const auto& cs = expr.coeffs();
  for (auto a = cs.begin(); a != cs.end(); ++a) {
    add_pair(a->first, a->first, w * a->second * a->second);
    auto b = a;
    for (++b; b != cs.end(); ++b) add_pair(a->first, b->first, 2.0 * w * a->second * b->second);
  }
  if (expr.constant() != 0.0) {
    LinearExpr cross;
    for (const auto& [v, c] : cs) cross.add_term(v, 2.0 * w * expr.constant() * c);
    cross.add_constant(w * expr.constant() * expr.constant());
    linear_ += cross;
  }
  return *this;
}

QuadraticObjective& QuadraticObjective::add_linear(const LinearExpr& expr) {
  linear_ += expr;
  return *this;
}

double QuadraticObjective::eval(const std::vector<double>& assignment) const {
  double acc = linear_.eval(assignment);
  for (const auto& [key, w] : quad_) {
    check_var_in_range(key.first, assignment.size());
    check_var_in_range(key.second, assignment.size());
    acc += w * assignment[static_cast<std::size_t>(key.first)] *
           assignment[static_cast<std::size_t>(key.second)];
  }
  return acc;
}

VarId MixedIntegerQP::add_var(VarSpec spec) {
  if (spec.lower > spec.upper) {
    throw std::invalid_argument("variable '" + spec.label + "': lower bound " +
                                std::to_string(spec.lower) + " exceeds upper bound " +
                                std::to_string(spec.upper));
  }
  if (spec.kind == VarKind::Binary && (spec.lower < 0.0 || spec.upper > 1.0)) {
    throw std::invalid_argument("binary variable '" + spec.label + "' must live in [0, 1]");
  }
  spec.id = static_cast<VarId>(vars_.size());
  vars_.push_back(std::move(spec));
  return vars_.back().id;
}

VarId MixedIntegerQP::add_continuous(double lower, double upper, std::string label) {
  return add_var({-1, VarKind::Continuous, lower, upper, std::move(label)});
}

VarId MixedIntegerQP::add_binary(std::string label) {
  return add_var({-1, VarKind::Binary, 0.0, 1.0, std::move(label)});
}

void MixedIntegerQP::add_constraint(LinearConstraint c) {
  for (const auto& [v, coeff] : c.expr.coeffs()) check_var_in_range(v, vars_.size());
  constraints_.push_back(std::move(c));
}

std::vector<VarId> MixedIntegerQP::binary_ids() const {
  std::vector<VarId> out;
  for (const auto& v : vars_)
    if (v.kind == VarKind::Binary) out.push_back(v.id);
  return out;
}

FeasibilityReport MixedIntegerQP::check_feasible(const Assignment& a, double tol) const {
  if (tol < 0.0) throw std::invalid_argument("feasibility tolerance must be nonnegative");
  if (a.size() != vars_.size()) {
    throw std::invalid_argument("assignment length " + std::to_string(a.size()) +
                                " does not match registry size " + std::to_string(vars_.size()));
  }
  FeasibilityReport report;
  for (const auto& v : vars_) {
    const double x = a[static_cast<std::size_t>(v.id)];
    if (v.lower - x > tol)
      report.violations.push_back({Violation::Kind::LowerBound, v.id, v.lower - x});
    if (x - v.upper > tol)
      report.violations.push_back({Violation::Kind::UpperBound, v.id, x - v.upper});
    if (v.kind == VarKind::Binary) {
      const double frac = std::min(std::abs(x), std::abs(x - 1.0));
      if (frac > tol) report.violations.push_back({Violation::Kind::Integrality, v.id, frac});
    }
  }
  for (std::size_t r = 0; r < constraints_.size(); ++r) {
    const double viol = constraints_[r].violation(a);
    if (viol > tol)
      report.violations.push_back({Violation::Kind::Row, static_cast<int>(r), viol});
  }
  report.feasible = report.violations.empty();
  return report;
}

double eval_expr(const LinearExpr& expr, const Assignment& a) { return expr.eval(a); }

double eval_objective(const QuadraticObjective& obj, const Assignment& a) { return obj.eval(a); }

}  // namespace pevgame

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "formlab/chart.hpp"
#include "formlab/scalar.hpp"

namespace formlab {

using IndexTuple = std::vector<int>;

// Degree-p alternating form: strictly increasing index tuples mapped to
// normalized coefficients; provably-zero coefficients are pruned.
class Form {
 public:
  Form(ChartPtr chart, int degree);

  static Form scalar(ChartPtr chart, Expr value);  // degree 0
  static Form coordinate_differential(ChartPtr chart, const std::string& coord);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<IndexTuple, Expr>& terms() const { return terms_; }

  // Accumulates coeff * dx^{idx}; idx may be unsorted (sign adjusted),
  // duplicates annihilate.
  void add_term(IndexTuple idx, Expr coeff);

  Expr coeff(const IndexTuple& idx) const;  // zero when absent
  bool empty() const { return terms_.empty(); }

  bool same(const Form& o) const;

 private:
  ChartPtr chart_;
  int degree_;
  std::map<IndexTuple, Expr> terms_;
};

Form operator+(const Form& a, const Form& b);
Form operator-(const Form& a, const Form& b);
Form operator*(const Expr& s, const Form& w);

Form wedge(const Form& a, const Form& b);

Form exterior_derivative(const Form& w);

// Antisymmetric commutator matrix of a 1-form, Eq.-(15)/(18) style:
// K_ab = dA_b/dx^a - dA_a/dx^b + (Gamma^s_ba - Gamma^s_ab) A_s.
struct Commutator1 {
  ChartPtr chart;
  std::vector<std::vector<Expr>> k;

  const Expr& at(std::size_t a, std::size_t b) const { return k[a][b]; }
};

Commutator1 commutator_1form(const Form& w, const Connection* conn = nullptr);

struct ClosureResult {
  ZeroVerdict verdict;
  std::optional<Form> residual_form;        // d(w), when no connection route
  std::optional<Commutator1> residual_comm; // 1-form with connection
};

ClosureResult is_closed(const Form& w, const Connection* conn = nullptr);

// Primitive P with d(P) = w for closed w. Degree 1 uses iterated
// line integration (rational+log table); degree >= 2 uses the Poincare
// homotopy operator on polynomial coefficients.
Form potential(const Form& w);

// Diagonal-metric Hodge dual; diag defaults to all ones (Euclidean).
Form hodge_star(const Form& w, const std::vector<Expr>& diag = {});

// coordinate_map[i] expresses source coordinate i in target-chart symbols.
Form pullback(const Form& w, ChartPtr target,
              const std::vector<Expr>& coordinate_map);

// Pullback along the inclusion of the constraint surface {coord = expr}.
Form restrict_to_pseudostructure(
    const Form& w,
    const std::vector<std::pair<std::string, Expr>>& constraints);

std::string to_string(const Form& w);
std::string basis_label(const Chart& chart, const IndexTuple& idx);

ZeroVerdict combine_verdicts(ZeroVerdict a, ZeroVerdict b);

}  // namespace formlab

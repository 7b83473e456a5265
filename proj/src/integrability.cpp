#include "formlab/integrability.hpp"

namespace formlab {

Relation classify_relation(const std::string& psi_label, const Form& w,
                           const Connection* conn) {
  Relation r{psi_label, w, RelationStatus::Nonidentical, {}, {}, {}, false};
  ClosureResult cl = is_closed(w, conn);
  if (cl.verdict == ZeroVerdict::Zero) {
    if (w.degree() == 0) {
      r.status = RelationStatus::Identical;
      return r;
    }
    try {
      r.potential = potential(w);
      r.status = RelationStatus::Identical;
      return r;
    } catch (const UnsupportedCoefficient&) {
      // Closed but outside the integrable fragment: keep it nonidentical
      // and flag the verdict as unproven rather than guessing a potential.
      r.unproven = true;
    }
  } else if (cl.verdict == ZeroVerdict::Unknown) {
    r.unproven = true;
  }
  r.residual_form = std::move(cl.residual_form);
  r.residual_comm = std::move(cl.residual_comm);
  return r;
}

FrobeniusResult frobenius_test(const Form& w) {
  if (w.degree() != 1) throw DegreeError("frobenius_test requires a 1-form");
  std::size_t n = w.chart()->dim();
  if (n <= 2)
    return {Form(w.chart(), 3), ZeroVerdict::Zero};
  Form product = wedge(w, exterior_derivative(w));
  ZeroVerdict v = ZeroVerdict::Zero;
  for (const auto& [idx, c] : product.terms())
    v = combine_verdicts(v, is_zero(c));
  return {std::move(product), v};
}

IntegratingFactor find_integrating_factor(const Form& w) {
  if (w.degree() != 1)
    throw DegreeError("integrating factor search requires a 1-form");
  const Chart& chart = *w.chart();
  if (chart.dim() != 2)
    throw DomainError("integrating factor search requires a 2D chart");
  const std::string& x1 = chart.coords()[0];
  const std::string& x2 = chart.coords()[1];
  Expr m = w.coeff({0});
  Expr n = w.coeff({1});

  auto finish = [&](Expr mu) -> IntegratingFactor {
    Form scaled = mu * w;
    if (is_closed(scaled).verdict != ZeroVerdict::Zero)
      throw NotFound("candidate factor does not close the form");
    Form p = potential(scaled);
    return {std::move(mu), p.coeff({})};
  };

  if (is_closed(w).verdict == ZeroVerdict::Zero)
    return finish(Expr::integer(1));

  // mu = mu(x1): (dM/dx2 - dN/dx1)/N must be free of x2.
  if (!n.is_zero_literal()) {
    Expr g = (differentiate(m, x2) - differentiate(n, x1)) / n;
    if (!depends_on(g, x2)) {
      try {
        return finish(fn(BuiltinFn::Exp, antiderivative(g, x1)));
      } catch (const UnsupportedCoefficient&) {
      } catch (const NotFound&) {
      }
    }
  }
  // mu = mu(x2): (dN/dx1 - dM/dx2)/M must be free of x1.
  if (!m.is_zero_literal()) {
    Expr g = (differentiate(n, x1) - differentiate(m, x2)) / m;
    if (!depends_on(g, x1)) {
      try {
        return finish(fn(BuiltinFn::Exp, antiderivative(g, x2)));
      } catch (const UnsupportedCoefficient&) {
      } catch (const NotFound&) {
      }
    }
  }
  throw NotFound("single-variable ansatz ladder exhausted");
}

DescentStep degree_descent(
    const Relation& r,
    const std::vector<std::pair<std::string, Expr>>& constraints) {
  std::string next_label = r.lhs_label + "'";
  if (r.status == RelationStatus::Identical) {
    // Degenerate case: already closed on the whole chart; descend from the
    // existing potential without restricting.
    if (!r.potential)
      throw DegreeError("cannot descend below degree 0");
    DescentStep step{r, classify_relation(next_label, *r.potential)};
    return step;
  }
  Form restricted = restrict_to_pseudostructure(r.rhs, constraints);
  ClosureResult cl = is_closed(restricted);
  if (cl.verdict != ZeroVerdict::Zero)
    throw NotClosedOnPseudostructure(
        "restricted form is not provably closed: residual " +
        to_string(*cl.residual_form));
  Form p = potential(restricted);
  Relation on_pi{r.lhs_label, restricted, RelationStatus::Identical,
                 p,          {},         {},
                 false};
  DescentStep step{std::move(on_pi), classify_relation(next_label, p)};
  return step;
}

}  // namespace formlab

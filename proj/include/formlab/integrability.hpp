#pragma once

#include <optional>
#include <string>
#include <vector>

#include "formlab/form.hpp"

namespace formlab {

enum class RelationStatus { Identical, Nonidentical };

// Evolutionary relation d(psi) ~ rhs: Identical when rhs is provably closed
// and a potential exists, otherwise Nonidentical with the residual kept.
struct Relation {
  std::string lhs_label;
  Form rhs;
  RelationStatus status;
  std::optional<Form> potential;            // Identical
  std::optional<Form> residual_form;        // Nonidentical, no connection
  std::optional<Commutator1> residual_comm; // Nonidentical with connection
  bool unproven = false;  // closure verdict was Unknown (or potential failed)
};

Relation classify_relation(const std::string& psi_label, const Form& w,
                           const Connection* conn = nullptr);

struct FrobeniusResult {
  Form product;  // w ^ dw (degree 3); empty on charts with n <= 2
  ZeroVerdict verdict;
};

// Zero verdict means an integrating factor exists locally.
FrobeniusResult frobenius_test(const Form& w);

struct IntegratingFactor {
  Expr mu;
  Expr potential;  // 0-form potential of mu * w
};

// Single-variable ansatz ladder mu(x1) then mu(x2) for a 1-form on a 2D
// chart. Success guarantees d(mu * w) = 0; throws NotFound otherwise.
IntegratingFactor find_integrating_factor(const Form& w);

struct DescentStep {
  Relation identical_on_pi;  // restricted relation with its potential
  Relation next;             // d(psi^{p-1}) ~ potential, reclassified
};

// Restricts a nonidentical relation to the pseudostructure given by the
// constraints, integrates there, and forms the next lower-degree relation.
DescentStep degree_descent(
    const Relation& r,
    const std::vector<std::pair<std::string, Expr>>& constraints);

}  // namespace formlab

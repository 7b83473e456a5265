#pragma once

#include <string>
#include <vector>

#include "formlab/scalar.hpp"

namespace formlab {

// F(x^i, u, p_i) = 0 with p_i standing for du/dx^i.
struct FirstOrderPDE {
  std::vector<std::string> space_vars;
  std::string unknown;
  std::vector<std::string> momenta;  // derived, one per space var
  Expr f;

  static FirstOrderPDE make(std::vector<std::string> space_vars,
                            std::string unknown, Expr f);
};

struct CharacteristicSystem {
  std::vector<std::string> space_vars;
  std::vector<std::string> momenta;
  std::string unknown;
  std::string param;     // bound to s during integration; empty if unused
  std::vector<Expr> dx;  // dx^i/ds
  std::vector<Expr> dp;  // dp_i/ds
  Expr du;               // du/ds
};

// dx^i/ds = dF/dp_i, dp_i/ds = -(dF/dx^i + p_i dF/du),
// du/ds = sum_i p_i dF/dp_i.
CharacteristicSystem characteristic_system(const FirstOrderPDE& pde);

// For du/dt + E(t, x^j, p_j) = 0: dx^j/dt = dE/dp_j, dp_j/dt = -dE/dx^j,
// du/dt = -E + sum_j p_j dE/dp_j. Parameter slot 0 is t itself (dt/dt = 1).
CharacteristicSystem canonical_relations(
    const Expr& e, const std::string& t,
    const std::vector<std::string>& space_vars);

struct TrajectorySample {
  double s;
  std::vector<double> x;
  std::vector<double> p;
  double u;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double step;
  bool singular_point = false;  // all dx^i/ds vanished at some sample
};

struct InitialState {
  std::vector<double> x;
  std::vector<double> p;
  double u = 0.0;
};

// Classical fixed-step RK4; sample count = ceil(s_end/h) + 1.
Trajectory integrate_characteristics(const CharacteristicSystem& sys,
                                     const InitialState& init, double s_end,
                                     double h);

struct VerifyReport {
  double max_f_residual;
  double max_theta_residual;  // per-step |du - sum p_i dx^i|, trapezoidal p
};

VerifyReport verify_along(const FirstOrderPDE& pde, const Trajectory& traj);

// Rectangular 2D grid; either u samples (momenta by central differences)
// or the momentum fields directly.
struct GridField {
  std::vector<double> x1;  // grid lines, strictly increasing, uniform
  std::vector<double> x2;
  std::vector<std::vector<double>> u;   // u[i][j] at (x1[i], x2[j]); may be empty
  std::vector<std::vector<double>> p1;  // used when u is empty
  std::vector<std::vector<double>> p2;
};

struct FunctionalStatus {
  bool is_function;
  double commutator_norm;  // max |dp2/dx1 - dp1/dx2| over interior points
};

FunctionalStatus functional_status(const GridField& field,
                                   double tolerance_scale = 1e-6);

}  // namespace formlab

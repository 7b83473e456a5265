#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "formlab/characteristics.hpp"
#include "test_helpers.hpp"

using namespace formlab;

TEST_CASE("pde setup derives one momentum per space variable") {
  FirstOrderPDE pde =
      FirstOrderPDE::make({"t", "x"}, "u", parse_expr("p_t + p_x^2/2"));
  CHECK(pde.momenta == std::vector<std::string>{"p_t", "p_x"});
  CHECK(pde.unknown == "u");
  CHECK_THROWS_AS(FirstOrderPDE::make({}, "u", parse_expr("1")), DomainError);
  CHECK_THROWS_AS(FirstOrderPDE::make({"x", "x"}, "u", parse_expr("p_x")),
                  DomainError);
  // F must involve at least one momentum
  CHECK_THROWS_AS(
      characteristic_system(FirstOrderPDE::make({"x"}, "u", parse_expr("x"))),
      DegenerateError);
}

TEST_CASE("characteristic system of the eikonal-style flow") {
  FirstOrderPDE pde =
      FirstOrderPDE::make({"t", "x"}, "u", parse_expr("p_t + p_x^2/2"));
  CharacteristicSystem sys = characteristic_system(pde);
  CHECK(sys.dx[0].is_rational(1));                       // dt/ds = dF/dp_t
  CHECK(is_zero(sys.dx[1] - parse_expr("p_x")) == ZeroVerdict::Zero);
  CHECK(sys.dp[0].is_zero_literal());
  CHECK(sys.dp[1].is_zero_literal());
  CHECK(is_zero(sys.du - parse_expr("p_t + p_x^2")) == ZeroVerdict::Zero);
}

TEST_CASE("u-dependence feeds back into the momentum flow") {
  FirstOrderPDE pde = FirstOrderPDE::make({"x"}, "u", parse_expr("p_x - u"));
  CharacteristicSystem sys = characteristic_system(pde);
  // dp/ds = -(dF/dx + p dF/du) = p
  CHECK(is_zero(sys.dp[0] - parse_expr("p_x")) == ZeroVerdict::Zero);
}

TEST_CASE("canonical relations bind the parameter slot") {
  CharacteristicSystem sys = canonical_relations(
      parse_expr("(p_x^2 + x^2)/2"), "t", {"x"});
  CHECK(sys.param == "t");
  CHECK(is_zero(sys.dx[0] - parse_expr("p_x")) == ZeroVerdict::Zero);
  CHECK(is_zero(sys.dp[0] - parse_expr("-x")) == ZeroVerdict::Zero);
  // du/dt = -E + p dE/dp = (p^2 - x^2)/2
  CHECK(is_zero(sys.du - parse_expr("p_x^2/2 - x^2/2")) == ZeroVerdict::Zero);
}

TEST_CASE("canonical relations agree with the general recipe") {
  // F = p_t + E with E = (p_x^2 + x^2)/2; after dividing by dt/ds = 1 the
  // general system reduces to Hamilton's equations plus du/dt.
  Expr e = parse_expr("(p_x^2 + x^2)/2");
  FirstOrderPDE pde = FirstOrderPDE::make({"t", "x"}, "u",
                                          parse_expr("p_t + (p_x^2 + x^2)/2"));
  CharacteristicSystem gen = characteristic_system(pde);
  CharacteristicSystem canon = canonical_relations(e, "t", {"x"});
  CHECK(is_zero(gen.dx[1] - canon.dx[0]) == ZeroVerdict::Zero);
  CHECK(is_zero(gen.dp[1] - canon.dp[0]) == ZeroVerdict::Zero);
  // general du contains p_t; substituting p_t = -E recovers the canonical du
  Expr du_sub = substitute(gen.du, {{"p_t", -e}});
  CHECK(is_zero(du_sub - canon.du) == ZeroVerdict::Zero);
}

TEST_CASE("RK4 integrates polynomial flows to rounding error") {
  // dx/ds = 1, dp/ds = 0, du/ds = p: u(s) = p0 * s exactly
  FirstOrderPDE pde = FirstOrderPDE::make({"x"}, "u", parse_expr("p_x - 3"));
  CharacteristicSystem sys = characteristic_system(pde);
  Trajectory tr = integrate_characteristics(sys, {{0.0}, {3.0}, 0.0}, 1.0, 0.1);
  CHECK(tr.samples.size() == 11);
  const TrajectorySample& last = tr.samples.back();
  CHECK(last.s == doctest::Approx(1.0));
  CHECK(last.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(last.u == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("harmonic oscillator returns after one period") {
  CharacteristicSystem sys = canonical_relations(
      parse_expr("(p_x^2 + x^2)/2"), "t", {"x"});
  double two_pi = 2.0 * std::acos(-1.0);
  Trajectory tr =
      integrate_characteristics(sys, {{1.0}, {0.0}, 0.0}, two_pi, 1e-3);
  const TrajectorySample& last = tr.samples.back();
  CHECK(std::abs(last.x[0] - 1.0) < 1e-8);
  CHECK(std::abs(last.p[0]) < 1e-8);
  // energy stays conserved along the way
  for (const TrajectorySample& s : tr.samples) {
    double e = (s.p[0] * s.p[0] + s.x[0] * s.x[0]) / 2.0;
    CHECK(std::abs(e - 0.5) < 1e-10);
  }
}

TEST_CASE("step halving shows fourth-order convergence") {
  CharacteristicSystem sys = canonical_relations(
      parse_expr("(p_x^2 + x^2)/2"), "t", {"x"});
  double two_pi = 2.0 * std::acos(-1.0);
  auto endpoint_error = [&](double h) {
    Trajectory tr = integrate_characteristics(sys, {{1.0}, {0.0}, 0.0},
                                              two_pi, h);
    const TrajectorySample& last = tr.samples.back();
    return std::hypot(last.x[0] - 1.0, last.p[0]);
  };
  double coarse = endpoint_error(2e-2);
  double fine = endpoint_error(1e-2);
  CHECK(coarse / fine >= 8.0);
}

TEST_CASE("residuals along an exactly-solved flow") {
  FirstOrderPDE pde = FirstOrderPDE::make({"t", "x"}, "u",
                                          parse_expr("p_t + (p_x^2 + x^2)/2"));
  CharacteristicSystem sys = characteristic_system(pde);
  double two_pi = 2.0 * std::acos(-1.0);
  // p_t = -E(0) = -1/2 keeps F = 0 along the flow
  Trajectory tr = integrate_characteristics(sys, {{0.0, 1.0}, {-0.5, 0.0}, 0.0},
                                            two_pi, 1e-3);
  VerifyReport rep = verify_along(pde, tr);
  CHECK(rep.max_f_residual < 1e-8);
  CHECK(rep.max_theta_residual < 1e-8);

  // a perturbed momentum breaks the contact condition measurably
  Trajectory bad = integrate_characteristics(
      sys, {{0.0, 1.0}, {-0.5 + 0.01, 0.0}, 0.0}, 1.0, 1e-3);
  VerifyReport brep = verify_along(pde, bad);
  CHECK(brep.max_f_residual >= 1e-4);
}

TEST_CASE("divergent flows raise a flagged error") {
  FirstOrderPDE pde = FirstOrderPDE::make({"x"}, "u", parse_expr("p_x - x^2"));
  CharacteristicSystem sys = characteristic_system(pde);
  // dx/ds = 1, dp/ds = 2 x p: benign; instead blow up via dp/ds = p^2:
  CharacteristicSystem blow = sys;
  blow.dp[0] = parse_expr("p_x^2");
  CHECK_THROWS_AS(
      integrate_characteristics(blow, {{0.0}, {2.0}, 0.0}, 5.0, 1e-2),
      NonFinite);
}

TEST_CASE("stationary points are flagged, not fatal") {
  CharacteristicSystem sys = canonical_relations(
      parse_expr("(p_x^2 + x^2)/2"), "t", {"x"});
  // x = p = 0 is a fixed point: every spatial velocity vanishes there
  Trajectory tr =
      integrate_characteristics(sys, {{0.0}, {0.0}, 0.0}, 1.0, 0.1);
  CHECK(tr.singular_point);
  Trajectory moving =
      integrate_characteristics(sys, {{0.0}, {1.0}, 0.0}, 1.0, 0.1);
  CHECK(!moving.singular_point);
}

TEST_CASE("functional status of a gradient grid") {
  int n = 101;
  GridField f;
  for (int i = 0; i < n; ++i) f.x1.push_back(i * 0.01);
  for (int j = 0; j < n; ++j) f.x2.push_back(j * 0.01);
  f.u.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.u[std::size_t(i)][std::size_t(j)] = f.x1[std::size_t(i)] * f.x2[std::size_t(j)];
  FunctionalStatus st = functional_status(f);
  CHECK(st.is_function);
  CHECK(st.commutator_norm < 1e-10);
}

TEST_CASE("functional status detects a vortex momentum field") {
  int n = 51;
  GridField f;
  for (int i = 0; i < n; ++i) f.x1.push_back(-1.0 + i * 0.04);
  for (int j = 0; j < n; ++j) f.x2.push_back(-1.0 + j * 0.04);
  f.p1.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
  f.p2.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      f.p1[std::size_t(i)][std::size_t(j)] = -f.x2[std::size_t(j)];
      f.p2[std::size_t(i)][std::size_t(j)] = f.x1[std::size_t(i)];
    }
  FunctionalStatus st = functional_status(f);
  CHECK(!st.is_function);
  CHECK(st.commutator_norm == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("functional status on random polynomial gradients") {
  testing::ExprGen gen(51, {"x", "y"});
  for (int rep = 0; rep < 5; ++rep) {
    Expr u = normalize(gen.polynomial(3));
    Expr px = differentiate(u, "x");
    Expr py = differentiate(u, "y");
    int n = 64;
    GridField f;
    for (int i = 0; i < n; ++i) f.x1.push_back(0.5 + i * 0.01);
    for (int j = 0; j < n; ++j) f.x2.push_back(0.5 + j * 0.01);
    f.p1.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
    f.p2.assign(std::size_t(n), std::vector<double>(std::size_t(n)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::map<std::string, double> at{{"x", f.x1[std::size_t(i)]},
                                         {"y", f.x2[std::size_t(j)]}};
        f.p1[std::size_t(i)][std::size_t(j)] = evaluate_numeric(px, at);
        f.p2[std::size_t(i)][std::size_t(j)] = evaluate_numeric(py, at);
      }
    FunctionalStatus st = functional_status(f);
    CHECK(st.is_function);
  }
}

TEST_CASE("grid validation") {
  GridField bad;
  bad.x1 = {0.0, 1.0};  // fewer than three grid lines
  bad.x2 = {0.0, 0.5, 1.0};
  bad.u = {{0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(functional_status(bad), GridError);
  GridField nonuniform;
  nonuniform.x1 = {0.0, 0.1, 0.3};
  nonuniform.x2 = {0.0, 0.1, 0.2};
  nonuniform.u = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(functional_status(nonuniform), GridError);
  GridField ragged;
  ragged.x1 = {0.0, 0.1, 0.2};
  ragged.x2 = {0.0, 0.1, 0.2};
  ragged.u = {{0, 0, 0}, {0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(functional_status(ragged), GridError);
  GridField empty;
  CHECK_THROWS_AS(functional_status(empty), GridError);
}

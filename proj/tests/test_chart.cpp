#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "formlab/chart.hpp"
#include "test_helpers.hpp"

using namespace formlab;
using formlab::testing::ExprGen;

TEST_CASE("chart construction and lookup") {
  ChartPtr c = make_chart({"T", "V"}, {"R", "c_v"}, {"T", "V"});
  CHECK(c->dim() == 2);
  CHECK(c->coord_index("V") == 1);
  CHECK(c->coord_index("Q") == -1);
  CHECK(c->has_coord("T"));
  CHECK_THROWS_AS(make_chart({}), DomainError);
  CHECK_THROWS_AS(make_chart({"x", "x"}), DomainError);
  CHECK_THROWS_AS(make_chart({"x", "y"}, {"x"}), DomainError);
}

TEST_CASE("metric symmetry is enforced") {
  ChartPtr c = testing::chart_n(2);
  std::vector<std::vector<Expr>> g{
      {Expr::integer(1), Expr::symbol("a")},
      {Expr::integer(0), Expr::integer(1)}};
  CHECK_THROWS_AS(Metric(c, g), MetricError);
  g[1][0] = Expr::symbol("a");
  CHECK_NOTHROW(Metric(c, g));
  Metric euclid(c);
  CHECK(euclid.at(0, 0).is_rational(1));
  CHECK(euclid.at(0, 1).is_zero_literal());
}

TEST_CASE("torsion of a single asymmetric coefficient") {
  ChartPtr c = testing::chart_n(2);
  Connection conn(c);
  conn.set(0, 0, 1, Expr::integer(1));  // Gamma^1_{12} = 1 (1-based reading)
  Tensor3 t = torsion(conn);
  CHECK(t[0][0][1].is_rational(-1));
  CHECK(t[0][1][0].is_rational(1));
  CHECK(t[0][0][0].is_zero_literal());
}

TEST_CASE("torsion and curvature antisymmetries on random connections") {
  ExprGen gen(21);
  ChartPtr c = testing::chart_n(3);
  for (int trial = 0; trial < 10; ++trial) {
    Connection conn(c);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (gen.pick(0, 1))
            conn.set(std::size_t(s), std::size_t(a), std::size_t(b),
                     gen.polynomial(2));
    Tensor3 t = torsion(conn);
    Tensor4 r = riemann(conn);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          CHECK(is_zero(t[std::size_t(s)][std::size_t(a)][std::size_t(b)] +
                        t[std::size_t(s)][std::size_t(b)][std::size_t(a)]) ==
                ZeroVerdict::Zero);
          for (int m = 0; m < 3; ++m)
            CHECK(is_zero(r[std::size_t(m)][std::size_t(s)][std::size_t(a)]
                           [std::size_t(b)] +
                          r[std::size_t(m)][std::size_t(s)][std::size_t(b)]
                           [std::size_t(a)]) == ZeroVerdict::Zero);
        }
  }
}

TEST_CASE("round sphere: Christoffel symbols and curvature") {
  ChartPtr c = make_chart({"theta", "phi"});
  std::vector<std::vector<Expr>> g{
      {Expr::integer(1), Expr::integer(0)},
      {Expr::integer(0), parse_expr("sin(theta)^2")}};
  Metric metric(c, g);
  Connection conn = christoffel(metric);
  CHECK(is_zero(conn.at(0, 1, 1) - parse_expr("-sin(theta)*cos(theta)")) ==
        ZeroVerdict::Zero);
  CHECK(is_zero(conn.at(1, 0, 1) - parse_expr("cos(theta)/sin(theta)")) ==
        ZeroVerdict::Zero);
  Tensor4 r = riemann(conn);
  // R^1_{212} lowered against g_11 = 1 stays sin^2(theta)
  CHECK(is_zero(r[0][1][0][1] - parse_expr("sin(theta)^2")) ==
        ZeroVerdict::Zero);
}

TEST_CASE("flat metrics in curvilinear disguise stay flat") {
  ChartPtr c = make_chart({"r", "phi"}, {}, {"r"});
  std::vector<std::vector<Expr>> g{
      {Expr::integer(1), Expr::integer(0)},
      {Expr::integer(0), parse_expr("r^2")}};
  Metric metric(c, g);
  Connection conn = christoffel(metric);
  Tensor4 rie = riemann(conn);
  for (const auto& a : rie)
    for (const auto& b : a)
      for (const auto& d : b)
        for (const Expr& e : d) CHECK(is_zero(e) == ZeroVerdict::Zero);
}

TEST_CASE("singular metric is rejected") {
  ChartPtr c = testing::chart_n(2);
  std::vector<std::vector<Expr>> g{
      {Expr::integer(1), Expr::integer(1)},
      {Expr::integer(1), Expr::integer(1)}};
  Metric metric(c, g);
  CHECK_THROWS_AS(christoffel(metric), MetricError);
}

TEST_CASE("christoffel connection is torsion-free") {
  ChartPtr c = make_chart({"x", "y"}, {}, {"x", "y"});
  std::vector<std::vector<Expr>> g{
      {parse_expr("1 + x^2"), parse_expr("x*y")},
      {parse_expr("x*y"), parse_expr("1 + y^2")}};
  Metric metric(c, g);
  Connection conn = christoffel(metric);
  Tensor3 t = torsion(conn);
  for (const auto& a : t)
    for (const auto& b : a)
      for (const Expr& e : b) CHECK(is_zero(e) == ZeroVerdict::Zero);
}

TEST_CASE("metric closure report") {
  ChartPtr flat = testing::chart_n(2);
  Metric g(flat);
  Connection lc = christoffel(g);
  MetricClosureReport rep = metric_closure_report(*flat, g, lc);
  CHECK(rep.metric_symmetric == ZeroVerdict::Zero);
  CHECK(rep.torsion_zero == ZeroVerdict::Zero);
  CHECK(rep.curvature_zero == ZeroVerdict::Zero);

  ChartPtr sph = make_chart({"theta", "phi"});
  std::vector<std::vector<Expr>> gs{
      {Expr::integer(1), Expr::integer(0)},
      {Expr::integer(0), parse_expr("sin(theta)^2")}};
  Metric metric(sph, gs);
  Connection conn = christoffel(metric);
  MetricClosureReport rep2 = metric_closure_report(*sph, metric, conn);
  CHECK(rep2.torsion_zero == ZeroVerdict::Zero);
  CHECK(rep2.curvature_zero == ZeroVerdict::NonZero);

  Connection twisted(flat);
  twisted.set(0, 0, 1, Expr::symbol("y"));
  MetricClosureReport rep3 = metric_closure_report(*flat, g, twisted);
  CHECK(rep3.torsion_zero == ZeroVerdict::NonZero);
}

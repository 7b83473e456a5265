#include "formlab/chart.hpp"

#include <algorithm>

namespace formlab {

Chart::Chart(std::vector<std::string> coords, std::set<std::string> params,
             std::set<std::string> positive)
    : coords_(std::move(coords)),
      params_(std::move(params)),
      positive_(std::move(positive)) {
  if (coords_.empty()) throw DomainError("chart needs at least one coordinate");
  std::set<std::string> seen;
  for (const std::string& c : coords_) {
    if (!seen.insert(c).second)
      throw DomainError("duplicate coordinate name: " + c);
    if (params_.count(c))
      throw DomainError("symbol is both coordinate and parameter: " + c);
  }
}

int Chart::coord_index(const std::string& name) const {
  auto it = std::find(coords_.begin(), coords_.end(), name);
  return it == coords_.end() ? -1 : int(it - coords_.begin());
}

ChartPtr make_chart(std::vector<std::string> coords,
                    std::set<std::string> params,
                    std::set<std::string> positive) {
  return std::make_shared<Chart>(std::move(coords), std::move(params),
                                 std::move(positive));
}

Metric::Metric(ChartPtr chart) : chart_(std::move(chart)) {
  std::size_t n = chart_->dim();
  g_.assign(n, std::vector<Expr>(n, Expr::integer(0)));
  for (std::size_t i = 0; i < n; ++i) g_[i][i] = Expr::integer(1);
}

Metric::Metric(ChartPtr chart, std::vector<std::vector<Expr>> g)
    : chart_(std::move(chart)), g_(std::move(g)) {
  std::size_t n = chart_->dim();
  if (g_.size() != n) throw MetricError("metric dimension mismatch");
  for (auto& row : g_) {
    if (row.size() != n) throw MetricError("metric dimension mismatch");
    for (Expr& e : row) e = normalize(e);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (is_zero(g_[i][j] - g_[j][i]) == ZeroVerdict::NonZero)
        throw MetricError("metric is not symmetric at (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
}

Connection::Connection(ChartPtr chart) : chart_(std::move(chart)) {
  std::size_t n = chart_->dim();
  gamma_.assign(n, std::vector<std::vector<Expr>>(
                       n, std::vector<Expr>(n, Expr::integer(0))));
}

Tensor3 torsion(const Connection& c) {
  std::size_t n = c.chart()->dim();
  Tensor3 t(n, std::vector<std::vector<Expr>>(
                   n, std::vector<Expr>(n, Expr::integer(0))));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        t[s][a][b] = c.at(s, b, a) - c.at(s, a, b);
  return t;
}

Tensor4 riemann(const Connection& c) {
  const Chart& chart = *c.chart();
  std::size_t n = chart.dim();
  Tensor4 r(n, Tensor3(n, std::vector<std::vector<Expr>>(
                              n, std::vector<Expr>(n, Expr::integer(0)))));
  for (std::size_t mu = 0; mu < n; ++mu)
    for (std::size_t nu = 0; nu < n; ++nu)
      for (std::size_t rho = 0; rho < n; ++rho)
        for (std::size_t sig = 0; sig < n; ++sig) {
          Expr v = differentiate(c.at(mu, nu, sig), chart.coords()[rho]) -
                   differentiate(c.at(mu, nu, rho), chart.coords()[sig]);
          for (std::size_t lam = 0; lam < n; ++lam) {
            v = v + c.at(mu, lam, rho) * c.at(lam, nu, sig) -
                c.at(mu, lam, sig) * c.at(lam, nu, rho);
          }
          r[mu][nu][rho][sig] = v;
        }
  return r;
}

namespace {

// Symbolic matrix inverse via adjugate; intended for small n.
std::vector<std::vector<Expr>> invert(const std::vector<std::vector<Expr>>& m) {
  std::size_t n = m.size();
  std::function<Expr(const std::vector<std::vector<Expr>>&)> det =
      [&](const std::vector<std::vector<Expr>>& a) -> Expr {
    std::size_t k = a.size();
    if (k == 1) return a[0][0];
    Expr d = Expr::integer(0);
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<std::vector<Expr>> minor;
      for (std::size_t r = 1; r < k; ++r) {
        std::vector<Expr> row;
        for (std::size_t c2 = 0; c2 < k; ++c2)
          if (c2 != j) row.push_back(a[r][c2]);
        minor.push_back(std::move(row));
      }
      Expr cof = Expr::integer(j % 2 == 0 ? 1 : -1) * a[0][j] * det(minor);
      d = d + cof;
    }
    return d;
  };
  Expr d = det(m);
  if (is_zero(d) == ZeroVerdict::Zero)
    throw MetricError("metric is singular");
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::vector<Expr>> minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Expr> row;
        for (std::size_t c2 = 0; c2 < n; ++c2)
          if (c2 != j) row.push_back(m[r][c2]);
        minor.push_back(std::move(row));
      }
      Expr cof = n == 1 ? Expr::integer(1) : det(minor);
      if ((i + j) % 2 == 1) cof = -cof;
      inv[j][i] = cof / d;  // adjugate transposes
    }
  return inv;
}

}  // namespace

Connection christoffel(const Metric& g) {
  ChartPtr chart = g.chart();
  std::size_t n = chart->dim();
  std::vector<std::vector<Expr>> mat(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mat[i][j] = g.at(i, j);
  auto ginv = invert(mat);
  Connection c(chart);
  Expr half = Expr::rational(1, 2);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        Expr v = Expr::integer(0);
        for (std::size_t lam = 0; lam < n; ++lam) {
          Expr term = differentiate(g.at(lam, b), chart->coords()[a]) +
                      differentiate(g.at(lam, a), chart->coords()[b]) -
                      differentiate(g.at(a, b), chart->coords()[lam]);
          v = v + ginv[s][lam] * term;
        }
        c.set(s, a, b, half * v);
      }
  return c;
}

namespace {

ZeroVerdict combine(ZeroVerdict a, ZeroVerdict b) {
  if (a == ZeroVerdict::NonZero || b == ZeroVerdict::NonZero)
    return ZeroVerdict::NonZero;
  if (a == ZeroVerdict::Unknown || b == ZeroVerdict::Unknown)
    return ZeroVerdict::Unknown;
  return ZeroVerdict::Zero;
}

}  // namespace

MetricClosureReport metric_closure_report(const Chart& chart, const Metric& g,
                                          const Connection& c) {
  std::size_t n = chart.dim();
  MetricClosureReport rep{ZeroVerdict::Zero, ZeroVerdict::Zero,
                          ZeroVerdict::Zero};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      rep.metric_symmetric =
          combine(rep.metric_symmetric, is_zero(g.at(i, j) - g.at(j, i)));
  Tensor3 t = torsion(c);
  for (auto& p : t)
    for (auto& row : p)
      for (Expr& e : row) rep.torsion_zero = combine(rep.torsion_zero, is_zero(e));
  Tensor4 r = riemann(c);
  for (auto& cube : r)
    for (auto& p : cube)
      for (auto& row : p)
        for (Expr& e : row)
          rep.curvature_zero = combine(rep.curvature_zero, is_zero(e));
  return rep;
}

}  // namespace formlab

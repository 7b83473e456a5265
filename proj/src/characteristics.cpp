#include "formlab/characteristics.hpp"

#include <cmath>
#include <set>

namespace formlab {

FirstOrderPDE FirstOrderPDE::make(std::vector<std::string> space_vars,
                                  std::string unknown, Expr f) {
  FirstOrderPDE pde;
  pde.space_vars = std::move(space_vars);
  pde.unknown = std::move(unknown);
  if (pde.space_vars.empty())
    throw DomainError("PDE needs at least one space variable");
  std::set<std::string> seen;
  for (const std::string& v : pde.space_vars)
    if (!seen.insert(v).second)
      throw DomainError("duplicate space variable: " + v);
  if (seen.count(pde.unknown))
    throw DomainError("unknown collides with a space variable");
  for (const std::string& v : pde.space_vars)
    pde.momenta.push_back("p_" + v);
  pde.f = normalize(f);
  return pde;
}

CharacteristicSystem characteristic_system(const FirstOrderPDE& pde) {
  CharacteristicSystem sys;
  sys.space_vars = pde.space_vars;
  sys.momenta = pde.momenta;
  sys.unknown = pde.unknown;
  Expr fu = differentiate(pde.f, pde.unknown);
  bool any = false;
  sys.du = Expr::integer(0);
  for (std::size_t i = 0; i < pde.space_vars.size(); ++i) {
    Expr fp = differentiate(pde.f, pde.momenta[i]);
    if (!fp.is_zero_literal()) any = true;
    sys.dx.push_back(fp);
    sys.dp.push_back(-(differentiate(pde.f, pde.space_vars[i]) +
                       Expr::symbol(pde.momenta[i]) * fu));
    sys.du = sys.du + Expr::symbol(pde.momenta[i]) * fp;
  }
  if (!any)
    throw DegenerateError("no momentum appears in the PDE");
  return sys;
}

CharacteristicSystem canonical_relations(
    const Expr& e, const std::string& t,
    const std::vector<std::string>& space_vars) {
  CharacteristicSystem sys;
  sys.space_vars = space_vars;
  sys.unknown = "u";
  sys.param = t;
  Expr en = normalize(e);
  sys.du = -en;
  for (const std::string& v : space_vars) {
    std::string p = "p_" + v;
    sys.momenta.push_back(p);
    Expr ep = differentiate(en, p);
    sys.dx.push_back(ep);
    sys.dp.push_back(-differentiate(en, v));
    sys.du = sys.du + Expr::symbol(p) * ep;
  }
  return sys;
}

namespace {

struct Evaluator {
  const CharacteristicSystem& sys;
  std::size_t n;

  // state layout: x[0..n), p[0..n), u
  std::vector<double> rhs(double s, const std::vector<double>& y) const {
    std::map<std::string, double> bind;
    for (std::size_t i = 0; i < n; ++i) {
      bind[sys.space_vars[i]] = y[i];
      bind[sys.momenta[i]] = y[n + i];
    }
    bind[sys.unknown] = y[2 * n];
    if (!sys.param.empty()) bind[sys.param] = s;
    std::vector<double> d(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = evaluate_numeric(sys.dx[i], bind);
      d[n + i] = evaluate_numeric(sys.dp[i], bind);
    }
    d[2 * n] = evaluate_numeric(sys.du, bind);
    return d;
  }
};

}  // namespace

Trajectory integrate_characteristics(const CharacteristicSystem& sys,
                                     const InitialState& init, double s_end,
                                     double h) {
  std::size_t n = sys.space_vars.size();
  if (h <= 0) throw DomainError("step must be positive");
  if (s_end <= 0) throw DomainError("s_end must be positive");
  if (init.x.size() != n || init.p.size() != n)
    throw ArityError("initial state dimension mismatch");
  for (double v : init.x)
    if (!std::isfinite(v)) throw NonFinite("nonfinite initial state", 0.0);
  for (double v : init.p)
    if (!std::isfinite(v)) throw NonFinite("nonfinite initial state", 0.0);

  Evaluator ev{sys, n};
  std::size_t steps = std::size_t(std::ceil(s_end / h));
  Trajectory traj;
  traj.step = h;
  std::vector<double> y(2 * n + 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = init.x[i];
  for (std::size_t i = 0; i < n; ++i) y[n + i] = init.p[i];
  y[2 * n] = init.u;

  auto record = [&](double s) {
    TrajectorySample smp;
    smp.s = s;
    smp.x.assign(y.begin(), y.begin() + long(n));
    smp.p.assign(y.begin() + long(n), y.begin() + long(2 * n));
    smp.u = y[2 * n];
    for (double v : y)
      if (!std::isfinite(v)) throw NonFinite("trajectory diverged", s);
    std::vector<double> d = ev.rhs(s, y);
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(d[i]) > 1e-14) all_zero = false;
    if (all_zero) traj.singular_point = true;
    traj.samples.push_back(std::move(smp));
  };

  record(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    double s = double(k) * h;
    // clamp the last step so the trajectory lands exactly on s_end
    double hk = std::min(h, s_end - s);
    std::vector<double> k1 = ev.rhs(s, y);
    std::vector<double> y2(y.size()), y3(y.size()), y4(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * hk * k1[i];
    std::vector<double> k2 = ev.rhs(s + 0.5 * hk, y2);
    for (std::size_t i = 0; i < y.size(); ++i) y3[i] = y[i] + 0.5 * hk * k2[i];
    std::vector<double> k3 = ev.rhs(s + 0.5 * hk, y3);
    for (std::size_t i = 0; i < y.size(); ++i) y4[i] = y[i] + hk * k3[i];
    std::vector<double> k4 = ev.rhs(s + hk, y4);
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += hk / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    record(std::min(double(k + 1) * h, s_end));
  }
  return traj;
}

VerifyReport verify_along(const FirstOrderPDE& pde, const Trajectory& traj) {
  std::size_t n = pde.space_vars.size();
  VerifyReport rep{0.0, 0.0};
  for (const TrajectorySample& smp : traj.samples) {
    std::map<std::string, double> bind;
    for (std::size_t i = 0; i < n; ++i) {
      bind[pde.space_vars[i]] = smp.x[i];
      bind[pde.momenta[i]] = smp.p[i];
    }
    bind[pde.unknown] = smp.u;
    rep.max_f_residual =
        std::max(rep.max_f_residual, std::fabs(evaluate_numeric(pde.f, bind)));
  }
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const TrajectorySample& a = traj.samples[k - 1];
    const TrajectorySample& b = traj.samples[k];
    double theta = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      theta += 0.5 * (a.p[i] + b.p[i]) * (b.x[i] - a.x[i]);
    rep.max_theta_residual =
        std::max(rep.max_theta_residual, std::fabs((b.u - a.u) - theta));
  }
  return rep;
}

namespace {

void check_uniform(const std::vector<double>& g, const char* which) {
  if (g.size() < 3) throw GridError(std::string(which) + " grid too small");
  double h = g[1] - g[0];
  if (h <= 0) throw GridError(std::string(which) + " grid not increasing");
  for (std::size_t i = 1; i < g.size(); ++i) {
    double d = g[i] - g[i - 1];
    if (std::fabs(d - h) > 1e-9 * std::max(1.0, std::fabs(h)))
      throw GridError(std::string(which) + " grid not uniform");
  }
}

void check_rect(const std::vector<std::vector<double>>& f, std::size_t n1,
                std::size_t n2, const char* which) {
  if (f.size() != n1) throw GridError(std::string(which) + " field shape mismatch");
  for (const auto& row : f)
    if (row.size() != n2)
      throw GridError(std::string(which) + " field is not rectangular");
}

// d/dx1 along the first index with one-sided boundary stencils.
double diff1(const std::vector<std::vector<double>>& f, std::size_t i,
             std::size_t j, double h, std::size_t n) {
  if (i == 0) return (f[1][j] - f[0][j]) / h;
  if (i == n - 1) return (f[n - 1][j] - f[n - 2][j]) / h;
  return (f[i + 1][j] - f[i - 1][j]) / (2 * h);
}

double diff2(const std::vector<std::vector<double>>& f, std::size_t i,
             std::size_t j, double h, std::size_t n) {
  if (j == 0) return (f[i][1] - f[i][0]) / h;
  if (j == n - 1) return (f[i][n - 1] - f[i][n - 2]) / h;
  return (f[i][j + 1] - f[i][j - 1]) / (2 * h);
}

}  // namespace

FunctionalStatus functional_status(const GridField& field,
                                   double tolerance_scale) {
  check_uniform(field.x1, "x1");
  check_uniform(field.x2, "x2");
  std::size_t n1 = field.x1.size(), n2 = field.x2.size();
  double h1 = field.x1[1] - field.x1[0];
  double h2 = field.x2[1] - field.x2[0];

  std::vector<std::vector<double>> p1 = field.p1, p2 = field.p2;
  if (!field.u.empty()) {
    check_rect(field.u, n1, n2, "u");
    p1.assign(n1, std::vector<double>(n2));
    p2.assign(n1, std::vector<double>(n2));
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        p1[i][j] = diff1(field.u, i, j, h1, n1);
        p2[i][j] = diff2(field.u, i, j, h2, n2);
      }
  } else {
    check_rect(p1, n1, n2, "p1");
    check_rect(p2, n1, n2, "p2");
  }

  double scale = 1.0;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      scale = std::max({scale, std::fabs(p1[i][j]), std::fabs(p2[i][j])});

  // K_12 = dp2/dx1 - dp1/dx2 at interior points only.
  double norm = 0.0;
  for (std::size_t i = 1; i + 1 < n1; ++i)
    for (std::size_t j = 1; j + 1 < n2; ++j) {
      double k = diff1(p2, i, j, h1, n1) - diff2(p1, i, j, h2, n2);
      norm = std::max(norm, std::fabs(k));
    }
  return {norm < tolerance_scale * scale, norm};
}

}  // namespace formlab

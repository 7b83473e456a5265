#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "formlab/scalar.hpp"

namespace formlab {

// Ordered coordinate system with optional positivity assumptions on symbols.
class Chart {
 public:
  Chart(std::vector<std::string> coords, std::set<std::string> params = {},
        std::set<std::string> positive = {});

  std::size_t dim() const { return coords_.size(); }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::set<std::string>& params() const { return params_; }
  const std::set<std::string>& positive() const { return positive_; }

  int coord_index(const std::string& name) const;  // -1 when absent
  bool has_coord(const std::string& name) const {
    return coord_index(name) >= 0;
  }

  bool operator==(const Chart& o) const { return coords_ == o.coords_; }

 private:
  std::vector<std::string> coords_;
  std::set<std::string> params_;
  std::set<std::string> positive_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<std::string> coords,
                    std::set<std::string> params = {},
                    std::set<std::string> positive = {});

// Symmetric n x n matrix of coefficients; identity by default.
class Metric {
 public:
  explicit Metric(ChartPtr chart);                          // Euclidean
  Metric(ChartPtr chart, std::vector<std::vector<Expr>> g); // checks symmetry

  const ChartPtr& chart() const { return chart_; }
  const Expr& at(std::size_t i, std::size_t j) const { return g_[i][j]; }

 private:
  ChartPtr chart_;
  std::vector<std::vector<Expr>> g_;
};

// Connection coefficients gamma[sigma][alpha][beta], possibly asymmetric in
// the lower pair; zero by default.
class Connection {
 public:
  explicit Connection(ChartPtr chart);

  const ChartPtr& chart() const { return chart_; }
  const Expr& at(std::size_t sigma, std::size_t alpha,
                 std::size_t beta) const {
    return gamma_[sigma][alpha][beta];
  }
  void set(std::size_t sigma, std::size_t alpha, std::size_t beta, Expr v) {
    gamma_[sigma][alpha][beta] = normalize(v);
  }

 private:
  ChartPtr chart_;
  std::vector<std::vector<std::vector<Expr>>> gamma_;
};

using Tensor3 = std::vector<std::vector<std::vector<Expr>>>;
using Tensor4 = std::vector<std::vector<std::vector<std::vector<Expr>>>>;

// T^sigma_{alpha beta} = Gamma^sigma_{beta alpha} - Gamma^sigma_{alpha beta}
Tensor3 torsion(const Connection& c);

// R^mu_{nu rho sigma} from the connection (standard curvature formula).
Tensor4 riemann(const Connection& c);

// Levi-Civita connection of a metric (matrix inverse by adjugate, n <= 4).
Connection christoffel(const Metric& g);

struct MetricClosureReport {
  ZeroVerdict metric_symmetric;
  ZeroVerdict torsion_zero;
  ZeroVerdict curvature_zero;
};

MetricClosureReport metric_closure_report(const Chart& chart, const Metric& g,
                                          const Connection& c);

}  // namespace formlab

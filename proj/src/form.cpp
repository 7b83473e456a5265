#include "formlab/form.hpp"

#include <algorithm>
#include <functional>

namespace formlab {

namespace {

// Sorts idx ascending, returning permutation sign; 0 on duplicate index.
int sort_indices(IndexTuple& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

void check_same_chart(const Form& a, const Form& b) {
  if (!(*a.chart() == *b.chart()))
    throw ChartMismatch("forms live on different charts");
}

}  // namespace

ZeroVerdict combine_verdicts(ZeroVerdict a, ZeroVerdict b) {
  if (a == ZeroVerdict::NonZero || b == ZeroVerdict::NonZero)
    return ZeroVerdict::NonZero;
  if (a == ZeroVerdict::Unknown || b == ZeroVerdict::Unknown)
    return ZeroVerdict::Unknown;
  return ZeroVerdict::Zero;
}

Form::Form(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree < 0) throw DegreeError("negative form degree");
}

Form Form::scalar(ChartPtr chart, Expr value) {
  Form f(std::move(chart), 0);
  f.add_term({}, std::move(value));
  return f;
}

Form Form::coordinate_differential(ChartPtr chart, const std::string& coord) {
  int i = chart->coord_index(coord);
  if (i < 0) throw UndeclaredName(coord);
  Form f(std::move(chart), 1);
  f.add_term({i}, Expr::integer(1));
  return f;
}

void Form::add_term(IndexTuple idx, Expr coeff) {
  if (int(idx.size()) != degree_)
    throw DegreeError("index tuple length does not match form degree");
  if (degree_ > int(chart_->dim()))
    throw DegreeError("degree exceeds chart dimension");
  for (int i : idx)
    if (i < 0 || i >= int(chart_->dim()))
      throw DegreeError("index out of range");
  int sign = sort_indices(idx);
  if (sign == 0) return;
  Expr c = normalize(sign == 1 ? coeff : -coeff);
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    if (!c.is_zero_literal()) terms_.emplace(std::move(idx), std::move(c));
  } else {
    Expr s = it->second + c;
    if (s.is_zero_literal())
      terms_.erase(it);
    else
      it->second = std::move(s);
  }
}

Expr Form::coeff(const IndexTuple& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? Expr::integer(0) : it->second;
}

bool Form::same(const Form& o) const {
  if (degree_ != o.degree_ || !(*chart_ == *o.chart_)) return false;
  if (terms_.size() != o.terms_.size()) return false;
  for (const auto& [idx, c] : terms_) {
    auto it = o.terms_.find(idx);
    if (it == o.terms_.end() || !c.same(it->second)) return false;
  }
  return true;
}

Form operator+(const Form& a, const Form& b) {
  check_same_chart(a, b);
  if (a.degree() != b.degree())
    throw DegreeError("cannot add forms of different degree");
  Form out = a;
  for (const auto& [idx, c] : b.terms()) out.add_term(idx, c);
  return out;
}

Form operator-(const Form& a, const Form& b) {
  check_same_chart(a, b);
  if (a.degree() != b.degree())
    throw DegreeError("cannot subtract forms of different degree");
  Form out = a;
  for (const auto& [idx, c] : b.terms()) out.add_term(idx, -c);
  return out;
}

Form operator*(const Expr& s, const Form& w) {
  Form out(w.chart(), w.degree());
  for (const auto& [idx, c] : w.terms()) out.add_term(idx, s * c);
  return out;
}

Form wedge(const Form& a, const Form& b) {
  check_same_chart(a, b);
  int deg = a.degree() + b.degree();
  int n = int(a.chart()->dim());
  if (deg > n) return Form(a.chart(), deg);  // identically zero beyond top degree
  Form out(a.chart(), deg);
  for (const auto& [ia, ca] : a.terms())
    for (const auto& [ib, cb] : b.terms()) {
      IndexTuple idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add_term(std::move(idx), ca * cb);
    }
  return out;
}

Form exterior_derivative(const Form& w) {
  const Chart& chart = *w.chart();
  int n = int(chart.dim());
  int deg = w.degree() + 1;
  if (deg > n) return Form(w.chart(), deg);  // derivative of a top form
  Form out(w.chart(), deg);
  for (const auto& [idx, c] : w.terms())
    for (int i = 0; i < n; ++i) {
      Expr dc = differentiate(c, chart.coords()[i]);
      if (dc.is_zero_literal()) continue;
      IndexTuple ext;
      ext.push_back(i);
      ext.insert(ext.end(), idx.begin(), idx.end());
      out.add_term(std::move(ext), std::move(dc));
    }
  return out;
}

Commutator1 commutator_1form(const Form& w, const Connection* conn) {
  if (w.degree() != 1)
    throw DegreeError("commutator_1form requires a 1-form");
  const Chart& chart = *w.chart();
  std::size_t n = chart.dim();
  if (conn && !(*conn->chart() == chart))
    throw ChartMismatch("connection chart differs from form chart");
  std::vector<Expr> a(n, Expr::integer(0));
  for (const auto& [idx, c] : w.terms()) a[std::size_t(idx[0])] = c;
  Commutator1 out{w.chart(),
                  std::vector<std::vector<Expr>>(
                      n, std::vector<Expr>(n, Expr::integer(0)))};
  for (std::size_t al = 0; al < n; ++al)
    for (std::size_t be = 0; be < n; ++be) {
      if (al == be) continue;
      Expr k = differentiate(a[be], chart.coords()[al]) -
               differentiate(a[al], chart.coords()[be]);
      if (conn)
        for (std::size_t s = 0; s < n; ++s)
          k = k + (conn->at(s, be, al) - conn->at(s, al, be)) * a[s];
      out.k[al][be] = k;
    }
  return out;
}

ClosureResult is_closed(const Form& w, const Connection* conn) {
  ClosureResult res;
  res.verdict = ZeroVerdict::Zero;
  if (conn) {
    if (w.degree() != 1)
      throw UnsupportedDegree(
          "torsion commutator is defined for 1-forms only");
    Commutator1 k = commutator_1form(w, conn);
    for (const auto& row : k.k)
      for (const Expr& e : row)
        res.verdict = combine_verdicts(res.verdict, is_zero(e));
    res.residual_comm = std::move(k);
    return res;
  }
  Form d = exterior_derivative(w);
  for (const auto& [idx, c] : d.terms())
    res.verdict = combine_verdicts(res.verdict, is_zero(c));
  res.residual_form = std::move(d);
  return res;
}

// ----------------------------------------------------------------- potential

namespace {

Form potential_1form(const Form& w) {
  const Chart& chart = *w.chart();
  Expr p = Expr::integer(0);
  Form rem = w;
  for (std::size_t i = 0; i < chart.dim(); ++i) {
    Expr ci = rem.coeff({int(i)});
    if (ci.is_zero_literal()) continue;
    p = p + antiderivative(ci, chart.coords()[i]);
    // rem = w - d(p)
    rem = w;
    for (std::size_t j = 0; j < chart.dim(); ++j)
      rem.add_term({int(j)}, -differentiate(p, chart.coords()[j]));
  }
  if (!rem.empty())
    throw NotClosed("line integration left a residual: " + to_string(rem));
  return Form::scalar(w.chart(), p);
}

// Coordinate-degree of a normalized monomial term.
long long coord_degree(const Expr& term, const Chart& chart) {
  ExprList factors;
  if (term.kind() == Kind::Product)
    factors = term.kids();
  else
    factors = {term};
  long long deg = 0;
  for (const Expr& f : factors) {
    if (f.kind() == Kind::Symbol && chart.has_coord(f.name()))
      deg += 1;
    else if (f.kind() == Kind::Power && f.base().kind() == Kind::Symbol &&
             chart.has_coord(f.base().name()) &&
             f.exponent().kind() == Kind::Rational &&
             f.exponent().rat().is_integer())
      deg += f.exponent().rat().num;
  }
  return deg;
}

Form potential_homotopy(const Form& w) {
  const Chart& chart = *w.chart();
  int p = w.degree();
  Form out(w.chart(), p - 1);
  for (const auto& [idx, c] : w.terms()) {
    if (!is_polynomial_in(c, chart.coords()))
      throw UnsupportedCoefficient("homotopy operator needs polynomial "
                                   "coefficients, got " + to_string(c));
    ExprList monomials =
        c.kind() == Kind::Sum ? c.kids() : ExprList{c};
    for (const Expr& m : monomials) {
      long long deg = coord_degree(m, chart);
      Expr factor = Expr::rational(1, p + deg);
      for (int j = 0; j < p; ++j) {
        IndexTuple rest;
        for (int l = 0; l < p; ++l)
          if (l != j) rest.push_back(idx[std::size_t(l)]);
        Expr sign = Expr::integer(j % 2 == 0 ? 1 : -1);
        Expr coeff = sign * factor *
                     Expr::symbol(chart.coords()[std::size_t(idx[std::size_t(j)])]) * m;
        out.add_term(std::move(rest), std::move(coeff));
      }
    }
  }
  return out;
}

}  // namespace

Form potential(const Form& w) {
  if (w.degree() < 1)
    throw DegreeError("potential is defined for forms of degree >= 1");
  ClosureResult cl = is_closed(w);
  if (cl.verdict != ZeroVerdict::Zero)
    throw NotClosed("form is not (provably) closed: residual " +
                    to_string(*cl.residual_form));
  if (w.degree() == 1) return potential_1form(w);
  return potential_homotopy(w);
}

// ---------------------------------------------------------------- Hodge star

Form hodge_star(const Form& w, const std::vector<Expr>& diag) {
  const Chart& chart = *w.chart();
  std::size_t n = chart.dim();
  std::vector<Expr> scale = diag;
  if (scale.empty()) scale.assign(n, Expr::integer(1));
  if (scale.size() != n)
    throw MetricError("diagonal metric has wrong dimension");
  for (const Expr& s : scale)
    if (normalize(s).is_zero_literal())
      throw MetricError("diagonal metric entry is zero");
  int p = w.degree();
  Form out(w.chart(), int(n) - p);
  for (const auto& [idx, c] : w.terms()) {
    IndexTuple comp;
    for (int i = 0; i < int(n); ++i)
      if (std::find(idx.begin(), idx.end(), i) == idx.end())
        comp.push_back(i);
    // Sign of the permutation (idx, comp) -> (0..n-1): count inversions.
    IndexTuple perm = idx;
    perm.insert(perm.end(), comp.begin(), comp.end());
    int inv = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (std::size_t j = i + 1; j < perm.size(); ++j)
        if (perm[i] > perm[j]) ++inv;
    Expr coeff = inv % 2 == 0 ? c : -c;
    for (int i : idx) coeff = coeff * scale[std::size_t(i)];
    out.add_term(std::move(comp), std::move(coeff));
  }
  return out;
}

// ------------------------------------------------------------------ pullback

Form pullback(const Form& w, ChartPtr target,
              const std::vector<Expr>& coordinate_map) {
  const Chart& src = *w.chart();
  if (coordinate_map.size() != src.dim())
    throw ArityError("pullback map must give one expression per source "
                     "coordinate");
  std::map<std::string, Expr> bind;
  for (std::size_t i = 0; i < src.dim(); ++i)
    bind[src.coords()[i]] = coordinate_map[i];

  // Differentials of the map components, as 1-forms on the target chart.
  std::vector<Form> dmap;
  dmap.reserve(src.dim());
  for (std::size_t i = 0; i < src.dim(); ++i) {
    Form df(target, 1);
    for (std::size_t j = 0; j < target->dim(); ++j)
      df.add_term({int(j)},
                  differentiate(coordinate_map[i], target->coords()[j]));
    dmap.push_back(std::move(df));
  }

  int p = w.degree();
  if (p > int(target->dim())) return Form(target, p);
  Form out(target, p);
  for (const auto& [idx, c] : w.terms()) {
    Form piece = Form::scalar(target, substitute(c, bind));
    for (int i : idx) piece = wedge(piece, dmap[std::size_t(i)]);
    if (piece.degree() == p)
      out = out + piece;
  }
  return out;
}

Form restrict_to_pseudostructure(
    const Form& w,
    const std::vector<std::pair<std::string, Expr>>& constraints) {
  const Chart& src = *w.chart();
  std::map<std::string, Expr> solved;
  for (const auto& [coord, expr] : constraints) {
    if (!src.has_coord(coord))
      throw ConstraintError("constraint on unknown coordinate: " + coord);
    if (solved.count(coord))
      throw ConstraintError("coordinate constrained twice: " + coord);
    solved[coord] = normalize(expr);
  }
  std::vector<std::string> remaining;
  for (const std::string& c : src.coords())
    if (!solved.count(c)) remaining.push_back(c);
  if (remaining.empty())
    throw ConstraintError("all coordinates constrained; nothing remains");

  // Resolve references between constraints; reject circular systems.
  for (std::size_t round = 0; round < solved.size(); ++round) {
    bool any = false;
    for (auto& [coord, expr] : solved) {
      for (const auto& [other, oexpr] : solved) {
        if (other != coord && depends_on(expr, other)) {
          expr = substitute(expr, {{other, oexpr}});
          any = true;
        }
      }
    }
    if (!any) break;
  }
  for (const auto& [coord, expr] : solved)
    for (const auto& [other, unused] : solved) {
      (void)unused;
      if (depends_on(expr, other))
        throw ConstraintError("circular constraints involving " + coord +
                              " and " + other);
    }

  ChartPtr target =
      make_chart(remaining, src.params(), src.positive());
  std::vector<Expr> map;
  map.reserve(src.dim());
  for (const std::string& c : src.coords()) {
    auto it = solved.find(c);
    map.push_back(it != solved.end() ? it->second : Expr::symbol(c));
  }
  return pullback(w, target, map);
}

// ------------------------------------------------------------------ printing

std::string basis_label(const Chart& chart, const IndexTuple& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += "^";
    s += "d" + chart.coords()[std::size_t(idx[i])];
  }
  return s;
}

std::string to_string(const Form& w) {
  if (w.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [idx, c] : w.terms()) {
    if (!first) s += " + ";
    first = false;
    if (idx.empty()) {
      s += to_string(c);
      continue;
    }
    if (c.is_one_literal())
      s += basis_label(*w.chart(), idx);
    else
      s += "(" + to_string(c) + ")*" + basis_label(*w.chart(), idx);
  }
  return s;
}

}  // namespace formlab

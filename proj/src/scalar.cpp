#include "formlab/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

namespace formlab {

// ---------------------------------------------------------------- Rational

namespace {

long long checked_mul(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) * b;
  if (r > INT64_MAX || r < INT64_MIN) throw OverflowError("rational overflow");
  return static_cast<long long>(r);
}

long long checked_add(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) + b;
  if (r > INT64_MAX || r < INT64_MIN) throw OverflowError("rational overflow");
  return static_cast<long long>(r);
}

}  // namespace

Rational::Rational(long long n, long long d) {
  if (d == 0) throw DomainError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  long long g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num = n;
  den = d;
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(checked_add(checked_mul(num, o.den), checked_mul(o.num, den)),
                  checked_mul(den, o.den));
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return Rational(checked_mul(num, o.num), checked_mul(den, o.den));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num == 0) throw DomainError("rational division by zero");
  return Rational(checked_mul(num, o.den), checked_mul(den, o.num));
}

int Rational::compare(const Rational& o) const {
  __int128 l = static_cast<__int128>(num) * o.den;
  __int128 r = static_cast<__int128>(o.num) * den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

Rational Rational::pow_int(long long exp) const {
  if (exp == 0) return Rational(1, 1);
  bool inv = exp < 0;
  unsigned long long e = inv ? -(unsigned long long)exp : (unsigned long long)exp;
  Rational base = *this;
  if (inv) {
    if (base.num == 0) throw DomainError("zero to a negative power");
    base = Rational(base.den, base.num);
  }
  Rational acc(1, 1);
  while (e) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

const char* builtin_name(BuiltinFn fn) {
  switch (fn) {
    case BuiltinFn::Ln: return "ln";
    case BuiltinFn::Exp: return "exp";
    case BuiltinFn::Sin: return "sin";
    case BuiltinFn::Cos: return "cos";
  }
  return "?";
}

// -------------------------------------------------------------------- Node

struct Expr::Node {
  Kind kind = Kind::Rational;
  Rational rat;
  std::string name;
  int order = 0;
  BuiltinFn fn = BuiltinFn::Ln;
  ExprList kids;
};

Expr::Expr() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Rational;
  n->rat = Rational(0, 1);
  node_ = std::move(n);
}

Expr Expr::rational(Rational r) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Rational;
  n->rat = r;
  return Expr(std::move(n));
}

Expr Expr::symbol(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Symbol;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::sum_raw(ExprList terms) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sum;
  n->kids = std::move(terms);
  return Expr(std::move(n));
}

Expr Expr::product_raw(ExprList factors) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->kids = std::move(factors);
  return Expr(std::move(n));
}

Expr Expr::pow_raw(Expr base, Expr exp) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->kids = {std::move(base), std::move(exp)};
  return Expr(std::move(n));
}

Expr Expr::builtin_raw(BuiltinFn fn, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Builtin;
  n->fn = fn;
  n->kids = {std::move(arg)};
  return Expr(std::move(n));
}

Expr Expr::opaque_raw(std::string name, int order, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Opaque;
  n->name = std::move(name);
  n->order = order;
  n->kids = {std::move(arg)};
  return Expr(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::rat() const { return node_->rat; }
const std::string& Expr::name() const { return node_->name; }
int Expr::opaque_order() const { return node_->order; }
BuiltinFn Expr::fn() const { return node_->fn; }
const ExprList& Expr::kids() const { return node_->kids; }
const Expr& Expr::base() const { return node_->kids[0]; }
const Expr& Expr::exponent() const { return node_->kids[1]; }
const Expr& Expr::arg() const { return node_->kids[0]; }

bool Expr::is_rational(long long num, long long den) const {
  return kind() == Kind::Rational && rat() == Rational(num, den);
}
bool Expr::is_zero_literal() const { return is_rational(0); }
bool Expr::is_one_literal() const { return is_rational(1); }

namespace {
int kind_rank(Kind k) {
  switch (k) {
    case Kind::Rational: return 0;
    case Kind::Symbol: return 1;
    case Kind::Builtin: return 2;
    case Kind::Opaque: return 3;
    case Kind::Power: return 4;
    case Kind::Product: return 5;
    case Kind::Sum: return 6;
  }
  return 7;
}
}  // namespace

int Expr::compare(const Expr& o) const {
  if (node_ == o.node_) return 0;
  int ra = kind_rank(kind()), rb = kind_rank(o.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (kind()) {
    case Kind::Rational:
      return rat().compare(o.rat());
    case Kind::Symbol:
      return name().compare(o.name()) < 0 ? -1 : (name() == o.name() ? 0 : 1);
    case Kind::Builtin: {
      if (fn() != o.fn()) return int(fn()) < int(o.fn()) ? -1 : 1;
      return arg().compare(o.arg());
    }
    case Kind::Opaque: {
      int c = name().compare(o.name());
      if (c != 0) return c < 0 ? -1 : 1;
      if (opaque_order() != o.opaque_order())
        return opaque_order() < o.opaque_order() ? -1 : 1;
      return arg().compare(o.arg());
    }
    default: {
      const ExprList& a = kids();
      const ExprList& b = o.kids();
      size_t n = std::min(a.size(), b.size());
      for (size_t i = 0; i < n; ++i) {
        int c = a[i].compare(b[i]);
        if (c != 0) return c;
      }
      if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
      return 0;
    }
  }
}

std::size_t Expr::hash() const {
  std::size_t h = std::hash<int>()(kind_rank(kind()));
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  switch (kind()) {
    case Kind::Rational:
      mix(std::hash<long long>()(rat().num));
      mix(std::hash<long long>()(rat().den));
      break;
    case Kind::Symbol:
      mix(std::hash<std::string>()(name()));
      break;
    case Kind::Builtin:
      mix(std::hash<int>()(int(fn())));
      mix(arg().hash());
      break;
    case Kind::Opaque:
      mix(std::hash<std::string>()(name()));
      mix(std::hash<int>()(opaque_order()));
      mix(arg().hash());
      break;
    default:
      for (const Expr& k : kids()) mix(k.hash());
  }
  return h;
}

// ---------------------------------------------------------- normalization

namespace {

const Expr kZero = Expr::integer(0);
const Expr kOne = Expr::integer(1);

Expr norm_sum(ExprList terms);
Expr norm_pow(const Expr& base, const Expr& exp);
Expr norm_builtin(BuiltinFn fn, const Expr& a);
Expr mul2(const Expr& a, const Expr& b);

// Splits a normalized term into rational coefficient and monomial key.
std::pair<Rational, Expr> split_term(const Expr& t) {
  if (t.kind() == Kind::Rational) return {t.rat(), kOne};
  if (t.kind() == Kind::Product && t.kids()[0].kind() == Kind::Rational) {
    const ExprList& k = t.kids();
    if (k.size() == 2) return {k[0].rat(), k[1]};
    return {k[0].rat(), Expr::product_raw(ExprList(k.begin() + 1, k.end()))};
  }
  return {Rational(1, 1), t};
}

// Rebuilds coeff * key with sorted product layout.
Expr join_term(const Rational& c, const Expr& key) {
  if (c.is_zero()) return kZero;
  if (key.is_one_literal()) return Expr::rational(c);
  if (c.is_one()) return key;
  ExprList kids;
  kids.push_back(Expr::rational(c));
  if (key.kind() == Kind::Product)
    kids.insert(kids.end(), key.kids().begin(), key.kids().end());
  else
    kids.push_back(key);
  return Expr::product_raw(std::move(kids));
}

ExprList key_factors(const Expr& key) {
  if (key.kind() == Kind::Product) return key.kids();
  return {key};
}

Expr key_from_factors(ExprList fs) {
  if (fs.empty()) return kOne;
  if (fs.size() == 1) return fs[0];
  std::sort(fs.begin(), fs.end(),
            [](const Expr& a, const Expr& b) { return a.compare(b) < 0; });
  return Expr::product_raw(std::move(fs));
}

bool is_trig_square(const Expr& f, BuiltinFn which, Expr* angle) {
  if (f.kind() != Kind::Power) return false;
  if (!f.exponent().is_rational(2)) return false;
  const Expr& b = f.base();
  if (b.kind() != Kind::Builtin || b.fn() != which) return false;
  *angle = b.arg();
  return true;
}

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const {
    return a.compare(b) < 0;
  }
};

using TermMap = std::map<Expr, Rational, ExprLess>;

// sin(u)^2 + cos(u)^2 -> 1, applied to complementary term pairs.
void trig_pythagoras_pass(TermMap& acc) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = acc.begin(); it != acc.end(); ++it) {
      ExprList fs = key_factors(it->first);
      for (size_t i = 0; i < fs.size(); ++i) {
        Expr angle;
        if (!is_trig_square(fs[i], BuiltinFn::Sin, &angle)) continue;
        ExprList partner = fs;
        partner[i] = Expr::pow_raw(
            Expr::builtin_raw(BuiltinFn::Cos, angle), Expr::integer(2));
        Expr partner_key = key_from_factors(partner);
        auto pit = acc.find(partner_key);
        if (pit == acc.end() || pit == it) continue;
        Rational c_cos = pit->second;
        ExprList rest = fs;
        rest.erase(rest.begin() + long(i));
        Expr rest_key = key_from_factors(rest);
        acc.erase(pit);
        Rational c_sin = it->second - c_cos;
        Expr sin_key = it->first;
        acc.erase(sin_key);
        if (!c_sin.is_zero()) acc[sin_key] = acc.count(sin_key)
                                                 ? acc[sin_key] + c_sin
                                                 : c_sin;
        auto rit = acc.find(rest_key);
        if (rit == acc.end())
          acc[rest_key] = c_cos;
        else {
          rit->second = rit->second + c_cos;
          if (rit->second.is_zero()) acc.erase(rit);
        }
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
}

Expr norm_sum(ExprList terms) {
  TermMap acc;
  std::function<void(const Expr&)> absorb = [&](const Expr& t) {
    if (t.kind() == Kind::Sum) {
      for (const Expr& k : t.kids()) absorb(k);
      return;
    }
    if (t.is_zero_literal()) return;
    auto [c, key] = split_term(t);
    auto it = acc.find(key);
    if (it == acc.end())
      acc[key] = c;
    else {
      it->second = it->second + c;
      if (it->second.is_zero()) acc.erase(it);
    }
  };
  for (const Expr& t : terms) absorb(t);
  trig_pythagoras_pass(acc);
  ExprList out;
  out.reserve(acc.size());
  for (const auto& [key, c] : acc) out.push_back(join_term(c, key));
  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return a.compare(b) < 0; });
  if (out.empty()) return kZero;
  if (out.size() == 1) return out[0];
  return Expr::sum_raw(std::move(out));
}

Expr add2(const Expr& a, const Expr& b) { return norm_sum({a, b}); }

struct Monomial {
  Rational coeff{1, 1};
  std::vector<std::pair<Expr, Expr>> pairs;  // base -> exponent
  Expr exp_arg = kZero;  // exponential factors merge by summing arguments

  void push(const Expr& base, const Expr& exp) {
    if (base.kind() == Kind::Builtin && base.fn() == BuiltinFn::Exp) {
      exp_arg = add2(exp_arg, mul2(base.arg(), exp));
      return;
    }
    for (auto& [b, e] : pairs) {
      if (b.same(base)) {
        e = add2(e, exp);
        return;
      }
    }
    pairs.emplace_back(base, exp);
  }

  void absorb(const Expr& f) {
    switch (f.kind()) {
      case Kind::Rational:
        coeff = coeff * f.rat();
        break;
      case Kind::Product:
        for (const Expr& k : f.kids()) absorb(k);
        break;
      case Kind::Power:
        push(f.base(), f.exponent());
        break;
      default:
        push(f, kOne);
    }
  }
};

Expr rebuild_monomial(Monomial m) {
  if (m.coeff.is_zero()) return kZero;
  ExprList factors;
  ExprList pending;
  for (auto& [b, e] : m.pairs) {
    Expr f = norm_pow(b, e);
    if (f.is_one_literal()) continue;
    if (f.kind() == Kind::Rational)
      m.coeff = m.coeff * f.rat();
    else if (f.kind() == Kind::Product || f.kind() == Kind::Sum)
      pending.push_back(f);
    else
      factors.push_back(f);
  }
  if (!m.exp_arg.is_zero_literal()) {
    Expr ef = norm_builtin(BuiltinFn::Exp, m.exp_arg);
    ExprList efs = ef.kind() == Kind::Product ? ef.kids() : ExprList{ef};
    for (const Expr& g : efs) {
      if (g.kind() == Kind::Rational)
        m.coeff = m.coeff * g.rat();
      else if (g.kind() == Kind::Builtin && g.fn() == BuiltinFn::Exp)
        factors.push_back(g);
      else
        pending.push_back(g);  // ln-extracted powers re-merge via mul2
    }
  }
  std::sort(factors.begin(), factors.end(),
            [](const Expr& a, const Expr& b) { return a.compare(b) < 0; });
  Expr res;
  if (m.coeff.is_zero()) return kZero;
  if (factors.empty())
    res = Expr::rational(m.coeff);
  else if (m.coeff.is_one() && factors.size() == 1)
    res = factors[0];
  else {
    ExprList kids;
    if (!m.coeff.is_one()) kids.push_back(Expr::rational(m.coeff));
    kids.insert(kids.end(), factors.begin(), factors.end());
    res = kids.size() == 1 ? kids[0] : Expr::product_raw(std::move(kids));
  }
  for (const Expr& p : pending) res = mul2(res, p);
  return res;
}

// True when monomial-like expr o carries a power of base s; if so returns
// o with that power bumped by one (cancellation like (x+y)^-1 * (x+y)).
bool try_absorb_sum_base(const Expr& o, const Expr& s, Expr* out) {
  Monomial m;
  m.absorb(o);
  for (auto& [b, e] : m.pairs) {
    if (b.same(s)) {
      e = add2(e, kOne);
      *out = rebuild_monomial(std::move(m));
      return true;
    }
  }
  return false;
}

Expr mul2(const Expr& a, const Expr& b) {
  if (a.is_zero_literal() || b.is_zero_literal()) return kZero;
  if (a.is_one_literal()) return b;
  if (b.is_one_literal()) return a;
  bool sa = a.kind() == Kind::Sum, sb = b.kind() == Kind::Sum;
  if (sa || sb) {
    const Expr& s = sa ? a : b;
    const Expr& o = sa ? b : a;
    if (!(sa && sb)) {
      Expr merged;
      if (try_absorb_sum_base(o, s, &merged)) return merged;
    }
    ExprList out;
    out.reserve(s.kids().size());
    for (const Expr& t : s.kids()) out.push_back(mul2(o, t));
    return norm_sum(std::move(out));
  }
  Monomial m;
  m.absorb(a);
  m.absorb(b);
  return rebuild_monomial(std::move(m));
}

Expr norm_pow(const Expr& base, const Expr& exp) {
  if (exp.is_zero_literal()) return kOne;
  if (exp.is_one_literal()) return base;
  if (base.kind() == Kind::Rational) {
    const Rational& r = base.rat();
    if (r.is_one()) return kOne;
    if (r.is_zero()) {
      if (exp.kind() == Kind::Rational) {
        if (exp.rat().num > 0) return kZero;
        throw DomainError("zero to a nonpositive power");
      }
      return Expr::pow_raw(base, exp);
    }
    if (exp.kind() == Kind::Rational && exp.rat().is_integer())
      return Expr::rational(r.pow_int(exp.rat().num));
    return Expr::pow_raw(base, exp);
  }
  if (base.kind() == Kind::Power) {
    if (exp.kind() == Kind::Rational && exp.rat().is_integer())
      return norm_pow(base.base(), mul2(base.exponent(), exp));
    return Expr::pow_raw(base, exp);
  }
  if (base.kind() == Kind::Builtin && base.fn() == BuiltinFn::Exp)
    return norm_builtin(BuiltinFn::Exp, mul2(base.arg(), exp));
  if (base.kind() == Kind::Product && exp.kind() == Kind::Rational &&
      exp.rat().is_integer()) {
    Expr res = kOne;
    for (const Expr& f : base.kids()) res = mul2(res, norm_pow(f, exp));
    return res;
  }
  if (base.kind() == Kind::Sum && exp.kind() == Kind::Rational &&
      exp.rat().is_integer() && exp.rat().num >= 2 && exp.rat().num <= 16) {
    Expr res = base;
    for (long long i = 1; i < exp.rat().num; ++i) res = mul2(res, base);
    return res;
  }
  // sum^-k expands the positive power first, so printing (which splits the
  // sign into a division) round-trips through the parser
  if (base.kind() == Kind::Sum && exp.kind() == Kind::Rational &&
      exp.rat().is_integer() && exp.rat().num <= -2 && exp.rat().num >= -16) {
    return norm_pow(norm_pow(base, Expr::integer(-exp.rat().num)),
                    Expr::integer(-1));
  }
  return Expr::pow_raw(base, exp);
}

Expr norm_builtin(BuiltinFn fn, const Expr& a) {
  switch (fn) {
    case BuiltinFn::Exp: {
      if (a.is_zero_literal()) return kOne;
      // extract rational-coefficient log terms: exp(r ln u + rest) ->
      // u^r * exp(rest); the remaining sum stays inside one exp factor
      ExprList terms = a.kind() == Kind::Sum ? a.kids() : ExprList{a};
      Expr pows = kOne;
      ExprList residual;
      for (const Expr& t : terms) {
        if (t.kind() == Kind::Builtin && t.fn() == BuiltinFn::Ln) {
          pows = mul2(pows, t.arg());
          continue;
        }
        if (t.kind() == Kind::Product) {
          auto [c, key] = split_term(t);
          if (key.kind() == Kind::Builtin && key.fn() == BuiltinFn::Ln) {
            pows = mul2(pows, norm_pow(key.arg(), Expr::rational(c)));
            continue;
          }
        }
        residual.push_back(t);
      }
      if (residual.empty()) return pows;
      Expr rest = Expr::builtin_raw(fn, norm_sum(std::move(residual)));
      return mul2(pows, rest);
    }
    case BuiltinFn::Ln: {
      if (a.is_one_literal()) return kZero;
      if (a.kind() == Kind::Builtin && a.fn() == BuiltinFn::Exp) return a.arg();
      return Expr::builtin_raw(fn, a);
    }
    case BuiltinFn::Sin:
      if (a.is_zero_literal()) return kZero;
      return Expr::builtin_raw(fn, a);
    case BuiltinFn::Cos:
      if (a.is_zero_literal()) return kOne;
      return Expr::builtin_raw(fn, a);
  }
  return Expr::builtin_raw(fn, a);
}

}  // namespace

Expr normalize(const Expr& e) {
  switch (e.kind()) {
    case Kind::Rational:
    case Kind::Symbol:
      return e;
    case Kind::Builtin:
      return norm_builtin(e.fn(), normalize(e.arg()));
    case Kind::Opaque:
      return Expr::opaque_raw(e.name(), e.opaque_order(), normalize(e.arg()));
    case Kind::Power:
      return norm_pow(normalize(e.base()), normalize(e.exponent()));
    case Kind::Product: {
      Expr res = kOne;
      for (const Expr& k : e.kids()) res = mul2(res, normalize(k));
      return res;
    }
    case Kind::Sum: {
      ExprList terms;
      terms.reserve(e.kids().size());
      for (const Expr& k : e.kids()) terms.push_back(normalize(k));
      return norm_sum(std::move(terms));
    }
  }
  return e;
}

Expr operator+(const Expr& a, const Expr& b) {
  return add2(normalize(a), normalize(b));
}
Expr operator-(const Expr& a, const Expr& b) {
  return add2(normalize(a), mul2(Expr::integer(-1), normalize(b)));
}
Expr operator*(const Expr& a, const Expr& b) {
  return mul2(normalize(a), normalize(b));
}
Expr operator/(const Expr& a, const Expr& b) {
  return mul2(normalize(a), norm_pow(normalize(b), Expr::integer(-1)));
}
Expr operator-(const Expr& a) { return mul2(Expr::integer(-1), normalize(a)); }
Expr pow(const Expr& base, const Expr& exp) {
  return norm_pow(normalize(base), normalize(exp));
}
Expr pow(const Expr& base, long long exp) {
  return norm_pow(normalize(base), Expr::integer(exp));
}
Expr fn(BuiltinFn f, const Expr& arg) {
  return norm_builtin(f, normalize(arg));
}
Expr opaque(const std::string& name, int order, const Expr& arg) {
  return Expr::opaque_raw(name, order, normalize(arg));
}

// ------------------------------------------------------------- derivative

Expr differentiate(const Expr& e, const std::string& var) {
  std::function<Expr(const Expr&)> d = [&](const Expr& x) -> Expr {
    switch (x.kind()) {
      case Kind::Rational:
        return kZero;
      case Kind::Symbol:
        return x.name() == var ? kOne : kZero;
      case Kind::Sum: {
        ExprList out;
        for (const Expr& k : x.kids()) out.push_back(d(k));
        return norm_sum(std::move(out));
      }
      case Kind::Product: {
        ExprList out;
        const ExprList& ks = x.kids();
        for (size_t i = 0; i < ks.size(); ++i) {
          Expr term = d(ks[i]);
          for (size_t j = 0; j < ks.size(); ++j)
            if (j != i) term = mul2(term, ks[j]);
          out.push_back(term);
        }
        return norm_sum(std::move(out));
      }
      case Kind::Power: {
        const Expr& b = x.base();
        const Expr& p = x.exponent();
        if (p.kind() == Kind::Rational) {
          Expr bm1 = norm_pow(b, Expr::rational(p.rat() - Rational(1, 1)));
          return mul2(mul2(p, bm1), d(b));
        }
        // b^p * (p' ln b + p b'/b)
        Expr lhs = mul2(d(p), norm_builtin(BuiltinFn::Ln, b));
        Expr rhs = mul2(mul2(p, d(b)), norm_pow(b, Expr::integer(-1)));
        return mul2(x, add2(lhs, rhs));
      }
      case Kind::Builtin: {
        Expr da = d(x.arg());
        if (da.is_zero_literal()) return kZero;
        Expr outer;
        switch (x.fn()) {
          case BuiltinFn::Ln:
            outer = norm_pow(x.arg(), Expr::integer(-1));
            break;
          case BuiltinFn::Exp:
            outer = x;
            break;
          case BuiltinFn::Sin:
            outer = norm_builtin(BuiltinFn::Cos, x.arg());
            break;
          case BuiltinFn::Cos:
            outer = mul2(Expr::integer(-1),
                         norm_builtin(BuiltinFn::Sin, x.arg()));
            break;
        }
        return mul2(outer, da);
      }
      case Kind::Opaque: {
        Expr da = d(x.arg());
        if (da.is_zero_literal()) return kZero;
        return mul2(Expr::opaque_raw(x.name(), x.opaque_order() + 1, x.arg()),
                    da);
      }
    }
    return kZero;
  };
  return d(normalize(e));
}

// ------------------------------------------------------------ substitution

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    switch (x.kind()) {
      case Kind::Rational:
        return x;
      case Kind::Symbol: {
        auto it = bindings.find(x.name());
        return it != bindings.end() ? it->second : x;
      }
      case Kind::Builtin:
        return Expr::builtin_raw(x.fn(), go(x.arg()));
      case Kind::Opaque:
        return Expr::opaque_raw(x.name(), x.opaque_order(), go(x.arg()));
      case Kind::Power:
        return Expr::pow_raw(go(x.base()), go(x.exponent()));
      default: {
        ExprList out;
        out.reserve(x.kids().size());
        for (const Expr& k : x.kids()) out.push_back(go(k));
        return x.kind() == Kind::Sum ? Expr::sum_raw(std::move(out))
                                     : Expr::product_raw(std::move(out));
      }
    }
  };
  return normalize(go(e));
}

// --------------------------------------------------------------- numerics

namespace {

// Analytic stand-in used only for zero-testing: each opaque function f is
// modeled as sin(a t + b) with (a, b) derived from its name, so chain-rule
// identities between f, f', f'' keep holding at sample points.
double opaque_standin(const std::string& name, int order, double t) {
  std::size_t h = std::hash<std::string>()(name);
  double a = 1.0 + double(h % 7) / 8.0;
  double b = double((h >> 8) % 11) / 3.0;
  return std::pow(a, order) *
         std::sin(a * t + b + double(order) * M_PI / 2.0);
}

double eval_impl(const Expr& e, const std::map<std::string, double>& bindings,
                 bool allow_opaque) {
  switch (e.kind()) {
    case Kind::Rational:
      return e.rat().to_double();
    case Kind::Symbol: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw UnboundSymbol(e.name());
      return it->second;
    }
    case Kind::Sum: {
      double s = 0;
      for (const Expr& k : e.kids()) s += eval_impl(k, bindings, allow_opaque);
      return s;
    }
    case Kind::Product: {
      double p = 1;
      for (const Expr& k : e.kids()) p *= eval_impl(k, bindings, allow_opaque);
      return p;
    }
    case Kind::Power: {
      double b = eval_impl(e.base(), bindings, allow_opaque);
      double x = eval_impl(e.exponent(), bindings, allow_opaque);
      if (b == 0.0 && x <= 0.0) throw DomainError("zero to nonpositive power");
      if (b < 0.0 && x != std::floor(x))
        throw DomainError("negative base with fractional exponent");
      return std::pow(b, x);
    }
    case Kind::Builtin: {
      double a = eval_impl(e.arg(), bindings, allow_opaque);
      switch (e.fn()) {
        case BuiltinFn::Ln:
          if (a <= 0.0) throw DomainError("ln of nonpositive value");
          return std::log(a);
        case BuiltinFn::Exp:
          return std::exp(a);
        case BuiltinFn::Sin:
          return std::sin(a);
        case BuiltinFn::Cos:
          return std::cos(a);
      }
      return 0;
    }
    case Kind::Opaque: {
      if (!allow_opaque) throw UnboundSymbol("opaque function " + e.name());
      double t = eval_impl(e.arg(), bindings, allow_opaque);
      return opaque_standin(e.name(), e.opaque_order(), t);
    }
  }
  return 0;
}

}  // namespace

double evaluate_numeric(const Expr& e,
                        const std::map<std::string, double>& bindings) {
  return eval_impl(e, bindings, false);
}

const char* to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::Zero: return "Zero";
    case ZeroVerdict::NonZero: return "NonZero";
    case ZeroVerdict::Unknown: return "Unknown";
  }
  return "?";
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Kind::Rational:
      return;
    case Kind::Symbol:
      out.insert(e.name());
      return;
    default:
      for (const Expr& k : e.kids()) collect_symbols(k, out);
  }
}

bool depends_on(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case Kind::Rational:
      return false;
    case Kind::Symbol:
      return e.name() == var;
    default:
      for (const Expr& k : e.kids())
        if (depends_on(k, var)) return true;
      return false;
  }
}

ZeroVerdict is_zero(const Expr& e) {
  Expr n = normalize(e);
  if (n.is_zero_literal()) return ZeroVerdict::Zero;
  std::set<std::string> syms;
  collect_symbols(n, syms);
  std::mt19937 rng(static_cast<unsigned>(n.hash() ^ 0x5eedf00dULL));
  std::uniform_int_distribution<int> dist(1, 48);
  int usable = 0;
  for (int trial = 0; trial < 3; ++trial) {
    std::map<std::string, double> b;
    for (const std::string& s : syms) b[s] = double(dist(rng)) / 16.0;
    try {
      double v = eval_impl(n, b, true);
      if (!std::isfinite(v)) continue;
      ++usable;
      if (std::abs(v) > 1e-9) return ZeroVerdict::NonZero;
    } catch (const Error&) {
      continue;
    }
  }
  (void)usable;
  return ZeroVerdict::Unknown;
}

// ------------------------------------------------------------ log expansion

Expr expand_logs(const Expr& e, const std::set<std::string>& positive) {
  std::function<bool(const Expr&)> pos = [&](const Expr& x) -> bool {
    switch (x.kind()) {
      case Kind::Rational:
        return x.rat().num > 0;
      case Kind::Symbol:
        return positive.count(x.name()) > 0;
      case Kind::Product: {
        for (const Expr& k : x.kids())
          if (!pos(k)) return false;
        return true;
      }
      case Kind::Power:
        return pos(x.base());
      case Kind::Builtin:
        return x.fn() == BuiltinFn::Exp;
      default:
        return false;
    }
  };
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (x.kind() == Kind::Builtin && x.fn() == BuiltinFn::Ln) {
      Expr a = go(x.arg());
      if (a.kind() == Kind::Product && pos(a)) {
        ExprList parts;
        for (const Expr& k : a.kids())
          parts.push_back(go(Expr::builtin_raw(BuiltinFn::Ln, k)));
        return norm_sum(std::move(parts));
      }
      if (a.kind() == Kind::Power && pos(a.base()))
        return mul2(a.exponent(),
                    go(Expr::builtin_raw(BuiltinFn::Ln, a.base())));
      return norm_builtin(BuiltinFn::Ln, a);
    }
    switch (x.kind()) {
      case Kind::Rational:
      case Kind::Symbol:
        return x;
      case Kind::Builtin:
        return norm_builtin(x.fn(), go(x.arg()));
      case Kind::Opaque:
        return Expr::opaque_raw(x.name(), x.opaque_order(), go(x.arg()));
      case Kind::Power:
        return norm_pow(go(x.base()), go(x.exponent()));
      case Kind::Product: {
        Expr res = kOne;
        for (const Expr& k : x.kids()) res = mul2(res, go(k));
        return res;
      }
      case Kind::Sum: {
        ExprList out;
        for (const Expr& k : x.kids()) out.push_back(go(k));
        return norm_sum(std::move(out));
      }
    }
    return x;
  };
  return go(normalize(e));
}

// ---------------------------------------------------------------- polynomial

bool is_polynomial_in(const Expr& e, const std::vector<std::string>& vars) {
  auto touches = [&](const Expr& x) {
    for (const std::string& v : vars)
      if (depends_on(x, v)) return true;
    return false;
  };
  std::function<bool(const Expr&)> go = [&](const Expr& x) -> bool {
    switch (x.kind()) {
      case Kind::Rational:
      case Kind::Symbol:
        return true;
      case Kind::Sum:
      case Kind::Product: {
        for (const Expr& k : x.kids())
          if (!go(k)) return false;
        return true;
      }
      case Kind::Power: {
        if (!touches(x.base())) return true;
        if (x.exponent().kind() != Kind::Rational) return false;
        const Rational& r = x.exponent().rat();
        return r.is_integer() && r.num >= 0 && go(x.base());
      }
      case Kind::Builtin:
      case Kind::Opaque:
        return !touches(x.arg());
    }
    return false;
  };
  return go(normalize(e));
}

// ------------------------------------------------------------ antiderivative

Expr antiderivative(const Expr& e, const std::string& var) {
  Expr n = normalize(e);
  ExprList terms =
      n.kind() == Kind::Sum ? n.kids() : ExprList{n};
  ExprList out;
  for (const Expr& t : terms) {
    auto [c, key] = split_term(t);
    ExprList fs = key.is_one_literal() ? ExprList{} : key_factors(key);
    ExprList free;
    ExprList dependent;
    for (const Expr& f : fs)
      (depends_on(f, var) ? dependent : free).push_back(f);
    if (dependent.size() > 1)
      throw UnsupportedCoefficient(
          "cannot integrate product of " + to_string(dependent[0]) + " and " +
          to_string(dependent[1]) + " in " + var);

    Expr integral;
    Expr x = Expr::symbol(var);
    if (dependent.empty()) {
      integral = x;
    } else {
      const Expr& f = dependent[0];
      if (f.kind() == Kind::Symbol && f.name() == var) {
        integral = mul2(Expr::rational(1, 2), norm_pow(x, Expr::integer(2)));
      } else if (f.kind() == Kind::Power && f.base().kind() == Kind::Symbol &&
                 f.base().name() == var &&
                 f.exponent().kind() == Kind::Rational) {
        Rational r = f.exponent().rat();
        if (r == Rational(-1, 1)) {
          integral = norm_builtin(BuiltinFn::Ln, x);
        } else {
          Rational r1 = r + Rational(1, 1);
          integral = mul2(Expr::rational(Rational(1, 1) / r1),
                          norm_pow(x, Expr::rational(r1)));
        }
      } else if (f.kind() == Kind::Opaque && f.opaque_order() >= 1 &&
                 f.arg().kind() == Kind::Symbol && f.arg().name() == var) {
        // k-th derivative of an undetermined function integrates to the
        // (k-1)-th.
        integral = Expr::opaque_raw(f.name(), f.opaque_order() - 1, f.arg());
      } else {
        throw UnsupportedCoefficient(
            "cannot integrate factor " + to_string(f) + " in " + var);
      }
    }
    Expr term = Expr::rational(c);
    for (const Expr& f : free) term = mul2(term, f);
    out.push_back(mul2(term, integral));
  }
  return norm_sum(std::move(out));
}

}  // namespace formlab

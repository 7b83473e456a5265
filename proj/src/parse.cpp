#include <cctype>
#include <sstream>

#include "formlab/scalar.hpp"

namespace formlab {

// ------------------------------------------------------------------ parser
//
// Grammar (bit-exact with the pretty-printer):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?            (right-assoc)
//   atom   := integer | ident | ident '(' expr ')' | '(' expr ')'
// Opaque derivative orders round-trip through a d<k>_ name prefix:
// d2_f(x) parses as the second derivative of f at x.

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(msg, pos);
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = Expr::sum_raw({lhs, parse_term()});
      else if (eat('-'))
        lhs = Expr::sum_raw(
            {lhs, Expr::product_raw({Expr::integer(-1), parse_term()})});
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = Expr::product_raw({lhs, parse_unary()});
      else if (eat('/'))
        lhs = Expr::product_raw(
            {lhs, Expr::pow_raw(parse_unary(), Expr::integer(-1))});
      else
        return lhs;
    }
  }

  Expr parse_unary() {
    if (eat('-'))
      return Expr::product_raw({Expr::integer(-1), parse_unary()});
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (eat('^')) return Expr::pow_raw(base, parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      std::size_t start = pos;
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos]))) {
        v = v * 10 + (text[pos] - '0');
        if (v < 0) throw SyntaxError("integer literal overflow", start);
        ++pos;
      }
      return Expr::integer(v);
    }
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_'))
        ++pos;
      std::string name(text.substr(start, pos - start));
      if (peek() == '(') {
        eat('(');
        Expr arg = parse_expr();
        if (!eat(')')) fail("expected ')' after function argument");
        if (name == "ln") return Expr::builtin_raw(BuiltinFn::Ln, arg);
        if (name == "exp") return Expr::builtin_raw(BuiltinFn::Exp, arg);
        if (name == "sin") return Expr::builtin_raw(BuiltinFn::Sin, arg);
        if (name == "cos") return Expr::builtin_raw(BuiltinFn::Cos, arg);
        // d<k>_name encodes a k-th derivative of an opaque function
        if (name.size() > 2 && name[0] == 'd' &&
            std::isdigit(static_cast<unsigned char>(name[1]))) {
          std::size_t i = 1;
          long long k = 0;
          while (i < name.size() &&
                 std::isdigit(static_cast<unsigned char>(name[i]))) {
            k = k * 10 + (name[i] - '0');
            ++i;
          }
          if (i < name.size() && name[i] == '_' && i + 1 < name.size())
            return Expr::opaque_raw(name.substr(i + 1), int(k), arg);
        }
        return Expr::opaque_raw(name, 0, arg);
      }
      return Expr::symbol(name);
    }
    throw UnknownToken(std::string("unknown token '") + c + "'", pos);
  }
};

}  // namespace

Expr parse_expr_raw(std::string_view text) {
  Parser p{text};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw SyntaxError("trailing input after expression", p.pos);
  return e;
}

Expr parse_expr(std::string_view text) { return normalize(parse_expr_raw(text)); }

// ----------------------------------------------------------------- printer

namespace {

// Precedence levels for parenthesization.
enum Prec { kSumP = 1, kProdP = 2, kPowP = 3, kAtomP = 4 };

std::string print(const Expr& e, int parent_prec);

std::string print_atom_call(const std::string& fname, const Expr& arg) {
  return fname + "(" + print(arg, kSumP) + ")";
}

// Splits a term for signed printing inside sums.
std::pair<bool, Expr> strip_sign(const Expr& t) {
  if (t.kind() == Kind::Rational && t.rat().num < 0)
    return {true, Expr::rational(-t.rat())};
  if (t.kind() == Kind::Product && t.kids()[0].kind() == Kind::Rational &&
      t.kids()[0].rat().num < 0) {
    ExprList kids = t.kids();
    Rational r = -kids[0].rat();
    if (r.is_one()) {
      kids.erase(kids.begin());
      return {true, kids.size() == 1 ? kids[0]
                                     : Expr::product_raw(std::move(kids))};
    }
    kids[0] = Expr::rational(r);
    return {true, Expr::product_raw(std::move(kids))};
  }
  return {false, t};
}

std::string print_rational(const Rational& r) {
  std::string s = std::to_string(r.num);
  if (!r.is_integer()) s += "/" + std::to_string(r.den);
  return s;
}

std::string print_power(const Expr& base, const Expr& exp) {
  std::string b = print(base, kPowP + 1);  // force parens below atoms
  if (base.kind() == Kind::Rational &&
      (!base.rat().is_integer() || base.rat().num < 0))
    b = "(" + b + ")";
  std::string x;
  if (exp.kind() == Kind::Rational && exp.rat().is_integer() &&
      exp.rat().num >= 0)
    x = print_rational(exp.rat());
  else if (exp.kind() == Kind::Symbol)
    x = exp.name();
  else
    x = "(" + print(exp, kSumP) + ")";
  return b + "^" + x;
}

std::string print_product(const Expr& e) {
  // Separate numerator and denominator by sign of rational exponents.
  Rational coeff(1, 1);
  std::vector<std::string> num_parts;
  std::vector<std::string> den_parts;
  ExprList factors = e.kind() == Kind::Product ? e.kids() : ExprList{e};
  for (const Expr& f : factors) {
    if (f.kind() == Kind::Rational) {
      coeff = coeff * f.rat();
      continue;
    }
    if (f.kind() == Kind::Power && f.exponent().kind() == Kind::Rational &&
        f.exponent().rat().num < 0) {
      Rational inv = -f.exponent().rat();
      if (inv.is_one())
        den_parts.push_back(print(f.base(), kPowP + 1));
      else
        den_parts.push_back(
            print_power(f.base(), Expr::rational(inv)));
      continue;
    }
    num_parts.push_back(print(f, kProdP + 1));
  }
  std::string prefix;
  long long num = coeff.num;
  if (num < 0 && num != -1) {
    num_parts.insert(num_parts.begin(), std::to_string(num));
  } else if (num == -1 && !num_parts.empty()) {
    prefix = "-";
  } else if (num != 1 || num_parts.empty()) {
    num_parts.insert(num_parts.begin(), std::to_string(num));
  }
  if (coeff.den != 1)
    den_parts.insert(den_parts.begin(), std::to_string(coeff.den));
  std::string out = prefix;
  for (std::size_t i = 0; i < num_parts.size(); ++i) {
    if (i) out += "*";
    out += num_parts[i];
  }
  for (const std::string& d : den_parts) out += "/" + d;
  return out;
}

std::string print(const Expr& e, int parent_prec) {
  std::string s;
  int prec = kAtomP;
  switch (e.kind()) {
    case Kind::Rational:
      s = print_rational(e.rat());
      if (!e.rat().is_integer() || e.rat().num < 0) prec = kProdP;
      break;
    case Kind::Symbol:
      s = e.name();
      break;
    case Kind::Builtin:
      s = print_atom_call(builtin_name(e.fn()), e.arg());
      break;
    case Kind::Opaque: {
      std::string fname = e.name();
      if (e.opaque_order() > 0)
        fname = "d" + std::to_string(e.opaque_order()) + "_" + fname;
      s = print_atom_call(fname, e.arg());
      break;
    }
    case Kind::Power:
      s = print_power(e.base(), e.exponent());
      prec = kPowP;
      break;
    case Kind::Product:
      s = print_product(e);
      prec = kProdP;
      break;
    case Kind::Sum: {
      for (std::size_t i = 0; i < e.kids().size(); ++i) {
        auto [neg, t] = strip_sign(e.kids()[i]);
        if (i == 0)
          s += (neg ? "-" : "") + print(t, kSumP + 1);
        else
          s += (neg ? " - " : " + ") + print(t, kSumP + 1);
      }
      prec = kSumP;
      break;
    }
  }
  if (prec < parent_prec) return "(" + s + ")";
  return s;
}

}  // namespace

std::string to_string(const Expr& e) { return print(e, kSumP); }

}  // namespace formlab

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "formlab/errors.hpp"

namespace formlab {

// Exact rational with reduced representation, denominator > 0.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  static Rational integer(long long n) { return Rational(n, 1); }

  bool is_zero() const { return num == 0; }
  bool is_one() const { return num == 1 && den == 1; }
  bool is_integer() const { return den == 1; }
  double to_double() const { return double(num) / double(den); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const { return Rational(-num, den); }
  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  int compare(const Rational& o) const;
  // base^exp for integer exp (throws on 0^negative).
  Rational pow_int(long long exp) const;
};

enum class Kind { Rational, Symbol, Sum, Product, Power, Builtin, Opaque };

enum class BuiltinFn { Ln, Exp, Sin, Cos };

const char* builtin_name(BuiltinFn fn);

class Expr;
using ExprList = std::vector<Expr>;

// Immutable symbolic expression tree. Value type over a shared node.
class Expr {
 public:
  Expr();  // zero

  static Expr rational(Rational r);
  static Expr rational(long long num, long long den) {
    return rational(Rational(num, den));
  }
  static Expr integer(long long n) { return rational(Rational::integer(n)); }
  static Expr symbol(std::string name);
  // Raw constructors: no normalization applied.
  static Expr sum_raw(ExprList terms);
  static Expr product_raw(ExprList factors);
  static Expr pow_raw(Expr base, Expr exp);
  static Expr builtin_raw(BuiltinFn fn, Expr arg);
  static Expr opaque_raw(std::string name, int order, Expr arg);

  Kind kind() const;
  const Rational& rat() const;            // Kind::Rational
  const std::string& name() const;        // Symbol, Opaque
  int opaque_order() const;               // Opaque
  BuiltinFn fn() const;                   // Builtin
  const ExprList& kids() const;           // Sum, Product
  const Expr& base() const;               // Power
  const Expr& exponent() const;           // Power
  const Expr& arg() const;                // Builtin, Opaque

  bool is_rational(long long num, long long den = 1) const;
  bool is_zero_literal() const;
  bool is_one_literal() const;

  bool same(const Expr& o) const { return compare(o) == 0; }
  int compare(const Expr& o) const;
  bool operator<(const Expr& o) const { return compare(o) < 0; }
  bool operator==(const Expr& o) const { return same(o); }

  std::size_t hash() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Normalized arithmetic helpers (operands normalized on the way in).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exp);
Expr pow(const Expr& base, long long exp);
Expr fn(BuiltinFn f, const Expr& arg);
Expr opaque(const std::string& name, int order, const Expr& arg);

// Canonical normal form: flattened sorted sums/products, folded rationals,
// combined like terms and like bases, expanded integer powers of sums,
// fixed trig/exp/log rewrite table. Idempotent.
Expr normalize(const Expr& e);

Expr differentiate(const Expr& e, const std::string& var);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

double evaluate_numeric(const Expr& e,
                        const std::map<std::string, double>& bindings);

enum class ZeroVerdict { Zero, NonZero, Unknown };

const char* to_string(ZeroVerdict v);

// Zero only via exact normalization; NonZero via numeric sampling at 3
// deterministic rational points beyond 1e-9; Unknown otherwise.
ZeroVerdict is_zero(const Expr& e);

bool depends_on(const Expr& e, const std::string& var);
void collect_symbols(const Expr& e, std::set<std::string>& out);

// ln(a*b) -> ln a + ln b and ln(a^r) -> r ln a for bases that are declared
// positive (or positive rationals). Used where chart assumptions are known.
Expr expand_logs(const Expr& e, const std::set<std::string>& positive);

Expr parse_expr(std::string_view text);
// Raw AST without normalization; used where factor order is significant
// (differential products in the script front end).
Expr parse_expr_raw(std::string_view text);
std::string to_string(const Expr& e);

// Single-variable antiderivative over the rational+log table:
// sums of c * var^r * (factors free of var); var^-1 integrates to ln(var).
// Throws UnsupportedCoefficient outside the table.
Expr antiderivative(const Expr& e, const std::string& var);

// True when e is a polynomial in the given variables (other symbols are
// treated as constants and may appear with any exponent).
bool is_polynomial_in(const Expr& e, const std::vector<std::string>& vars);

}  // namespace formlab

#pragma once

#include <functional>
#include <optional>
#include <random>

#include "formlab/form.hpp"

namespace formlab::testing {

// Deterministic random polynomial expressions over the given symbols.
struct ExprGen {
  std::mt19937 rng;
  std::vector<std::string> symbols;

  explicit ExprGen(unsigned seed, std::vector<std::string> syms = {"x", "y", "z"})
      : rng(seed), symbols(std::move(syms)) {}

  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

  Expr polynomial(int depth) {
    int k = pick(0, depth > 0 ? 4 : 1);
    switch (k) {
      case 0:
        return Expr::rational(pick(-6, 6), pick(1, 4));
      case 1:
        return Expr::symbol(symbols[std::size_t(pick(0, int(symbols.size()) - 1))]);
      case 2: {
        ExprList kids;
        int n = pick(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(polynomial(depth - 1));
        return Expr::sum_raw(std::move(kids));
      }
      case 3: {
        ExprList kids;
        int n = pick(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(polynomial(depth - 1));
        return Expr::product_raw(std::move(kids));
      }
      default:
        return Expr::pow_raw(polynomial(depth - 1), Expr::integer(pick(1, 3)));
    }
  }

  // Mixed trees including builtins, opaques, and negative powers; for
  // normalization/round-trip properties rather than exact-zero checks.
  Expr mixed(int depth) {
    int k = pick(0, depth > 0 ? 6 : 1);
    switch (k) {
      case 0:
        return Expr::rational(pick(-6, 6), pick(1, 4));
      case 1:
        return Expr::symbol(symbols[std::size_t(pick(0, int(symbols.size()) - 1))]);
      case 2: {
        ExprList kids;
        int n = pick(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(mixed(depth - 1));
        return Expr::sum_raw(std::move(kids));
      }
      case 3: {
        ExprList kids;
        int n = pick(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(mixed(depth - 1));
        return Expr::product_raw(std::move(kids));
      }
      case 4:
        return Expr::pow_raw(mixed(depth - 1), Expr::integer(pick(-2, 3)));
      case 5: {
        BuiltinFn fns[] = {BuiltinFn::Sin, BuiltinFn::Cos, BuiltinFn::Exp,
                           BuiltinFn::Ln};
        return Expr::builtin_raw(fns[pick(0, 3)], mixed(depth - 1));
      }
      default:
        return Expr::opaque_raw(pick(0, 1) ? "f" : "g", pick(0, 2),
                                mixed(depth - 1));
    }
  }
};

// Random trees may hit kernel guards (0^-k, rational overflow); skip those.
inline std::optional<Expr> try_normalize(const Expr& e) {
  try {
    return normalize(e);
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const OverflowError&) {
    return std::nullopt;
  }
}

inline ChartPtr chart_n(int n) {
  std::vector<std::string> coords;
  const char* names[] = {"x", "y", "z", "w"};
  for (int i = 0; i < n; ++i) coords.push_back(names[i]);
  return make_chart(coords);
}

// Random polynomial-coefficient form of the given degree.
inline Form random_form(ExprGen& gen, ChartPtr chart, int degree) {
  Form f(std::move(chart), degree);
  int n = int(f.chart()->dim());
  // iterate all strictly increasing index tuples of the given length
  std::vector<int> idx(std::size_t(degree), 0);
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == degree) {
      if (gen.pick(0, 2) != 0)
        f.add_term(idx, gen.polynomial(2));
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[std::size_t(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return f;
}

}  // namespace formlab::testing

#include "formlab/script.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "formlab/characteristics.hpp"
#include "formlab/corpus.hpp"
#include "formlab/integrability.hpp"

namespace formlab {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ------------------------------------------------------------ line scanning

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line;

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError("line " + std::to_string(line) + ": " + msg, i);
  }
  std::string word() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            s[i] == '_' || s[i] == '-' || s[i] == '.' ||
                            s[i] == '+'))
      ++i;
    if (i == start) fail("expected a word");
    return s.substr(start, i - start);
  }
  std::string peek_word() {
    std::size_t save = i;
    if (done()) return "";
    std::size_t start = i;
    std::string w;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            s[i] == '_' || s[i] == '-'))
      ++i;
    w = s.substr(start, i - start);
    i = save;
    return w;
  }
  void expect(char c) {
    skip_ws();
    if (i >= s.size() || s[i] != c)
      fail(std::string("expected '") + c + "'");
    ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  // Reads a balanced (...) group, returns the inside.
  std::string group() {
    expect('(');
    int depth = 1;
    std::size_t start = i;
    while (i < s.size() && depth > 0) {
      if (s[i] == '(') ++depth;
      if (s[i] == ')') --depth;
      ++i;
    }
    if (depth != 0) fail("unbalanced parentheses");
    return s.substr(start, i - start - 1);
  }
  std::string rest() {
    skip_ws();
    std::string r = s.substr(i);
    i = s.size();
    while (!r.empty() && (r.back() == ' ' || r.back() == '\t')) r.pop_back();
    return r;
  }
  // Everything up to a top-level keyword (not inside parens); cursor left at
  // the keyword.
  std::string until_keyword(const std::vector<std::string>& kws) {
    skip_ws();
    std::size_t start = i;
    int depth = 0;
    std::size_t stop = s.size();
    for (std::size_t k = i; k < s.size(); ++k) {
      if (s[k] == '(') ++depth;
      if (s[k] == ')') --depth;
      if (depth == 0 &&
          (k == 0 || !(std::isalnum(static_cast<unsigned char>(s[k - 1])) ||
                       s[k - 1] == '_'))) {
        for (const std::string& kw : kws) {
          if (s.compare(k, kw.size(), kw) == 0 &&
              (k + kw.size() == s.size() ||
               !(std::isalnum(static_cast<unsigned char>(s[k + kw.size()])) ||
                 s[k + kw.size()] == '_'))) {
            stop = k;
            goto found;
          }
        }
      }
    }
  found:
    std::string r = s.substr(start, stop - start);
    i = stop;
    while (!r.empty() && (r.back() == ' ' || r.back() == '\t')) r.pop_back();
    return r;
  }
};

std::vector<std::string> split_top_commas(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (std::string& p : out) {
    std::size_t a = p.find_first_not_of(" \t");
    std::size_t b = p.find_last_not_of(" \t");
    p = a == std::string::npos ? "" : p.substr(a, b - a + 1);
  }
  return out;
}

std::vector<std::string> name_list(const std::string& group, Cursor& cur) {
  std::vector<std::string> out;
  for (const std::string& p : split_top_commas(group)) {
    if (p.empty()) cur.fail("empty name in list");
    out.push_back(p);
  }
  return out;
}

// ------------------------------------------------- differential term scanner

bool is_differential(const Expr& e, const std::vector<std::string>& coords,
                     int* idx) {
  if (e.kind() != Kind::Symbol) return false;
  const std::string& n = e.name();
  if (n.size() < 2 || n[0] != 'd') return false;
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (n.substr(1) == coords[i]) {
      if (idx) *idx = int(i);
      return true;
    }
  return false;
}

bool contains_differential(const Expr& e,
                           const std::vector<std::string>& coords) {
  switch (e.kind()) {
    case Kind::Symbol:
      return is_differential(e, coords, nullptr);
    case Kind::Sum:
    case Kind::Product:
      for (const Expr& k : e.kids())
        if (contains_differential(k, coords)) return true;
      return false;
    case Kind::Power:
      return contains_differential(e.base(), coords) ||
             contains_differential(e.exponent(), coords);
    case Kind::Builtin:
    case Kind::Opaque:
      return contains_differential(e.arg(), coords);
    default:
      return false;
  }
}

struct FormTerm {
  std::vector<int> indices;  // in written order
  Expr coeff;                // raw (unnormalized)
};

std::vector<FormTerm> expand_form_terms(const Expr& e,
                                        const std::vector<std::string>& coords,
                                        Cursor& cur) {
  int idx;
  switch (e.kind()) {
    case Kind::Sum: {
      std::vector<FormTerm> out;
      for (const Expr& k : e.kids()) {
        auto sub = expand_form_terms(k, coords, cur);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case Kind::Product: {
      std::vector<FormTerm> acc{{{}, Expr::integer(1)}};
      for (const Expr& k : e.kids()) {
        auto sub = expand_form_terms(k, coords, cur);
        std::vector<FormTerm> next;
        for (const FormTerm& a : acc)
          for (const FormTerm& b : sub) {
            FormTerm t;
            t.indices = a.indices;
            t.indices.insert(t.indices.end(), b.indices.begin(),
                             b.indices.end());
            t.coeff = Expr::product_raw({a.coeff, b.coeff});
            next.push_back(std::move(t));
          }
        acc = std::move(next);
      }
      return acc;
    }
    case Kind::Symbol:
      if (is_differential(e, coords, &idx)) return {{{idx}, Expr::integer(1)}};
      return {{{}, e}};
    default:
      if (contains_differential(e, coords))
        cur.fail("differential used inside a power or function call");
      return {{{}, e}};
  }
}

// Builds a form from DSL right-hand-side text; all terms must share a degree.
Form build_form(ChartPtr chart, const std::string& rhs, Cursor& cur) {
  Expr raw;
  try {
    raw = parse_expr_raw(rhs);
  } catch (const SyntaxError& e) {
    cur.fail(e.what());
  }
  auto terms = expand_form_terms(raw, chart->coords(), cur);
  std::size_t degree = terms.empty() ? 0 : terms[0].indices.size();
  for (const FormTerm& t : terms)
    if (t.indices.size() != degree)
      throw DegreeError("line " + std::to_string(cur.line) +
                        ": mixed-degree terms in one form");
  if (degree > chart->dim())
    throw DegreeOutOfRange("line " + std::to_string(cur.line) +
                           ": form degree exceeds chart dimension");
  Form f(chart, int(degree));
  for (const FormTerm& t : terms) f.add_term(t.indices, normalize(t.coeff));
  return f;
}

int form_degree_static(const std::vector<std::string>& coords,
                       const std::string& rhs, Cursor& cur) {
  Expr raw;
  try {
    raw = parse_expr_raw(rhs);
  } catch (const SyntaxError& e) {
    cur.fail(e.what());
  }
  auto terms = expand_form_terms(raw, coords, cur);
  std::size_t degree = terms.empty() ? 0 : terms[0].indices.size();
  for (const FormTerm& t : terms)
    if (t.indices.size() != degree)
      throw DegreeError("line " + std::to_string(cur.line) +
                        ": mixed-degree terms in one form");
  if (degree > coords.size())
    throw DegreeOutOfRange("line " + std::to_string(cur.line) +
                           ": form degree exceeds chart dimension");
  return int(degree);
}

// -------------------------------------------------------------- static pass

struct StaticEnv {
  std::vector<std::vector<std::string>> charts;
  std::vector<std::string> last_chart;
  std::set<std::string> names;
  std::map<std::string, std::pair<int, int>> forms;  // degree, dim
  std::map<std::string, int> connections;            // dim
  std::map<std::string, int> metrics;                // dim
  std::set<std::string> pdes;

  void declare(Cursor& cur, const std::string& name) {
    if (!names.insert(name).second)
      cur.fail("name already declared: " + name);
  }

  std::pair<int, int> form(Cursor& cur, const std::string& name) {
    auto it = forms.find(name);
    if (it == forms.end()) throw UndeclaredName(name);
    (void)cur;
    return it->second;
  }

  void require_chart(const std::vector<std::string>& coords) {
    for (const auto& c : charts)
      if (c == coords) return;
    std::string key;
    for (const std::string& c : coords) key += (key.empty() ? "" : ",") + c;
    throw UndeclaredName("chart (" + key + ")");
  }
};

struct ParsedClauses {
  std::string name;
  std::string rhs;
  std::vector<std::string> on;
};

std::vector<std::string> parse_coord_group(Cursor& cur) {
  std::vector<std::string> out = name_list(cur.group(), cur);
  if (out.empty()) cur.fail("empty coordinate list");
  return out;
}

// Statically checks one statement and updates the environment. Mirrors the
// runtime dispatch below; keep the two in sync.
void static_check(StaticEnv& env, const Statement& st) {
  Cursor cur{st.text, 0, st.line};
  std::string verb = cur.word();

  auto coords_or_last = [&](const std::vector<std::string>& on)
      -> std::vector<std::string> {
    if (!on.empty()) {
      env.require_chart(on);
      return on;
    }
    if (env.last_chart.empty()) cur.fail("no chart declared yet");
    return env.last_chart;
  };
  auto opt_on = [&](const char* kw) -> std::vector<std::string> {
    if (cur.peek_word() == kw) {
      cur.word();
      return parse_coord_group(cur);
    }
    return {};
  };
  auto as_binding = [&]() -> std::string {
    if (cur.peek_word() == "as") {
      cur.word();
      return cur.word();
    }
    return "";
  };
  auto bind_form = [&](const std::string& name, int degree, int dim) {
    if (name.empty()) return;
    env.declare(cur, name);
    env.forms[name] = {degree, dim};
  };
  auto need_form = [&](const std::string& name) {
    return env.form(cur, name);
  };

  if (verb == "chart") {
    std::vector<std::string> coords = parse_coord_group(cur);
    if (cur.peek_word() == "params") {
      cur.word();
      parse_coord_group(cur);
    }
    if (cur.peek_word() == "assume") {
      cur.word();
      cur.rest();
    }
    env.charts.push_back(coords);
    env.last_chart = coords;
  } else if (verb == "form") {
    std::string name = cur.word();
    cur.expect('=');
    std::string rhs = cur.until_keyword({"on"});
    std::vector<std::string> on = opt_on("on");
    std::vector<std::string> coords = coords_or_last(on);
    int deg = form_degree_static(coords, rhs, cur);
    env.declare(cur, name);
    env.forms[name] = {deg, int(coords.size())};
  } else if (verb == "connection") {
    std::string name = cur.word();
    std::vector<std::string> on = opt_on("on");
    std::vector<std::string> coords = coords_or_last(on);
    env.declare(cur, name);
    env.connections[name] = int(coords.size());
  } else if (verb == "set") {
    std::string name = cur.word();
    auto it = env.connections.find(name);
    if (it == env.connections.end()) throw UndeclaredName(name);
    int n = it->second;
    for (int k = 0; k < 3; ++k) {
      std::string w = cur.word();
      int v = std::atoi(w.c_str());
      if (v < 1 || v > n) cur.fail("connection index out of range: " + w);
    }
    cur.expect('=');
    parse_expr(cur.rest());
  } else if (verb == "metric") {
    std::string name = cur.word();
    std::vector<std::string> on = opt_on("on");
    std::vector<std::string> coords = coords_or_last(on);
    cur.expect('=');
    std::string rows = cur.group();
    auto row_list = split_top_commas(rows);
    if (row_list.size() != coords.size())
      cur.fail("metric row count does not match chart dimension");
    for (const std::string& row : row_list) {
      Cursor rcur{row, 0, st.line};
      std::string inner = rcur.group();
      auto entries = split_top_commas(inner);
      if (entries.size() != coords.size())
        cur.fail("metric column count does not match chart dimension");
      for (const std::string& e : entries) parse_expr(e);
    }
    env.declare(cur, name);
    env.metrics[name] = int(coords.size());
  } else if (verb == "pde") {
    std::string name = cur.word();
    cur.expect('=');
    std::string rhs = cur.until_keyword({"vars"});
    if (cur.peek_word() != "vars") cur.fail("pde needs a vars (...) clause");
    cur.word();
    std::vector<std::string> vars = parse_coord_group(cur);
    parse_expr(rhs);
    if (vars.empty()) cur.fail("pde needs at least one variable");
    env.declare(cur, name);
    env.pdes.insert(name);
  } else if (verb == "wedge") {
    auto a = need_form(cur.word());
    auto b = need_form(cur.word());
    if (a.second != b.second) cur.fail("wedge operands on different charts");
    if (a.first + b.first > a.second)
      throw DegreeOutOfRange("line " + std::to_string(st.line) +
                             ": wedge degree exceeds chart dimension");
    bind_form(as_binding(), a.first + b.first, a.second);
  } else if (verb == "d") {
    auto a = need_form(cur.word());
    bind_form(as_binding(), a.first + 1, a.second);
  } else if (verb == "closed" || verb == "commutator" || verb == "classify") {
    need_form(cur.word());
    if (cur.peek_word() == "with") {
      cur.word();
      std::string c = cur.word();
      if (!env.connections.count(c)) throw UndeclaredName(c);
    }
  } else if (verb == "potential") {
    auto a = need_form(cur.word());
    if (a.first < 1)
      throw DegreeOutOfRange("line " + std::to_string(st.line) +
                             ": potential of a 0-form");
    bind_form(as_binding(), a.first - 1, a.second);
  } else if (verb == "star") {
    auto a = need_form(cur.word());
    if (cur.peek_word() == "diag") {
      cur.word();
      auto entries = split_top_commas(cur.group());
      if (int(entries.size()) != a.second)
        cur.fail("diag length does not match chart dimension");
      for (const std::string& e : entries) parse_expr(e);
    }
    if (a.first > a.second)
      throw DegreeOutOfRange("line " + std::to_string(st.line) +
                             ": star of a form above top degree");
    bind_form(as_binding(), a.second - a.first, a.second);
  } else if (verb == "pullback") {
    auto a = need_form(cur.word());
    if (cur.peek_word() != "onto") cur.fail("pullback needs onto (...)");
    cur.word();
    std::vector<std::string> target = parse_coord_group(cur);
    env.require_chart(target);
    if (cur.peek_word() != "map") cur.fail("pullback needs map (...)");
    cur.word();
    auto entries = split_top_commas(cur.group());
    if (int(entries.size()) != a.second)
      cur.fail("map must give one expression per source coordinate");
    for (const std::string& e : entries) parse_expr(e);
    bind_form(as_binding(), a.first, int(target.size()));
  } else if (verb == "restrict" || verb == "descend") {
    auto a = need_form(cur.word());
    if (cur.peek_word() != "by") cur.fail(verb + " needs by (coord = expr, ...)");
    cur.word();
    auto entries = split_top_commas(cur.group());
    for (const std::string& e : entries) {
      std::size_t eq = e.find('=');
      if (eq == std::string::npos) cur.fail("constraint must be coord = expr");
      parse_expr(e.substr(eq + 1));
    }
    int dim = a.second - int(entries.size());
    if (dim < 1)
      cur.fail("constraints leave no coordinates");
    bind_form(as_binding(), verb == "restrict" ? a.first : a.first - 1, dim);
  } else if (verb == "frobenius" || verb == "intfactor") {
    auto a = need_form(cur.word());
    if (a.first != 1)
      throw DegreeOutOfRange("line " + std::to_string(st.line) + ": " + verb +
                             " needs a 1-form");
  } else if (verb == "char") {
    std::string p = cur.word();
    if (!env.pdes.count(p)) throw UndeclaredName(p);
    if (cur.peek_word() != "init") cur.fail("char needs init (...)");
    cur.word();
    cur.group();
    if (cur.peek_word() != "h") cur.fail("char needs h <step>");
    cur.word();
    cur.word();
    if (cur.peek_word() != "send") cur.fail("char needs send <s_end>");
    cur.word();
    cur.word();
    if (cur.peek_word() == "csv") {
      cur.word();
      if (cur.rest().empty()) cur.fail("csv needs a path");
    }
  } else if (verb == "corpus") {
    if (cur.word() != "run") cur.fail("expected: corpus run <case>");
    std::string which = cur.word();
    if (which != "all" && which != "thermo" && which != "gas" && which != "em")
      cur.fail("unknown corpus case: " + which);
  } else if (verb == "metric-report") {
    std::string m = cur.word();
    if (!env.metrics.count(m)) throw UndeclaredName(m);
    if (cur.peek_word() == "with") {
      cur.word();
      std::string c = cur.word();
      if (!env.connections.count(c)) throw UndeclaredName(c);
    }
  } else {
    cur.fail("unknown statement: " + verb);
  }
  if (!cur.done()) cur.fail("trailing input");
}

}  // namespace

Script parse_script(const std::string& text) {
  Script script;
  StaticEnv env;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    Statement st;
    st.line = lineno;
    st.text = line.substr(a, b - a + 1);
    Cursor cur{st.text, 0, lineno};
    st.verb = cur.peek_word();
    script.statements.push_back(st);
  }
  for (const Statement& st : script.statements) static_check(env, st);
  return script;
}

// ------------------------------------------------------------------ runtime

namespace {

struct RuntimeEnv {
  std::vector<ChartPtr> charts;
  ChartPtr last_chart;
  std::set<std::string> params;
  std::set<std::string> positive;
  std::map<std::string, Form> forms;
  std::map<std::string, Connection> connections;
  std::map<std::string, Metric> metrics;
  std::map<std::string, FirstOrderPDE> pdes;

  ChartPtr declare_chart(const std::vector<std::string>& coords) {
    for (const ChartPtr& c : charts)
      if (c->coords() == coords) return c;
    ChartPtr c = make_chart(coords, params, positive);
    charts.push_back(c);
    return c;
  }

  // on/onto clauses may only reference charts declared earlier.
  ChartPtr find_chart(const std::vector<std::string>& coords) {
    for (const ChartPtr& c : charts)
      if (c->coords() == coords) return c;
    std::string key;
    for (const std::string& c : coords) key += (key.empty() ? "" : ",") + c;
    throw UndeclaredName("chart (" + key + ")");
  }
};

json json_form(const Form& f) {
  json terms = json::array();
  for (const auto& [idx, c] : f.terms()) {
    json t;
    t["indices"] = idx;
    t["coeff"] = to_string(c);
    terms.push_back(t);
  }
  json out;
  out["degree"] = f.degree();
  out["terms"] = terms;
  return out;
}

json json_commutator(const Commutator1& k) {
  json rows = json::array();
  for (const auto& row : k.k) {
    json r = json::array();
    for (const Expr& e : row) r.push_back(to_string(e));
    rows.push_back(r);
  }
  return rows;
}

json json_relation(const Relation& r) {
  json out;
  out["label"] = r.lhs_label;
  out["status"] = r.status == RelationStatus::Identical ? "identical"
                                                        : "nonidentical";
  out["unproven"] = r.unproven;
  out["rhs"] = json_form(r.rhs);
  if (r.potential) out["potential"] = json_form(*r.potential);
  if (r.residual_form) out["residual"] = json_form(*r.residual_form);
  if (r.residual_comm)
    out["residual_commutator"] = json_commutator(*r.residual_comm);
  return out;
}

json json_report(const CaseReport& rep) {
  json checks = json::array();
  for (const Check& c : rep.checks) {
    json e;
    e["name"] = c.name;
    e["detail"] = c.detail;
    e["pass"] = c.pass;
    checks.push_back(e);
  }
  json rels = json::array();
  for (const Relation& r : rep.relations) rels.push_back(json_relation(r));
  json out;
  out["case_id"] = rep.case_id;
  out["checks"] = checks;
  out["relations"] = rels;
  return out;
}

std::string relation_text(const Relation& r) {
  std::string s = r.lhs_label + ": ";
  s += r.status == RelationStatus::Identical ? "identical" : "nonidentical";
  if (r.unproven) s += " (unproven)";
  if (r.potential) s += ", potential " + to_string(*r.potential);
  if (r.residual_form) s += ", residual " + to_string(*r.residual_form);
  return s;
}

struct Executor {
  RuntimeEnv env;
  OutputMode mode;
  std::ostream& out;
  bool color;
  bool failed = false;

  std::string mark(bool ok) {
    if (!color) return ok ? "ok" : "FAIL";
    return ok ? "\x1b[32mok\x1b[0m" : "\x1b[31mFAIL\x1b[0m";
  }

  void emit(json& j, int line, const std::string& verb) {
    j["schema"] = 1;
    j["line"] = line;
    j["verb"] = verb;
    out << j.dump() << "\n";
  }

  ChartPtr coords_or_last(Cursor& cur, const std::vector<std::string>& on) {
    if (!on.empty()) return env.find_chart(on);
    if (!env.last_chart) cur.fail("no chart declared yet");
    return env.last_chart;
  }

  const Form& need_form(const std::string& name) {
    auto it = env.forms.find(name);
    if (it == env.forms.end()) throw UndeclaredName(name);
    return it->second;
  }

  const Connection* opt_connection(Cursor& cur) {
    if (cur.peek_word() == "with") {
      cur.word();
      std::string name = cur.word();
      auto it = env.connections.find(name);
      if (it == env.connections.end()) throw UndeclaredName(name);
      return &it->second;
    }
    return nullptr;
  }

  std::string opt_as(Cursor& cur) {
    if (cur.peek_word() == "as") {
      cur.word();
      return cur.word();
    }
    return "";
  }

  void bind(const std::string& name, Form f) {
    if (!name.empty()) env.forms.insert_or_assign(name, std::move(f));
  }

  void report_form(Cursor& cur, const std::string& verb, const Form& f,
                   const std::string& bound) {
    if (mode == OutputMode::Json) {
      json j;
      j["result"] = json_form(f);
      if (!bound.empty()) j["as"] = bound;
      emit(j, cur.line, verb);
    } else {
      out << verb << (bound.empty() ? "" : " as " + bound) << ": "
          << to_string(f) << "\n";
    }
  }

  std::vector<std::pair<std::string, Expr>> parse_constraints(Cursor& cur) {
    std::vector<std::pair<std::string, Expr>> out_c;
    for (const std::string& e : split_top_commas(cur.group())) {
      std::size_t eq = e.find('=');
      if (eq == std::string::npos) cur.fail("constraint must be coord = expr");
      std::string coord = e.substr(0, eq);
      std::size_t a = coord.find_first_not_of(" \t");
      std::size_t b = coord.find_last_not_of(" \t");
      coord = coord.substr(a, b - a + 1);
      out_c.emplace_back(coord, parse_expr(e.substr(eq + 1)));
    }
    return out_c;
  }

  void exec(const Statement& st) {
    Cursor cur{st.text, 0, st.line};
    std::string verb = cur.word();

    auto opt_on = [&](const char* kw) -> std::vector<std::string> {
      if (cur.peek_word() == kw) {
        cur.word();
        return name_list(cur.group(), cur);
      }
      return {};
    };

    if (verb == "chart") {
      std::vector<std::string> coords = name_list(cur.group(), cur);
      if (cur.peek_word() == "params") {
        cur.word();
        for (const std::string& p : name_list(cur.group(), cur))
          env.params.insert(p);
      }
      if (cur.peek_word() == "assume") {
        cur.word();
        for (const std::string& a : split_top_commas(cur.rest())) {
          std::size_t gt = a.find('>');
          if (gt == std::string::npos || a.substr(gt + 1) != "0")
            cur.fail("only 'sym>0' assumptions are supported");
          std::string sym = a.substr(0, gt);
          std::size_t x = sym.find_last_not_of(" \t");
          env.positive.insert(sym.substr(0, x + 1));
        }
      }
      env.last_chart = env.declare_chart(coords);
    } else if (verb == "form") {
      std::string name = cur.word();
      cur.expect('=');
      std::string rhs = cur.until_keyword({"on"});
      ChartPtr chart = coords_or_last(cur, opt_on("on"));
      env.forms.insert_or_assign(name, build_form(chart, rhs, cur));
    } else if (verb == "connection") {
      std::string name = cur.word();
      ChartPtr chart = coords_or_last(cur, opt_on("on"));
      env.connections.insert_or_assign(name, Connection(chart));
    } else if (verb == "set") {
      std::string name = cur.word();
      Connection& c = env.connections.at(name);
      int s = std::atoi(cur.word().c_str());
      int a = std::atoi(cur.word().c_str());
      int b = std::atoi(cur.word().c_str());
      cur.expect('=');
      c.set(std::size_t(s - 1), std::size_t(a - 1), std::size_t(b - 1),
            parse_expr(cur.rest()));
    } else if (verb == "metric") {
      std::string name = cur.word();
      ChartPtr chart = coords_or_last(cur, opt_on("on"));
      cur.expect('=');
      std::vector<std::vector<Expr>> g;
      for (const std::string& row : split_top_commas(cur.group())) {
        Cursor rcur{row, 0, st.line};
        std::vector<Expr> r;
        for (const std::string& e : split_top_commas(rcur.group()))
          r.push_back(parse_expr(e));
        g.push_back(std::move(r));
      }
      env.metrics.insert_or_assign(name, Metric(chart, std::move(g)));
    } else if (verb == "pde") {
      std::string name = cur.word();
      cur.expect('=');
      std::string rhs = cur.until_keyword({"vars"});
      cur.word();  // vars
      std::vector<std::string> vars = name_list(cur.group(), cur);
      env.pdes.insert_or_assign(
          name, FirstOrderPDE::make(vars, "u", parse_expr(rhs)));
    } else if (verb == "wedge") {
      const Form& a = need_form(cur.word());
      const Form& b = need_form(cur.word());
      Form r = wedge(a, b);
      std::string bound = opt_as(cur);
      report_form(cur, "wedge", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "d") {
      Form r = exterior_derivative(need_form(cur.word()));
      std::string bound = opt_as(cur);
      report_form(cur, "d", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "closed") {
      std::string name = cur.word();
      const Form& a = need_form(name);
      const Connection* conn = opt_connection(cur);
      ClosureResult res = is_closed(a, conn);
      bool ok = res.verdict == ZeroVerdict::Zero;
      if (!ok) failed = true;
      if (mode == OutputMode::Json) {
        json j;
        j["form"] = name;
        j["verdict"] = to_string(res.verdict);
        if (res.residual_form) j["residual"] = json_form(*res.residual_form);
        if (res.residual_comm)
          j["residual_commutator"] = json_commutator(*res.residual_comm);
        j["pass"] = ok;
        emit(j, st.line, "closed");
      } else {
        out << "closed " << name << ": " << to_string(res.verdict);
        if (res.residual_form && !res.residual_form->empty())
          out << " residual " << to_string(*res.residual_form);
        out << " [" << mark(ok) << "]\n";
      }
    } else if (verb == "potential") {
      Form r = potential(need_form(cur.word()));
      std::string bound = opt_as(cur);
      report_form(cur, "potential", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "star") {
      const Form& a = need_form(cur.word());
      std::vector<Expr> diag;
      if (cur.peek_word() == "diag") {
        cur.word();
        for (const std::string& e : split_top_commas(cur.group()))
          diag.push_back(parse_expr(e));
      }
      Form r = hodge_star(a, diag);
      std::string bound = opt_as(cur);
      report_form(cur, "star", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "pullback") {
      const Form& a = need_form(cur.word());
      cur.word();  // onto
      ChartPtr target = env.find_chart(name_list(cur.group(), cur));
      cur.word();  // map
      std::vector<Expr> map_exprs;
      for (const std::string& e : split_top_commas(cur.group()))
        map_exprs.push_back(parse_expr(e));
      Form r = pullback(a, target, map_exprs);
      std::string bound = opt_as(cur);
      report_form(cur, "pullback", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "restrict") {
      const Form& a = need_form(cur.word());
      cur.word();  // by
      Form r = restrict_to_pseudostructure(a, parse_constraints(cur));
      std::string bound = opt_as(cur);
      report_form(cur, "restrict", r, bound);
      bind(bound, std::move(r));
    } else if (verb == "commutator") {
      std::string name = cur.word();
      const Form& a = need_form(name);
      const Connection* conn = opt_connection(cur);
      Commutator1 k = commutator_1form(a, conn);
      if (mode == OutputMode::Json) {
        json j;
        j["form"] = name;
        j["k"] = json_commutator(k);
        emit(j, st.line, "commutator");
      } else {
        out << "commutator " << name << ":\n";
        std::size_t n = a.chart()->dim();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j2 = i + 1; j2 < n; ++j2)
            out << "  K[" << a.chart()->coords()[i] << ","
                << a.chart()->coords()[j2] << "] = " << to_string(k.at(i, j2))
                << "\n";
      }
    } else if (verb == "classify") {
      std::string name = cur.word();
      const Form& a = need_form(name);
      const Connection* conn = opt_connection(cur);
      Relation r = classify_relation(name, a, conn);
      if (mode == OutputMode::Json) {
        json j;
        j["relation"] = json_relation(r);
        emit(j, st.line, "classify");
      } else {
        out << "classify " << relation_text(r) << "\n";
      }
    } else if (verb == "frobenius") {
      std::string name = cur.word();
      FrobeniusResult r = frobenius_test(need_form(name));
      if (mode == OutputMode::Json) {
        json j;
        j["form"] = name;
        j["verdict"] = to_string(r.verdict);
        j["product"] = json_form(r.product);
        emit(j, st.line, "frobenius");
      } else {
        out << "frobenius " << name << ": " << to_string(r.verdict)
            << " product " << to_string(r.product) << "\n";
      }
    } else if (verb == "intfactor") {
      std::string name = cur.word();
      IntegratingFactor r = find_integrating_factor(need_form(name));
      if (mode == OutputMode::Json) {
        json j;
        j["form"] = name;
        j["mu"] = to_string(r.mu);
        j["potential"] = to_string(r.potential);
        emit(j, st.line, "intfactor");
      } else {
        out << "intfactor " << name << ": mu = " << to_string(r.mu)
            << ", potential = " << to_string(r.potential) << "\n";
      }
    } else if (verb == "descend") {
      std::string name = cur.word();
      const Form& a = need_form(name);
      cur.word();  // by
      auto constraints = parse_constraints(cur);
      Relation r = classify_relation(name, a);
      DescentStep step = degree_descent(r, constraints);
      std::string bound = opt_as(cur);
      if (mode == OutputMode::Json) {
        json j;
        j["identical_on_pi"] = json_relation(step.identical_on_pi);
        j["next"] = json_relation(step.next);
        if (!bound.empty()) j["as"] = bound;
        emit(j, st.line, "descend");
      } else {
        out << "descend " << name << ":\n  on-structure "
            << relation_text(step.identical_on_pi) << "\n  next "
            << relation_text(step.next) << "\n";
      }
      bind(bound, step.next.rhs);
    } else if (verb == "char") {
      std::string name = cur.word();
      const FirstOrderPDE& pde = env.pdes.at(name);
      CharacteristicSystem sys = characteristic_system(pde);
      cur.word();  // init
      std::vector<double> vals;
      for (const std::string& v : split_top_commas(cur.group()))
        vals.push_back(evaluate_numeric(parse_expr(v), {}));
      cur.word();  // h
      double h = std::strtod(cur.word().c_str(), nullptr);
      cur.word();  // send
      double s_end = std::strtod(cur.word().c_str(), nullptr);
      std::string csv_path;
      if (cur.peek_word() == "csv") {
        cur.word();
        csv_path = cur.rest();  // paths may contain characters words exclude
      }
      std::size_t n = sys.space_vars.size();
      if (vals.size() != 2 * n && vals.size() != 2 * n + 1)
        cur.fail("init needs x values, p values, and optionally u");
      InitialState init;
      init.x.assign(vals.begin(), vals.begin() + long(n));
      init.p.assign(vals.begin() + long(n), vals.begin() + long(2 * n));
      init.u = vals.size() == 2 * n + 1 ? vals.back() : 0.0;
      Trajectory traj = integrate_characteristics(sys, init, s_end, h);
      VerifyReport rep = verify_along(pde, traj);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        f << "s";
        for (const std::string& v : sys.space_vars) f << "," << v;
        for (const std::string& p : sys.momenta) f << "," << p;
        f << ",u\n";
        for (const TrajectorySample& smp : traj.samples) {
          f << fmt_double(smp.s);
          for (double v : smp.x) f << "," << fmt_double(v);
          for (double v : smp.p) f << "," << fmt_double(v);
          f << "," << fmt_double(smp.u) << "\n";
        }
      }
      if (mode == OutputMode::Json) {
        json sysj;
        json dx = json::array(), dp = json::array();
        for (const Expr& e : sys.dx) dx.push_back(to_string(e));
        for (const Expr& e : sys.dp) dp.push_back(to_string(e));
        sysj["dx"] = dx;
        sysj["dp"] = dp;
        sysj["du"] = to_string(sys.du);
        json j;
        j["system"] = sysj;
        json res;
        res["F"] = fmt_double(rep.max_f_residual);
        res["theta"] = fmt_double(rep.max_theta_residual);
        j["residuals"] = res;
        j["singular_point"] = traj.singular_point;
        if (!csv_path.empty()) j["samples_path"] = csv_path;
        emit(j, st.line, "char");
      } else {
        out << "char " << name << ": F residual "
            << fmt_double(rep.max_f_residual) << ", theta residual "
            << fmt_double(rep.max_theta_residual) << "\n";
      }
    } else if (verb == "corpus") {
      cur.word();  // run
      std::string which = cur.word();
      std::vector<CaseReport> reports = run_corpus(which);
      bool all = true;
      for (const CaseReport& r : reports) all = all && r.all_pass();
      if (!all) failed = true;
      if (mode == OutputMode::Json) {
        json cases = json::array();
        for (const CaseReport& r : reports) cases.push_back(json_report(r));
        json j;
        j["cases"] = cases;
        j["pass"] = all;
        emit(j, st.line, "corpus");
      } else {
        for (const CaseReport& r : reports) {
          out << "case " << r.case_id << ":\n";
          for (const Check& c : r.checks)
            out << "  " << c.name << ": " << c.detail << " ["
                << mark(c.pass) << "]\n";
        }
      }
    } else if (verb == "metric-report") {
      std::string name = cur.word();
      const Metric& g = env.metrics.at(name);
      const Connection* conn = opt_connection(cur);
      Connection derived = conn ? *conn : christoffel(g);
      MetricClosureReport rep =
          metric_closure_report(*g.chart(), g, derived);
      if (mode == OutputMode::Json) {
        json j;
        j["metric"] = name;
        j["metric_symmetric"] = to_string(rep.metric_symmetric);
        j["torsion_zero"] = to_string(rep.torsion_zero);
        j["curvature_zero"] = to_string(rep.curvature_zero);
        emit(j, st.line, "metric-report");
      } else {
        out << "metric-report " << name
            << ": symmetric " << to_string(rep.metric_symmetric)
            << ", torsion " << to_string(rep.torsion_zero)
            << ", curvature " << to_string(rep.curvature_zero) << "\n";
      }
    } else {
      cur.fail("unknown statement: " + verb);
    }
  }
};

}  // namespace

int run_script(const Script& script, OutputMode mode, std::ostream& out) {
  const char* colorenv = std::getenv("FORMLAB_COLOR");
  bool color = colorenv && std::string(colorenv) == "1" &&
               mode == OutputMode::Text;
  Executor ex{RuntimeEnv{}, mode, out, color};
  for (const Statement& st : script.statements) {
    try {
      ex.exec(st);
    } catch (const Error& e) {
      if (mode == OutputMode::Json) {
        json j;
        j["error"] = e.what();
        ex.emit(j, st.line, st.verb);
      } else {
        out << "error at line " << st.line << ": " << e.what() << "\n";
      }
      return 2;
    }
  }
  return ex.failed ? 1 : 0;
}

}  // namespace formlab

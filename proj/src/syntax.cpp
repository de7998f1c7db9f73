#include "ipf/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ipf {

std::string to_string(SystemId s) {
  switch (s) {
    case SystemId::IPF: return "ipf";
    case SystemId::IPF_I: return "ipf-i";
    case SystemId::IPF_iota: return "ipf-iota";
    case SystemId::IPF_IR: return "ipf-ir";
    case SystemId::IPF_iotaR: return "ipf-iotar";
  }
  return "ipf";
}

SystemId system_from_string(const std::string& s) {
  if (s == "ipf") return SystemId::IPF;
  if (s == "ipf-i") return SystemId::IPF_I;
  if (s == "ipf-iota") return SystemId::IPF_iota;
  if (s == "ipf-ir") return SystemId::IPF_IR;
  if (s == "ipf-iotar") return SystemId::IPF_iotaR;
  throw ParseError("SyntaxError", 0, "unknown system '" + s + "'");
}

TermPtr mk_const(std::string name) { return std::make_shared<Term>(TermKind::Const, std::move(name)); }
TermPtr mk_param(std::string name) { return std::make_shared<Term>(TermKind::Param, std::move(name)); }
TermPtr mk_var(std::string name) { return std::make_shared<Term>(TermKind::Var, std::move(name)); }
TermPtr mk_iota(std::string var, FormulaPtr body) {
  return std::make_shared<Term>(TermKind::Iota, std::move(var), std::move(body));
}

static FormulaPtr mk(FormulaKind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}

FormulaPtr mk_atom(std::string pred, std::vector<TermPtr> args) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Atom;
  f->pred = std::move(pred);
  f->args = std::move(args);
  return f;
}

FormulaPtr mk_bottom() { return mk(FormulaKind::Bottom); }

FormulaPtr mk_eq(TermPtr lhs, TermPtr rhs) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Eq;
  f->lhs = std::move(lhs);
  f->rhs = std::move(rhs);
  return f;
}

FormulaPtr mk_exists_bang(TermPtr arg) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::ExistsBang;
  f->lhs = std::move(arg);
  return f;
}

static FormulaPtr mk_bin(FormulaKind k, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr mk_and(FormulaPtr a, FormulaPtr b) { return mk_bin(FormulaKind::And, std::move(a), std::move(b)); }
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b) { return mk_bin(FormulaKind::Or, std::move(a), std::move(b)); }
FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b) { return mk_bin(FormulaKind::Imp, std::move(a), std::move(b)); }
FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b) { return mk_bin(FormulaKind::Iff, std::move(a), std::move(b)); }
FormulaPtr mk_not(FormulaPtr a) { return mk_imp(std::move(a), mk_bottom()); }

static FormulaPtr mk_quant(FormulaKind k, std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->bound_var = std::move(var);
  f->left = std::move(body);
  return f;
}

FormulaPtr mk_forall(std::string var, FormulaPtr body) {
  return mk_quant(FormulaKind::Forall, std::move(var), std::move(body));
}
FormulaPtr mk_exists(std::string var, FormulaPtr body) {
  return mk_quant(FormulaKind::Exists, std::move(var), std::move(body));
}

FormulaPtr mk_i(std::string var, FormulaPtr restrictor, FormulaPtr scope) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::IQuant;
  f->bound_var = std::move(var);
  f->left = std::move(restrictor);
  f->right = std::move(scope);
  return f;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

struct Token {
  enum Kind { LParen, RParen, Sym, End } kind;
  std::string text;
  std::size_t pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '!';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0, n = text.size();
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ';') {  // line comment
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({Token::LParen, "(", i});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::RParen, ")", i});
      ++i;
    } else if (c == '=') {
      out.push_back({Token::Sym, "=", i});
      ++i;
    } else if (c == ':' || ident_start(c)) {
      std::size_t start = i;
      if (c == ':') ++i;  // keyword arguments like :system
      while (i < n && ident_char(text[i])) ++i;
      if (i == start || (text[start] == ':' && i == start + 1))
        throw ParseError("SyntaxError", start, "bad token");
      out.push_back({Token::Sym, text.substr(start, i - start), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < n && ident_char(text[i])) ++i;
      out.push_back({Token::Sym, text.substr(start, i - start), start});
    } else {
      throw ParseError("SyntaxError", i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::End, "", n});
  return out;
}

const std::set<std::string> kFormulaKeywords = {"c",   "p",   "iota", "bot", "ex!", "and", "or",
                                                "imp", "iff", "not",  "all", "ex",  "I",   "="};

bool is_name(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return ident_char(c); }) &&
         kFormulaKeywords.find(s) == kFormulaKeywords.end();
}

struct FormulaParser {
  const std::vector<Token>& toks;
  std::size_t at = 0;
  SystemId mode;
  std::vector<std::string> bound;  // stack of in-scope bound variables

  const Token& peek() const { return toks[at]; }
  Token next() { return toks[at++]; }

  [[noreturn]] void fail(const std::string& msg, std::size_t pos) const {
    throw ParseError("SyntaxError", pos, msg);
  }

  void expect_rparen() {
    const Token& t = peek();
    if (t.kind != Token::RParen) fail("expected ')'", t.pos);
    ++at;
  }

  std::string expect_name(const char* what) {
    Token t = next();
    if (t.kind != Token::Sym || !is_name(t.text)) fail(std::string("expected ") + what, t.pos);
    return t.text;
  }

  // Constant and parameter names sit in an unambiguous position, so keyword
  // collisions like c or I are harmless there.
  std::string expect_plain_name(const char* what) {
    Token t = next();
    if (t.kind != Token::Sym || t.text.empty() || !ident_start(t.text[0]) ||
        !std::all_of(t.text.begin(), t.text.end(), [](char ch) { return ident_char(ch); }))
      fail(std::string("expected ") + what, t.pos);
    return t.text;
  }

  bool in_scope(const std::string& v) const {
    return std::find(bound.begin(), bound.end(), v) != bound.end();
  }

  TermPtr term() {
    Token t = next();
    if (t.kind == Token::Sym) {
      if (!is_name(t.text)) fail("expected a term", t.pos);
      if (!in_scope(t.text)) fail("unbound variable '" + t.text + "'", t.pos);
      return mk_var(t.text);
    }
    if (t.kind != Token::LParen) fail("expected a term", t.pos);
    Token head = next();
    if (head.kind != Token::Sym) fail("expected term head", head.pos);
    if (head.text == "c" || head.text == "p") {
      std::string name = expect_plain_name("a name");
      expect_rparen();
      return head.text == "c" ? mk_const(name) : mk_param(name);
    }
    if (head.text == "iota") {
      if (!system_has_iota(mode))
        throw ParseError("IotaNotAllowed", head.pos, "iota terms are not part of this system");
      std::string v = expect_name("a variable");
      bound.push_back(v);
      FormulaPtr body = formula();
      bound.pop_back();
      expect_rparen();
      return mk_iota(v, body);
    }
    fail("unknown term form '" + head.text + "'", head.pos);
  }

  FormulaPtr formula() {
    Token t = next();
    if (t.kind == Token::Sym) {
      if (t.text == "bot") return mk_bottom();
      fail("expected a formula", t.pos);
    }
    if (t.kind != Token::LParen) fail("expected a formula", t.pos);
    Token head = next();
    if (head.kind != Token::Sym) fail("expected formula head", head.pos);
    const std::string& h = head.text;
    if (h == "=") {
      TermPtr a = term(), b = term();
      expect_rparen();
      return mk_eq(a, b);
    }
    if (h == "ex!") {
      TermPtr a = term();
      expect_rparen();
      return mk_exists_bang(a);
    }
    if (h == "and" || h == "or" || h == "imp" || h == "iff") {
      FormulaPtr a = formula(), b = formula();
      expect_rparen();
      if (h == "and") return mk_and(a, b);
      if (h == "or") return mk_or(a, b);
      if (h == "imp") return mk_imp(a, b);
      return mk_iff(a, b);
    }
    if (h == "not") {
      FormulaPtr a = formula();
      expect_rparen();
      return mk_not(a);
    }
    if (h == "all" || h == "ex") {
      std::string v = expect_name("a variable");
      bound.push_back(v);
      FormulaPtr body = formula();
      bound.pop_back();
      expect_rparen();
      return h == "all" ? mk_forall(v, body) : mk_exists(v, body);
    }
    if (h == "I") {
      if (!system_has_i(mode))
        throw ParseError("INotAllowed", head.pos, "the binary quantifier I is not part of this system");
      std::string v = expect_name("a variable");
      bound.push_back(v);
      FormulaPtr restr = formula();
      FormulaPtr scope = formula();
      bound.pop_back();
      expect_rparen();
      return mk_i(v, restr, scope);
    }
    if (is_name(h)) {  // predicate application
      std::vector<TermPtr> args;
      while (peek().kind != Token::RParen && peek().kind != Token::End) args.push_back(term());
      expect_rparen();
      return mk_atom(h, std::move(args));
    }
    fail("unknown formula form '" + h + "'", head.pos);
  }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, SystemId mode) {
  auto toks = tokenize(text);
  FormulaParser p{toks, 0, mode, {}};
  FormulaPtr f = p.formula();
  if (p.peek().kind != Token::End)
    throw ParseError("SyntaxError", p.peek().pos, "trailing input after formula");
  if (mode == SystemId::IPF_IR && violates_i_restriction(f))
    throw ParseError("RestrictionViolation", 0, "I scope must be (ex! x) or (= x t)");
  if (mode == SystemId::IPF_iotaR && violates_iota_restriction(f))
    throw ParseError("RestrictionViolation", 0,
                     "iota terms may appear only under ex! or on one side of =");
  return f;
}

TermPtr parse_term(const std::string& text, SystemId mode) {
  auto toks = tokenize(text);
  FormulaParser p{toks, 0, mode, {}};
  TermPtr t = p.term();
  if (p.peek().kind != Token::End)
    throw ParseError("SyntaxError", p.peek().pos, "trailing input after term");
  return t;
}

// ---------------------------------------------------------------------------
// Printing

std::string print_term(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Const: return "(c " + t->name + ")";
    case TermKind::Param: return "(p " + t->name + ")";
    case TermKind::Var: return t->name;
    case TermKind::Iota: return "(iota " + t->name + " " + print_formula(t->body) + ")";
  }
  return "?";
}

std::string print_formula(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::string s = "(" + f->pred;
      for (auto& a : f->args) s += " " + print_term(a);
      return s + ")";
    }
    case FormulaKind::Bottom: return "bot";
    case FormulaKind::Eq: return "(= " + print_term(f->lhs) + " " + print_term(f->rhs) + ")";
    case FormulaKind::ExistsBang: return "(ex! " + print_term(f->lhs) + ")";
    case FormulaKind::And: return "(and " + print_formula(f->left) + " " + print_formula(f->right) + ")";
    case FormulaKind::Or: return "(or " + print_formula(f->left) + " " + print_formula(f->right) + ")";
    case FormulaKind::Imp:
      if (f->right->kind == FormulaKind::Bottom) return "(not " + print_formula(f->left) + ")";
      return "(imp " + print_formula(f->left) + " " + print_formula(f->right) + ")";
    case FormulaKind::Iff: return "(iff " + print_formula(f->left) + " " + print_formula(f->right) + ")";
    case FormulaKind::Forall: return "(all " + f->bound_var + " " + print_formula(f->left) + ")";
    case FormulaKind::Exists: return "(ex " + f->bound_var + " " + print_formula(f->left) + ")";
    case FormulaKind::IQuant:
      return "(I " + f->bound_var + " " + print_formula(f->left) + " " + print_formula(f->right) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Alpha equivalence

namespace {

using Env = std::vector<std::pair<std::string, std::string>>;

bool term_aeq(const TermPtr& a, const TermPtr& b, Env& env);

bool formula_aeq(const FormulaPtr& a, const FormulaPtr& b, Env& env) {
  if (a.get() == b.get() && env.empty()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom: {
      if (a->pred != b->pred || a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!term_aeq(a->args[i], b->args[i], env)) return false;
      return true;
    }
    case FormulaKind::Bottom: return true;
    case FormulaKind::Eq:
      return term_aeq(a->lhs, b->lhs, env) && term_aeq(a->rhs, b->rhs, env);
    case FormulaKind::ExistsBang: return term_aeq(a->lhs, b->lhs, env);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      return formula_aeq(a->left, b->left, env) && formula_aeq(a->right, b->right, env);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      env.emplace_back(a->bound_var, b->bound_var);
      bool ok = formula_aeq(a->left, b->left, env);
      env.pop_back();
      return ok;
    }
    case FormulaKind::IQuant: {
      env.emplace_back(a->bound_var, b->bound_var);
      bool ok = formula_aeq(a->left, b->left, env) && formula_aeq(a->right, b->right, env);
      env.pop_back();
      return ok;
    }
  }
  return false;
}

bool term_aeq(const TermPtr& a, const TermPtr& b, Env& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Const:
    case TermKind::Param: return a->name == b->name;
    case TermKind::Var: {
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        bool la = it->first == a->name, lb = it->second == b->name;
        if (la || lb) return la && lb;
      }
      return a->name == b->name;  // both free (should not happen in closed formulas)
    }
    case TermKind::Iota: {
      env.emplace_back(a->name, b->name);
      bool ok = formula_aeq(a->body, b->body, env);
      env.pop_back();
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_eq(const FormulaPtr& a, const FormulaPtr& b) {
  Env env;
  return formula_aeq(a, b, env);
}

bool term_alpha_eq(const TermPtr& a, const TermPtr& b) {
  Env env;
  return term_aeq(a, b, env);
}

// ---------------------------------------------------------------------------
// Substitution

TermPtr substitute_term(const TermPtr& s, const std::string& x, const TermPtr& t) {
  switch (s->kind) {
    case TermKind::Const:
    case TermKind::Param: return s;
    case TermKind::Var: return s->name == x ? t : s;
    case TermKind::Iota: {
      if (s->name == x) return s;  // shadowed
      FormulaPtr body = substitute(s->body, x, t);
      return body == s->body ? s : mk_iota(s->name, body);
    }
  }
  return s;
}

FormulaPtr substitute(const FormulaPtr& a, const std::string& x, const TermPtr& t) {
  switch (a->kind) {
    case FormulaKind::Atom: {
      bool changed = false;
      std::vector<TermPtr> args;
      args.reserve(a->args.size());
      for (auto& arg : a->args) {
        args.push_back(substitute_term(arg, x, t));
        changed |= args.back() != arg;
      }
      return changed ? mk_atom(a->pred, std::move(args)) : a;
    }
    case FormulaKind::Bottom: return a;
    case FormulaKind::Eq: {
      TermPtr l = substitute_term(a->lhs, x, t), r = substitute_term(a->rhs, x, t);
      return (l == a->lhs && r == a->rhs) ? a : mk_eq(l, r);
    }
    case FormulaKind::ExistsBang: {
      TermPtr l = substitute_term(a->lhs, x, t);
      return l == a->lhs ? a : mk_exists_bang(l);
    }
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff: {
      FormulaPtr l = substitute(a->left, x, t), r = substitute(a->right, x, t);
      return (l == a->left && r == a->right) ? a : mk_bin(a->kind, l, r);
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      if (a->bound_var == x) return a;  // shadowed
      FormulaPtr b = substitute(a->left, x, t);
      return b == a->left ? a : mk_quant(a->kind, a->bound_var, b);
    }
    case FormulaKind::IQuant: {
      if (a->bound_var == x) return a;
      FormulaPtr l = substitute(a->left, x, t), r = substitute(a->right, x, t);
      return (l == a->left && r == a->right) ? a : mk_i(a->bound_var, l, r);
    }
  }
  return a;
}

TermPtr substitute_param_term(const TermPtr& s, const std::string& p, const TermPtr& t) {
  switch (s->kind) {
    case TermKind::Const:
    case TermKind::Var: return s;
    case TermKind::Param: return s->name == p ? t : s;
    case TermKind::Iota: {
      FormulaPtr body = substitute_param(s->body, p, t);
      return body == s->body ? s : mk_iota(s->name, body);
    }
  }
  return s;
}

FormulaPtr substitute_param(const FormulaPtr& f, const std::string& p, const TermPtr& t) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      bool changed = false;
      std::vector<TermPtr> args;
      args.reserve(f->args.size());
      for (auto& arg : f->args) {
        args.push_back(substitute_param_term(arg, p, t));
        changed |= args.back() != arg;
      }
      return changed ? mk_atom(f->pred, std::move(args)) : f;
    }
    case FormulaKind::Bottom: return f;
    case FormulaKind::Eq: {
      TermPtr l = substitute_param_term(f->lhs, p, t), r = substitute_param_term(f->rhs, p, t);
      return (l == f->lhs && r == f->rhs) ? f : mk_eq(l, r);
    }
    case FormulaKind::ExistsBang: {
      TermPtr l = substitute_param_term(f->lhs, p, t);
      return l == f->lhs ? f : mk_exists_bang(l);
    }
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff: {
      FormulaPtr l = substitute_param(f->left, p, t), r = substitute_param(f->right, p, t);
      return (l == f->left && r == f->right) ? f : mk_bin(f->kind, l, r);
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      FormulaPtr b = substitute_param(f->left, p, t);
      return b == f->left ? f : mk_quant(f->kind, f->bound_var, b);
    }
    case FormulaKind::IQuant: {
      FormulaPtr l = substitute_param(f->left, p, t), r = substitute_param(f->right, p, t);
      return (l == f->left && r == f->right) ? f : mk_i(f->bound_var, l, r);
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Measures and occurrence sets

int degree(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Bottom:
    case FormulaKind::Eq:
    case FormulaKind::ExistsBang: return 0;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff: return 1 + degree(f->left) + degree(f->right);
    case FormulaKind::Forall:
    case FormulaKind::Exists: return 1 + degree(f->left);
    case FormulaKind::IQuant: return 1 + degree(f->left) + degree(f->right);
  }
  return 0;
}

namespace {

void collect_params_term(const TermPtr& t, std::set<std::string>& out);

void collect_params(const FormulaPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) collect_params_term(a, out);
      return;
    case FormulaKind::Bottom: return;
    case FormulaKind::Eq:
      collect_params_term(f->lhs, out);
      collect_params_term(f->rhs, out);
      return;
    case FormulaKind::ExistsBang: collect_params_term(f->lhs, out); return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
    case FormulaKind::IQuant:
      collect_params(f->left, out);
      collect_params(f->right, out);
      return;
    case FormulaKind::Forall:
    case FormulaKind::Exists: collect_params(f->left, out); return;
  }
}

void collect_params_term(const TermPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Param: out.insert(t->name); return;
    case TermKind::Iota: collect_params(t->body, out); return;
    default: return;
  }
}

void collect_free_term(const TermPtr& t, std::vector<std::string>& bound, std::set<std::string>& out);

void collect_free(const FormulaPtr& f, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args) collect_free_term(a, bound, out);
      return;
    case FormulaKind::Bottom: return;
    case FormulaKind::Eq:
      collect_free_term(f->lhs, bound, out);
      collect_free_term(f->rhs, bound, out);
      return;
    case FormulaKind::ExistsBang: collect_free_term(f->lhs, bound, out); return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      collect_free(f->left, bound, out);
      collect_free(f->right, bound, out);
      return;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      bound.push_back(f->bound_var);
      collect_free(f->left, bound, out);
      bound.pop_back();
      return;
    case FormulaKind::IQuant:
      bound.push_back(f->bound_var);
      collect_free(f->left, bound, out);
      collect_free(f->right, bound, out);
      bound.pop_back();
      return;
  }
}

void collect_free_term(const TermPtr& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var:
      if (std::find(bound.begin(), bound.end(), t->name) == bound.end()) out.insert(t->name);
      return;
    case TermKind::Iota:
      bound.push_back(t->name);
      collect_free(t->body, bound, out);
      bound.pop_back();
      return;
    default: return;
  }
}

}  // namespace

std::set<std::string> params_of(const FormulaPtr& f) {
  std::set<std::string> out;
  collect_params(f, out);
  return out;
}

std::set<std::string> params_of_term(const TermPtr& t) {
  std::set<std::string> out;
  collect_params_term(t, out);
  return out;
}

std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return out;
}

std::set<std::string> free_vars_term(const TermPtr& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free_term(t, bound, out);
  return out;
}

bool is_atomic(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
    case FormulaKind::Bottom:
    case FormulaKind::Eq:
    case FormulaKind::ExistsBang: return true;
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Restricted shapes

namespace {

bool term_contains_var(const TermPtr& t, const std::string& x) {
  auto fv = free_vars_term(t);
  return fv.count(x) > 0;
}

bool i_scope_ok(const FormulaPtr& i) {
  const FormulaPtr& scope = i->right;
  const std::string& x = i->bound_var;
  if (scope->kind == FormulaKind::ExistsBang)
    return scope->lhs->kind == TermKind::Var && scope->lhs->name == x;
  if (scope->kind == FormulaKind::Eq)
    return scope->lhs->kind == TermKind::Var && scope->lhs->name == x &&
           !term_contains_var(scope->rhs, x);
  return false;
}

bool term_contains_i(const TermPtr& t) {
  return t->kind == TermKind::Iota && contains_i(t->body);
}

bool term_violates_i(const TermPtr& t) {
  return t->kind == TermKind::Iota && violates_i_restriction(t->body);
}

}  // namespace

bool contains_i(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args)
        if (term_contains_i(a)) return true;
      return false;
    case FormulaKind::Bottom: return false;
    case FormulaKind::Eq: return term_contains_i(f->lhs) || term_contains_i(f->rhs);
    case FormulaKind::ExistsBang: return term_contains_i(f->lhs);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff: return contains_i(f->left) || contains_i(f->right);
    case FormulaKind::Forall:
    case FormulaKind::Exists: return contains_i(f->left);
    case FormulaKind::IQuant: return true;
  }
  return false;
}

bool contains_iota(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args)
        if (a->kind == TermKind::Iota) return true;
      return false;
    case FormulaKind::Bottom: return false;
    case FormulaKind::Eq: return f->lhs->kind == TermKind::Iota || f->rhs->kind == TermKind::Iota;
    case FormulaKind::ExistsBang: return f->lhs->kind == TermKind::Iota;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff: return contains_iota(f->left) || contains_iota(f->right);
    case FormulaKind::Forall:
    case FormulaKind::Exists: return contains_iota(f->left);
    case FormulaKind::IQuant: return contains_iota(f->left) || contains_iota(f->right);
  }
  return false;
}

std::optional<std::string> scan_i_restriction(const FormulaPtr& f) {
  static const std::string kScope = "RestrictedScope";
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args)
        if (term_violates_i(a)) return kScope;
      return std::nullopt;
    case FormulaKind::Bottom: return std::nullopt;
    case FormulaKind::Eq:
      if (term_violates_i(f->lhs) || term_violates_i(f->rhs)) return kScope;
      return std::nullopt;
    case FormulaKind::ExistsBang:
      if (term_violates_i(f->lhs)) return kScope;
      return std::nullopt;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      if (auto r = scan_i_restriction(f->left)) return r;
      return scan_i_restriction(f->right);
    case FormulaKind::Forall:
    case FormulaKind::Exists: return scan_i_restriction(f->left);
    case FormulaKind::IQuant:
      if (!i_scope_ok(f)) return kScope;
      if (contains_i(f->left)) return kScope;  // no nested binary quantifiers
      if (f->right->kind == FormulaKind::Eq && term_violates_i(f->right->rhs)) return kScope;
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> scan_iota_restriction(const FormulaPtr& f) {
  static const std::string kScope = "RestrictedScope";
  static const std::string kLeibniz = "RestrictedLeibniz";
  switch (f->kind) {
    case FormulaKind::Atom:
      for (auto& a : f->args)
        if (a->kind == TermKind::Iota) return kScope;  // iota directly in a predicate slot
      return std::nullopt;
    case FormulaKind::Bottom: return std::nullopt;
    case FormulaKind::Eq: {
      bool li = f->lhs->kind == TermKind::Iota, ri = f->rhs->kind == TermKind::Iota;
      // Both sides iota is out, except reflexive instances (t=t holds for any
      // term, and LL instantiated at the description itself produces them).
      if (li && ri && !term_alpha_eq(f->lhs, f->rhs)) return kLeibniz;
      if (li && contains_iota(f->lhs->body)) return kScope;  // no nested descriptions
      if (ri && contains_iota(f->rhs->body)) return kScope;
      if (li)
        if (auto r = scan_iota_restriction(f->lhs->body)) return r;
      if (ri)
        if (auto r = scan_iota_restriction(f->rhs->body)) return r;
      return std::nullopt;
    }
    case FormulaKind::ExistsBang:
      if (f->lhs->kind == TermKind::Iota) {
        if (contains_iota(f->lhs->body)) return kScope;
        return scan_iota_restriction(f->lhs->body);
      }
      return std::nullopt;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
    case FormulaKind::IQuant:
      if (auto r = scan_iota_restriction(f->left)) return r;
      return scan_iota_restriction(f->right);
    case FormulaKind::Forall:
    case FormulaKind::Exists: return scan_iota_restriction(f->left);
  }
  return std::nullopt;
}

bool violates_i_restriction(const FormulaPtr& f) { return scan_i_restriction(f).has_value(); }

bool violates_iota_restriction(const FormulaPtr& f) {
  return scan_iota_restriction(f).has_value();
}

}  // namespace ipf

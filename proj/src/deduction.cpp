#include "ipf/deduction.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace ipf {

// ---------------------------------------------------------------------------
// Rule metadata

namespace {

struct RuleRow {
  RuleId id;
  const char* name;
  RuleInfo info;
};

// arity, eigens, slots, eigen scope premises, discharge slot premises,
// intro?, elim?, del-rule C-minor premises
const std::vector<RuleRow>& rule_table() {
  static const std::vector<RuleRow> t = {
      {RuleId::AndI, "and-i", {2, 0, 0, {}, {}, true, false, {}}},
      {RuleId::AndEL, "and-el", {1, 0, 0, {}, {}, false, true, {}}},
      {RuleId::AndER, "and-er", {1, 0, 0, {}, {}, false, true, {}}},
      {RuleId::ImpI, "imp-i", {1, 0, 1, {}, {0}, true, false, {}}},
      {RuleId::ImpE, "imp-e", {2, 0, 0, {}, {}, false, true, {}}},
      {RuleId::OrIL, "or-il", {1, 0, 0, {}, {}, true, false, {}}},
      {RuleId::OrIR, "or-ir", {1, 0, 0, {}, {}, true, false, {}}},
      {RuleId::OrE, "or-e", {3, 0, 2, {}, {1, 2}, false, true, {1, 2}}},
      {RuleId::BotE, "bot-e", {1, 0, 0, {}, {}, false, true, {}}},
      {RuleId::IffI, "iff-i", {2, 0, 2, {}, {0, 1}, true, false, {}}},
      {RuleId::IffE1, "iff-e1", {2, 0, 0, {}, {}, false, true, {}}},
      {RuleId::IffE2, "iff-e2", {2, 0, 0, {}, {}, false, true, {}}},
      {RuleId::ForallI, "all-i", {1, 1, 1, {0}, {0}, true, false, {}}},
      {RuleId::ForallE, "all-e", {2, 0, 0, {}, {}, false, true, {}}},
      {RuleId::ExistsI, "ex-i", {2, 0, 0, {}, {}, true, false, {}}},
      {RuleId::ExistsE, "ex-e", {2, 1, 2, {1}, {1, 1}, false, true, {1}}},
      {RuleId::EqE, "eq-e", {2, 0, 0, {}, {}, false, true, {}}},
      {RuleId::II, "ii", {4, 1, 2, {3}, {3, 3}, true, false, {}}},
      {RuleId::IE1p, "ie1p", {5, 2, 5, {3, 4}, {3, 3, 4, 4, 4}, false, true, {4}}},
      {RuleId::IE2p, "ie2p", {6, 0, 0, {}, {}, false, true, {}}},
      {RuleId::IE3p, "ie3p", {2, 1, 2, {1}, {1, 1}, false, true, {1}}},
      {RuleId::IE4p, "ie4p", {5, 0, 0, {}, {}, false, true, {}}},
      {RuleId::IE5p, "ie5p", {3, 1, 2, {2}, {2, 2}, false, true, {2}}},
      {RuleId::IE1pPrime, "ie1p'", {3, 1, 3, {2}, {2, 2, 2}, false, true, {}}},
      {RuleId::IE2pPrime, "ie2p'", {5, 0, 0, {}, {}, false, true, {}}},
      {RuleId::IE4pPrime, "ie4p'", {4, 0, 0, {}, {}, false, true, {}}},
  };
  return t;
}

const RuleRow& row_of(RuleId r) {
  for (const auto& row : rule_table())
    if (row.id == r) return row;
  throw std::logic_error("unknown rule id");
}

}  // namespace

std::string rule_name(RuleId r) { return row_of(r).name; }

std::optional<RuleId> rule_from_name(const std::string& name) {
  for (const auto& row : rule_table())
    if (name == row.name) return row.id;
  return std::nullopt;
}

const RuleInfo& rule_info(RuleId r) { return row_of(r).info; }

// ---------------------------------------------------------------------------
// Construction

DeductionPtr mk_assume(std::string label, FormulaPtr f) {
  auto d = std::make_shared<Deduction>();
  d->node = NodeKind::Assume;
  d->label = std::move(label);
  d->conclusion = std::move(f);
  return d;
}

DeductionPtr mk_eqrefl(TermPtr t) {
  auto d = std::make_shared<Deduction>();
  d->node = NodeKind::EqRefl;
  d->term = t;
  d->conclusion = mk_eq(t, t);
  return d;
}

FormulaPtr ll_conclusion(const std::string& x, const std::string& y, const FormulaPtr& body) {
  auto lhs = mk_eq(mk_iota(x, body), mk_var(y));
  auto rhs = mk_forall(x, mk_iff(body, mk_eq(mk_var(x), mk_var(y))));
  return mk_forall(y, mk_iff(lhs, rhs));
}

DeductionPtr mk_ll(std::string x, std::string y, FormulaPtr body) {
  auto d = std::make_shared<Deduction>();
  d->node = NodeKind::LL;
  d->ll_x = std::move(x);
  d->ll_y = std::move(y);
  d->ll_body = body;
  d->conclusion = ll_conclusion(d->ll_x, d->ll_y, body);
  return d;
}

DeductionPtr mk_rule(RuleId r, FormulaPtr conclusion, std::vector<DeductionPtr> premises,
                     std::vector<std::string> discharges, std::vector<std::string> eigens) {
  auto d = std::make_shared<Deduction>();
  d->node = NodeKind::Rule;
  d->rule = r;
  d->conclusion = std::move(conclusion);
  d->premises = std::move(premises);
  d->discharges = std::move(discharges);
  d->eigens = std::move(eigens);
  return d;
}

// ---------------------------------------------------------------------------
// Positions

std::string position_string(const Position& pos) {
  if (pos.empty()) return "root";
  std::string out;
  for (size_t i = 0; i < pos.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(pos[i]);
  }
  return out;
}

DeductionPtr subtree_at(const DeductionPtr& d, const Position& pos) {
  DeductionPtr cur = d;
  for (int i : pos) {
    if (cur->node != NodeKind::Rule || i < 0 || i >= static_cast<int>(cur->premises.size()))
      throw std::out_of_range("no subtree at " + position_string(pos));
    cur = cur->premises[i];
  }
  return cur;
}

DeductionPtr replace_at(const DeductionPtr& d, const Position& pos, const DeductionPtr& sub) {
  if (pos.empty()) return sub;
  if (d->node != NodeKind::Rule || pos[0] < 0 || pos[0] >= static_cast<int>(d->premises.size()))
    throw std::out_of_range("no subtree at " + position_string(pos));
  auto copy = std::make_shared<Deduction>(*d);
  Position rest(pos.begin() + 1, pos.end());
  copy->premises[pos[0]] = replace_at(d->premises[pos[0]], rest, sub);
  return copy;
}

int node_count(const DeductionPtr& d) {
  int n = 1;
  if (d->node == NodeKind::Rule)
    for (auto& p : d->premises) n += node_count(p);
  return n;
}

// ---------------------------------------------------------------------------
// S-expression reader (scripts)

namespace {

struct SExp {
  bool atom = false;
  std::string text;        // atom text
  std::vector<SExp> kids;  // list items
  std::size_t pos = 0;     // byte offset, for error messages
};

void skip_blank(const std::string& s, std::size_t& i) {
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    } else if (s[i] == ';') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else {
      break;
    }
  }
}

SExp read_sexp(const std::string& s, std::size_t& i) {
  skip_blank(s, i);
  if (i >= s.size()) throw ParseError("SyntaxError", i, "unexpected end of input");
  SExp e;
  e.pos = i;
  if (s[i] == '(') {
    ++i;
    while (true) {
      skip_blank(s, i);
      if (i >= s.size()) throw ParseError("SyntaxError", i, "missing ')'");
      if (s[i] == ')') {
        ++i;
        return e;
      }
      e.kids.push_back(read_sexp(s, i));
    }
  }
  if (s[i] == ')') throw ParseError("SyntaxError", i, "unexpected ')'");
  e.atom = true;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
         s[i] != ')' && s[i] != ';')
    e.text += s[i++];
  return e;
}

std::string sexp_text(const SExp& e) {
  if (e.atom) return e.text;
  std::string out = "(";
  for (size_t i = 0; i < e.kids.size(); ++i) {
    if (i) out += ' ';
    out += sexp_text(e.kids[i]);
  }
  out += ')';
  return out;
}

// Restricted systems share their parent's script syntax; the section-six
// shape conditions are diagnosed by the checker, not the reader.
SystemId reader_mode(SystemId s) {
  if (s == SystemId::IPF_IR) return SystemId::IPF_I;
  if (s == SystemId::IPF_iotaR) return SystemId::IPF_iota;
  return s;
}

struct ScriptReader {
  SystemId fmode;
  std::map<std::string, FormulaPtr> assumed;  // label -> formula (functional check)

  FormulaPtr formula(const SExp& e) {
    try {
      return parse_formula(sexp_text(e), fmode);
    } catch (ParseError& err) {
      throw ParseError(err.code, e.pos, err.what());
    }
  }

  TermPtr term(const SExp& e) {
    try {
      return parse_term(sexp_text(e), fmode);
    } catch (ParseError& err) {
      throw ParseError(err.code, e.pos, err.what());
    }
  }

  std::string atom(const SExp& e, const char* what) {
    if (!e.atom) throw ParseError("SyntaxError", e.pos, std::string("expected ") + what);
    return e.text;
  }

  DeductionPtr node(const SExp& e) {
    if (e.atom || e.kids.empty() || !e.kids[0].atom)
      throw ParseError("SyntaxError", e.pos, "expected a proof node");
    const std::string& head = e.kids[0].text;
    if (head == "assume") {
      if (e.kids.size() != 3)
        throw ParseError("SyntaxError", e.pos, "assume takes a label and a formula");
      std::string label = atom(e.kids[1], "an assumption label");
      FormulaPtr f = formula(e.kids[2]);
      auto it = assumed.find(label);
      if (it != assumed.end()) {
        if (!alpha_eq(it->second, f))
          throw ParseError("SyntaxError", e.pos,
                           "label " + label + " is used with two different formulas");
      } else {
        assumed.emplace(label, f);
      }
      return mk_assume(std::move(label), std::move(f));
    }
    if (head == "eq-refl") {
      if (e.kids.size() != 2) throw ParseError("SyntaxError", e.pos, "eq-refl takes one term");
      return mk_eqrefl(term(e.kids[1]));
    }
    if (head == "ll") {
      if (e.kids.size() != 4)
        throw ParseError("SyntaxError", e.pos, "ll takes two variables and a formula");
      std::string x = atom(e.kids[1], "a variable");
      std::string y = atom(e.kids[2], "a variable");
      // Read the body with x in scope by borrowing a quantifier wrapper. The
      // node only makes sense with iota available, so read it that way and
      // leave the system gate to the checker.
      std::string text = "(all " + x + " " + sexp_text(e.kids[3]) + ")";
      FormulaPtr shell;
      try {
        shell = parse_formula(text, SystemId::IPF_iota);
      } catch (ParseError& err) {
        throw ParseError(err.code, e.kids[3].pos, err.what());
      }
      return mk_ll(std::move(x), std::move(y), shell->left);
    }
    if (head == "rule") {
      if (e.kids.size() < 2 || !e.kids[1].atom)
        throw ParseError("SyntaxError", e.pos, "rule needs a rule name");
      auto rid = rule_from_name(e.kids[1].text);
      if (!rid)
        throw ParseError("SyntaxError", e.kids[1].pos, "unknown rule '" + e.kids[1].text + "'");
      FormulaPtr conclusion;
      std::vector<std::string> discharges, eigens;
      std::vector<DeductionPtr> premises;
      for (size_t i = 2; i < e.kids.size(); ++i) {
        const SExp& k = e.kids[i];
        if (k.atom && !k.text.empty() && k.text[0] == ':') {
          if (i + 1 >= e.kids.size())
            throw ParseError("SyntaxError", k.pos, k.text + " needs a value");
          const SExp& v = e.kids[++i];
          if (k.text == ":conclusion") {
            conclusion = formula(v);
          } else if (k.text == ":eigen") {
            if (v.atom) {
              eigens.push_back(v.text);
            } else {
              for (const auto& a : v.kids) eigens.push_back(atom(a, "a parameter name"));
            }
          } else if (k.text == ":discharge") {
            if (v.atom) throw ParseError("SyntaxError", v.pos, ":discharge takes a label list");
            for (const auto& a : v.kids) discharges.push_back(atom(a, "a label"));
          } else {
            throw ParseError("SyntaxError", k.pos, "unknown keyword " + k.text);
          }
        } else {
          premises.push_back(node(k));
        }
      }
      if (!conclusion)
        throw ParseError("SyntaxError", e.pos, "rule node needs a :conclusion");
      return mk_rule(*rid, std::move(conclusion), std::move(premises), std::move(discharges),
                     std::move(eigens));
    }
    throw ParseError("SyntaxError", e.kids[0].pos, "unknown proof node '" + head + "'");
  }
};

bool position_prefix(const Position& p, const Position& q) {
  if (p.size() >= q.size()) return false;
  return std::equal(p.begin(), p.end(), q.begin());
}

void collect_positions(const DeductionPtr& d, Position& pos,
                       std::map<std::string, std::vector<Position>>& occurrences,
                       std::map<std::string, std::vector<Position>>& dischargers) {
  if (d->node == NodeKind::Assume) {
    occurrences[d->label].push_back(pos);
    return;
  }
  if (d->node != NodeKind::Rule) return;
  std::set<std::string> seen;
  for (const auto& l : d->discharges)
    if (seen.insert(l).second) dischargers[l].push_back(pos);
  for (size_t i = 0; i < d->premises.size(); ++i) {
    pos.push_back(static_cast<int>(i));
    collect_positions(d->premises[i], pos, occurrences, dischargers);
    pos.pop_back();
  }
}

void validate_structure(const DeductionPtr& body) {
  std::map<std::string, std::vector<Position>> occurrences, dischargers;
  Position pos;
  collect_positions(body, pos, occurrences, dischargers);
  for (const auto& [label, at] : dischargers) {
    if (at.size() > 1)
      throw ParseError("DuplicateDischarge", 0,
                       "label " + label + " is discharged at more than one node");
    for (const auto& occ : occurrences[label])
      if (!position_prefix(at[0], occ))
        throw ParseError("DanglingLabel", 0,
                         "discharge of " + label + " at " + position_string(at[0]) +
                             " does not cover its occurrence at " + position_string(occ));
  }
}

}  // namespace

ProofScript parse_script(const std::string& text, std::optional<SystemId> force_system) {
  std::size_t i = 0;
  SExp top = read_sexp(text, i);
  skip_blank(text, i);
  if (i < text.size()) throw ParseError("SyntaxError", i, "trailing input after script");
  if (top.atom || top.kids.empty() || !top.kids[0].atom || top.kids[0].text != "proof")
    throw ParseError("SyntaxError", top.pos, "expected (proof NAME ...)");
  if (top.kids.size() < 2 || !top.kids[1].atom)
    throw ParseError("SyntaxError", top.pos, "proof needs a name");

  ProofScript script;
  script.name = top.kids[1].text;
  const SExp* body = nullptr;
  const SExp* decls = nullptr;
  bool system_seen = false;
  for (size_t k = 2; k < top.kids.size(); ++k) {
    const SExp& e = top.kids[k];
    if (e.atom && !e.text.empty() && e.text[0] == ':') {
      if (k + 1 >= top.kids.size()) throw ParseError("SyntaxError", e.pos, e.text + " needs a value");
      const SExp& v = top.kids[++k];
      if (e.text == ":system") {
        if (!v.atom) throw ParseError("SyntaxError", v.pos, ":system takes a name");
        try {
          script.system = system_from_string(v.text);
        } catch (const std::exception&) {
          throw ParseError("SyntaxError", v.pos, "unknown system '" + v.text + "'");
        }
        system_seen = true;
      } else if (e.text == ":decls") {
        if (v.atom) throw ParseError("SyntaxError", v.pos, ":decls takes a list");
        decls = &v;
      } else {
        throw ParseError("SyntaxError", e.pos, "unknown keyword " + e.text);
      }
    } else {
      if (body) throw ParseError("SyntaxError", e.pos, "more than one proof body");
      body = &e;
    }
  }
  if (!system_seen && !force_system)
    script.system = SystemId::IPF;
  if (force_system) script.system = *force_system;
  if (!body) throw ParseError("SyntaxError", top.pos, "proof needs a body");

  if (decls) {
    std::set<std::string> names;
    for (const auto& d : decls->kids) {
      if (d.atom || d.kids.size() != 2 || !d.kids[0].atom || !d.kids[1].atom ||
          (d.kids[0].text != "c" && d.kids[0].text != "p"))
        throw ParseError("SyntaxError", d.pos, "declarations look like (c NAME) or (p NAME)");
      if (!names.insert(d.kids[1].text).second)
        throw ParseError("SyntaxError", d.kids[1].pos, "duplicate declaration " + d.kids[1].text);
      script.decls.emplace_back(d.kids[0].text[0], d.kids[1].text);
    }
  }

  ScriptReader reader{reader_mode(script.system), {}};
  script.body = reader.node(*body);
  validate_structure(script.body);
  return script;
}

DeductionPtr parse_proof(const std::string& text) { return parse_script(text).body; }

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_node(std::ostream& os, const DeductionPtr& d, int indent) {
  std::string pad(indent, ' ');
  switch (d->node) {
    case NodeKind::Assume:
      os << pad << "(assume " << d->label << " " << print_formula(d->conclusion) << ")";
      return;
    case NodeKind::EqRefl: os << pad << "(eq-refl " << print_term(d->term) << ")"; return;
    case NodeKind::LL:
      os << pad << "(ll " << d->ll_x << " " << d->ll_y << " " << print_formula(d->ll_body) << ")";
      return;
    case NodeKind::Rule: {
      os << pad << "(rule " << rule_name(d->rule) << "\n";
      os << pad << "  :conclusion " << print_formula(d->conclusion);
      if (!d->eigens.empty()) {
        os << "\n" << pad << "  :eigen ";
        if (d->eigens.size() == 1) {
          os << d->eigens[0];
        } else {
          os << "(";
          for (size_t i = 0; i < d->eigens.size(); ++i) os << (i ? " " : "") << d->eigens[i];
          os << ")";
        }
      }
      if (!d->discharges.empty()) {
        os << "\n" << pad << "  :discharge (";
        for (size_t i = 0; i < d->discharges.size(); ++i)
          os << (i ? " " : "") << d->discharges[i];
        os << ")";
      }
      for (const auto& p : d->premises) {
        os << "\n";
        print_node(os, p, indent + 2);
      }
      os << ")";
      return;
    }
  }
}

}  // namespace

std::string print_deduction(const DeductionPtr& d, int indent) {
  std::ostringstream os;
  print_node(os, d, indent);
  return os.str();
}

std::string print_script(const ProofScript& s) {
  std::ostringstream os;
  os << "(proof " << s.name << "\n";
  os << "  :system " << to_string(s.system) << "\n";
  if (!s.decls.empty()) {
    os << "  :decls (";
    for (size_t i = 0; i < s.decls.size(); ++i)
      os << (i ? " " : "") << "(" << s.decls[i].first << " " << s.decls[i].second << ")";
    os << ")\n";
  }
  print_node(os, s.body, 2);
  os << ")\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void open_walk(const DeductionPtr& d, std::set<std::string>& closed,
               std::map<std::string, FormulaPtr>& out) {
  if (d->node == NodeKind::Assume) {
    if (!closed.count(d->label)) out.emplace(d->label, d->conclusion);
    return;
  }
  if (d->node != NodeKind::Rule) return;
  std::vector<std::string> added;
  for (const auto& l : d->discharges)
    if (closed.insert(l).second) added.push_back(l);
  for (const auto& p : d->premises) open_walk(p, closed, out);
  for (const auto& l : added) closed.erase(l);
}

}  // namespace

std::map<std::string, FormulaPtr> open_assumptions(const DeductionPtr& d) {
  std::map<std::string, FormulaPtr> out;
  std::set<std::string> closed;
  open_walk(d, closed, out);
  return out;
}

std::set<std::string> all_labels(const DeductionPtr& d) {
  std::set<std::string> out;
  std::function<void(const DeductionPtr&)> walk = [&](const DeductionPtr& n) {
    if (n->node == NodeKind::Assume) out.insert(n->label);
    if (n->node != NodeKind::Rule) return;
    for (const auto& l : n->discharges) out.insert(l);
    for (const auto& p : n->premises) walk(p);
  };
  walk(d);
  return out;
}

std::set<std::string> params_of_deduction(const DeductionPtr& d) {
  std::set<std::string> out;
  std::function<void(const DeductionPtr&)> walk = [&](const DeductionPtr& n) {
    auto ps = params_of(n->conclusion);
    out.insert(ps.begin(), ps.end());
    if (n->node != NodeKind::Rule) return;
    for (const auto& p : n->premises) walk(p);
  };
  walk(d);
  return out;
}

std::map<std::string, int> eigen_uses(const DeductionPtr& d) {
  std::map<std::string, int> out;
  std::function<void(const DeductionPtr&)> walk = [&](const DeductionPtr& n) {
    if (n->node != NodeKind::Rule) return;
    for (const auto& e : n->eigens) ++out[e];
    for (const auto& p : n->premises) walk(p);
  };
  walk(d);
  return out;
}

// ---------------------------------------------------------------------------
// Name pool

void NamePool::absorb(const DeductionPtr& d) {
  auto ps = params_of_deduction(d);
  used.insert(ps.begin(), ps.end());
  auto ls = all_labels(d);
  used.insert(ls.begin(), ls.end());
  std::function<void(const DeductionPtr&)> walk = [&](const DeductionPtr& n) {
    if (n->node != NodeKind::Rule) return;
    for (const auto& e : n->eigens) used.insert(e);
    for (const auto& p : n->premises) walk(p);
  };
  walk(d);
}

void NamePool::absorb(const std::set<std::string>& names) { used.insert(names.begin(), names.end()); }

std::string NamePool::fresh(const std::string& base) {
  std::string s = base;
  while (used.count(s)) s += '\'';
  used.insert(s);
  return s;
}

// ---------------------------------------------------------------------------
// Renaming helpers

namespace {

DeductionPtr map_formulas(const DeductionPtr& d,
                          const std::function<FormulaPtr(const FormulaPtr&)>& ff,
                          const std::function<TermPtr(const TermPtr&)>& ft) {
  auto conclusion = ff(d->conclusion);
  if (d->node == NodeKind::Assume) {
    if (conclusion == d->conclusion) return d;
    return mk_assume(d->label, conclusion);
  }
  if (d->node == NodeKind::EqRefl) {
    auto t = ft(d->term);
    if (t == d->term) return d;
    return mk_eqrefl(t);
  }
  if (d->node == NodeKind::LL) {
    auto body = ff(d->ll_body);
    if (body == d->ll_body) return d;
    return mk_ll(d->ll_x, d->ll_y, body);
  }
  bool changed = conclusion != d->conclusion;
  std::vector<DeductionPtr> premises;
  premises.reserve(d->premises.size());
  for (const auto& p : d->premises) {
    auto q = map_formulas(p, ff, ft);
    changed = changed || q != p;
    premises.push_back(q);
  }
  if (!changed) return d;
  auto copy = std::make_shared<Deduction>(*d);
  copy->conclusion = conclusion;
  copy->premises = std::move(premises);
  return copy;
}

// Rename parameter `a` to the fresh parameter `nu` everywhere, including
// eigen annotations. Unlike substitute_in_deduction this is always safe.
DeductionPtr rename_param_everywhere(const DeductionPtr& d, const std::string& a,
                                     const std::string& nu) {
  TermPtr target = mk_param(nu);
  auto mapped = map_formulas(
      d, [&](const FormulaPtr& f) { return substitute_param(f, a, target); },
      [&](const TermPtr& t) { return substitute_param_term(t, a, target); });
  std::function<DeductionPtr(const DeductionPtr&)> fix = [&](const DeductionPtr& n) -> DeductionPtr {
    if (n->node != NodeKind::Rule) return n;
    bool changed = false;
    auto eigens = n->eigens;
    for (auto& e : eigens)
      if (e == a) {
        e = nu;
        changed = true;
      }
    std::vector<DeductionPtr> premises;
    premises.reserve(n->premises.size());
    for (const auto& p : n->premises) {
      auto q = fix(p);
      changed = changed || q != p;
      premises.push_back(q);
    }
    if (!changed) return n;
    auto copy = std::make_shared<Deduction>(*n);
    copy->eigens = std::move(eigens);
    copy->premises = std::move(premises);
    return copy;
  };
  return fix(mapped);
}

DeductionPtr rename_labels(const DeductionPtr& d, const std::map<std::string, std::string>& lmap) {
  if (lmap.empty()) return d;
  std::function<DeductionPtr(const DeductionPtr&)> walk = [&](const DeductionPtr& n) -> DeductionPtr {
    if (n->node == NodeKind::Assume) {
      auto it = lmap.find(n->label);
      if (it == lmap.end()) return n;
      return mk_assume(it->second, n->conclusion);
    }
    if (n->node != NodeKind::Rule) return n;
    bool changed = false;
    auto discharges = n->discharges;
    for (auto& l : discharges) {
      auto it = lmap.find(l);
      if (it != lmap.end()) {
        l = it->second;
        changed = true;
      }
    }
    std::vector<DeductionPtr> premises;
    premises.reserve(n->premises.size());
    for (const auto& p : n->premises) {
      auto q = walk(p);
      changed = changed || q != p;
      premises.push_back(q);
    }
    if (!changed) return n;
    auto copy = std::make_shared<Deduction>(*n);
    copy->discharges = std::move(discharges);
    copy->premises = std::move(premises);
    return copy;
  };
  return walk(d);
}

std::set<std::string> eigens_of(const DeductionPtr& d) {
  std::set<std::string> out;
  for (const auto& [e, n] : eigen_uses(d)) {
    (void)n;
    out.insert(e);
  }
  return out;
}

std::set<std::string> internal_labels(const DeductionPtr& d) {
  std::set<std::string> out;
  std::function<void(const DeductionPtr&)> walk = [&](const DeductionPtr& n) {
    if (n->node != NodeKind::Rule) return;
    for (const auto& l : n->discharges) out.insert(l);
    for (const auto& p : n->premises) walk(p);
  };
  walk(d);
  return out;
}

}  // namespace

DeductionPtr refresh_internal(const DeductionPtr& d, NamePool& pool) {
  DeductionPtr cur = d;
  for (const auto& e : eigens_of(d)) cur = rename_param_everywhere(cur, e, pool.fresh(e));
  std::map<std::string, std::string> lmap;
  for (const auto& l : internal_labels(cur)) lmap[l] = pool.fresh(l);
  return rename_labels(cur, lmap);
}

// ---------------------------------------------------------------------------
// graft

namespace {

void open_occurrence_formulas(const DeductionPtr& d, const std::string& label,
                              std::vector<FormulaPtr>& out) {
  if (d->node == NodeKind::Assume) {
    if (d->label == label) out.push_back(d->conclusion);
    return;
  }
  if (d->node != NodeKind::Rule) return;
  for (const auto& l : d->discharges)
    if (l == label) return;  // class closed below here
  for (const auto& p : d->premises) open_occurrence_formulas(p, label, out);
}

}  // namespace

DeductionPtr graft(const DeductionPtr& d, const std::string& label, const DeductionPtr& sigma) {
  std::vector<FormulaPtr> occs;
  open_occurrence_formulas(d, label, occs);
  if (occs.empty()) return d;
  for (const auto& f : occs)
    if (!alpha_eq(f, sigma->conclusion))
      throw KernelError("FormulaMismatch", "class " + label +
                                               " does not match the conclusion being grafted");

  auto sigma_open = open_assumptions(sigma);
  NamePool pool;
  pool.absorb(d);
  pool.absorb(sigma);

  // A class of d sharing a label with an open class of sigma must not capture
  // the copies' open occurrences; move d's class out of the way.
  DeductionPtr host = d;
  {
    std::map<std::string, std::string> lmap;
    auto host_internal = internal_labels(host);
    for (const auto& [k, f] : sigma_open) {
      (void)f;
      if (host_internal.count(k)) lmap[k] = pool.fresh(k);
    }
    host = rename_labels(host, lmap);
  }
  // Open-class merges need agreeing formulas.
  {
    auto host_open = open_assumptions(host);
    for (const auto& [k, f] : sigma_open) {
      auto it = host_open.find(k);
      if (it != host_open.end() && !alpha_eq(it->second, f))
        throw KernelError("FormulaMismatch",
                          "open class " + k + " would merge with a different formula");
    }
  }

  // First copy keeps sigma's names except where its internal labels collide
  // with names of the host.
  DeductionPtr first = sigma;
  {
    std::map<std::string, std::string> lmap;
    auto host_names = all_labels(host);
    for (const auto& l : internal_labels(sigma))
      if (host_names.count(l)) lmap[l] = pool.fresh(l);
    first = rename_labels(sigma, lmap);
  }

  int copies = 0;
  std::function<DeductionPtr(const DeductionPtr&)> walk = [&](const DeductionPtr& n) -> DeductionPtr {
    if (n->node == NodeKind::Assume) {
      if (n->label != label) return n;
      ++copies;
      if (copies == 1) return first;
      return refresh_internal(sigma, pool);
    }
    if (n->node != NodeKind::Rule) return n;
    for (const auto& l : n->discharges)
      if (l == label) return n;
    bool changed = false;
    std::vector<DeductionPtr> premises;
    premises.reserve(n->premises.size());
    for (const auto& p : n->premises) {
      auto q = walk(p);
      changed = changed || q != p;
      premises.push_back(q);
    }
    if (!changed) return n;
    auto copy = std::make_shared<Deduction>(*n);
    copy->premises = std::move(premises);
    return copy;
  };
  return walk(host);
}

// ---------------------------------------------------------------------------
// substitute_in_deduction

DeductionPtr substitute_in_deduction(const DeductionPtr& d, const std::string& a,
                                     const TermPtr& t) {
  auto eig = eigens_of(d);
  if (eig.count(a))
    throw KernelError("EigenCapture", "parameter " + a + " is an eigenparameter of the deduction");
  for (const auto& p : params_of_term(t))
    if (eig.count(p))
      throw KernelError("EigenCapture",
                        "replacement term mentions eigenparameter " + p);
  return map_formulas(
      d, [&](const FormulaPtr& f) { return substitute_param(f, a, t); },
      [&](const TermPtr& s) { return substitute_param_term(s, a, t); });
}

// ---------------------------------------------------------------------------
// uniquify_parameters

namespace {

bool param_occurs_outside(const DeductionPtr& root, const Position& scope, const std::string& e) {
  bool found = false;
  std::function<void(const DeductionPtr&, Position&)> walk = [&](const DeductionPtr& n,
                                                                 Position& pos) {
    if (found || pos == scope) return;
    if (params_of(n->conclusion).count(e)) {
      found = true;
      return;
    }
    if (n->node != NodeKind::Rule) return;
    for (size_t i = 0; i < n->premises.size(); ++i) {
      pos.push_back(static_cast<int>(i));
      walk(n->premises[i], pos);
      pos.pop_back();
    }
  };
  Position pos;
  walk(root, pos);
  return found;
}

DeductionPtr set_eigen_at(const DeductionPtr& d, const Position& pos, size_t idx,
                          const std::string& nu) {
  auto node = subtree_at(d, pos);
  auto copy = std::make_shared<Deduction>(*node);
  copy->eigens[idx] = nu;
  return replace_at(d, pos, copy);
}

}  // namespace

DeductionPtr uniquify_parameters(const DeductionPtr& d) {
  NamePool pool;
  pool.absorb(d);

  std::vector<Position> order;
  std::function<void(const DeductionPtr&, Position&)> collect = [&](const DeductionPtr& n,
                                                                    Position& pos) {
    if (n->node != NodeKind::Rule) return;
    if (!n->eigens.empty()) order.push_back(pos);
    for (size_t i = 0; i < n->premises.size(); ++i) {
      pos.push_back(static_cast<int>(i));
      collect(n->premises[i], pos);
      pos.pop_back();
    }
  };
  Position pos;
  collect(d, pos);

  auto scope_of = [](const DeductionPtr& node, size_t i, const Position& at) -> std::optional<Position> {
    const auto& info = rule_info(node->rule);
    if (i >= info.eigen_scope.size()) return std::nullopt;
    int p = info.eigen_scope[i];
    if (p < 0 || p >= static_cast<int>(node->premises.size())) return std::nullopt;
    Position scope = at;
    scope.push_back(p);
    return scope;
  };

  DeductionPtr cur = d;
  auto rename_class = [&](const Position& at, size_t i, const std::string& e,
                          const std::optional<Position>& scope) {
    std::string nu = pool.fresh(e);
    if (scope) {
      auto renamed = rename_param_everywhere(subtree_at(cur, *scope), e, nu);
      cur = replace_at(cur, *scope, renamed);
    }
    cur = set_eigen_at(cur, at, i, nu);
    return nu;
  };

  // First separate eigen classes from one another (outermost claims win),
  // then push any class whose name still leaks outside its own scope out of
  // the way. Free parameters are never touched.
  std::set<std::string> claimed;
  for (const auto& at : order) {
    auto node = subtree_at(cur, at);
    for (size_t i = 0; i < node->eigens.size(); ++i) {
      const std::string e = node->eigens[i];
      auto scope = scope_of(node, i, at);
      if (claimed.count(e)) {
        claimed.insert(rename_class(at, i, e, scope));
        node = subtree_at(cur, at);
      } else {
        claimed.insert(e);
      }
    }
  }
  for (const auto& at : order) {
    auto node = subtree_at(cur, at);
    for (size_t i = 0; i < node->eigens.size(); ++i) {
      const std::string e = node->eigens[i];
      auto scope = scope_of(node, i, at);
      if (scope && param_occurs_outside(cur, *scope, e)) {
        rename_class(at, i, e, scope);
        node = subtree_at(cur, at);
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Equivalence modulo renaming

namespace {

struct Bijection {
  std::map<std::string, std::string> ab, ba;
  bool add(const std::string& a, const std::string& b) {
    auto i = ab.find(a);
    auto j = ba.find(b);
    if (i == ab.end() && j == ba.end()) {
      ab[a] = b;
      ba[b] = a;
      return true;
    }
    return i != ab.end() && j != ba.end() && i->second == b && j->second == a;
  }
};

using VarEnv = std::vector<std::pair<std::string, std::string>>;

bool lookup_var(const VarEnv& env, const std::string& a, const std::string& b) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->first == a || it->second == b) return it->first == a && it->second == b;
  }
  return a == b;  // both free (well-formed inputs never hit this)
}

bool formula_eq_mod(const FormulaPtr& f, const FormulaPtr& g, Bijection& params, VarEnv& env);

bool term_eq_mod(const TermPtr& s, const TermPtr& t, Bijection& params, VarEnv& env) {
  if (s->kind != t->kind) return false;
  switch (s->kind) {
    case TermKind::Const: return s->name == t->name;
    case TermKind::Param: return params.add(s->name, t->name);
    case TermKind::Var: return lookup_var(env, s->name, t->name);
    case TermKind::Iota: {
      env.emplace_back(s->name, t->name);
      bool ok = formula_eq_mod(s->body, t->body, params, env);
      env.pop_back();
      return ok;
    }
  }
  return false;
}

bool formula_eq_mod(const FormulaPtr& f, const FormulaPtr& g, Bijection& params, VarEnv& env) {
  if (f->kind != g->kind) return false;
  switch (f->kind) {
    case FormulaKind::Atom:
      if (f->pred != g->pred || f->args.size() != g->args.size()) return false;
      for (size_t i = 0; i < f->args.size(); ++i)
        if (!term_eq_mod(f->args[i], g->args[i], params, env)) return false;
      return true;
    case FormulaKind::Bottom: return true;
    case FormulaKind::Eq:
      return term_eq_mod(f->lhs, g->lhs, params, env) && term_eq_mod(f->rhs, g->rhs, params, env);
    case FormulaKind::ExistsBang: return term_eq_mod(f->lhs, g->lhs, params, env);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Imp:
    case FormulaKind::Iff:
      return formula_eq_mod(f->left, g->left, params, env) &&
             formula_eq_mod(f->right, g->right, params, env);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      env.emplace_back(f->bound_var, g->bound_var);
      bool ok = formula_eq_mod(f->left, g->left, params, env);
      env.pop_back();
      return ok;
    }
    case FormulaKind::IQuant: {
      env.emplace_back(f->bound_var, g->bound_var);
      bool ok = formula_eq_mod(f->left, g->left, params, env) &&
                formula_eq_mod(f->right, g->right, params, env);
      env.pop_back();
      return ok;
    }
  }
  return false;
}

bool ded_eq_mod(const DeductionPtr& a, const DeductionPtr& b, Bijection& params,
                Bijection& labels) {
  if (a->node != b->node) return false;
  VarEnv env;
  switch (a->node) {
    case NodeKind::Assume:
      return labels.add(a->label, b->label) &&
             formula_eq_mod(a->conclusion, b->conclusion, params, env);
    case NodeKind::EqRefl: return term_eq_mod(a->term, b->term, params, env);
    case NodeKind::LL: return formula_eq_mod(a->conclusion, b->conclusion, params, env);
    case NodeKind::Rule: {
      if (a->rule != b->rule || a->premises.size() != b->premises.size() ||
          a->discharges.size() != b->discharges.size() || a->eigens.size() != b->eigens.size())
        return false;
      if (!formula_eq_mod(a->conclusion, b->conclusion, params, env)) return false;
      for (size_t i = 0; i < a->discharges.size(); ++i)
        if (!labels.add(a->discharges[i], b->discharges[i])) return false;
      for (size_t i = 0; i < a->eigens.size(); ++i)
        if (!params.add(a->eigens[i], b->eigens[i])) return false;
      for (size_t i = 0; i < a->premises.size(); ++i)
        if (!ded_eq_mod(a->premises[i], b->premises[i], params, labels)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

bool equiv_mod_renaming(const DeductionPtr& a, const DeductionPtr& b) {
  Bijection params, labels;
  return ded_eq_mod(a, b, params, labels);
}

}  // namespace ipf

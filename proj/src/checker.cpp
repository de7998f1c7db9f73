#include "ipf/checker.hpp"

#include <map>
#include <set>
#include <utility>

namespace ipf {

namespace {

bool occurs(const std::string& a, const FormulaPtr& f) { return params_of(f).count(a) > 0; }
bool occurs_term(const std::string& a, const TermPtr& t) { return params_of_term(t).count(a) > 0; }

// Simultaneous walk deciding whether `to` is `from` with some subset of the
// occurrences of t1 replaced by t2 — equivalently, whether there is a
// template A and variable x with from = A^x_{t1} and to = A^x_{t2}. Bound
// variables are tracked pairwise so the walk is alpha-aware, including under
// description binders.
struct LeibnizWalk {
  const TermPtr& t1;
  const TermPtr& t2;
  std::vector<std::pair<std::string, std::string>> env;

  bool var_pair(const std::string& a, const std::string& b) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == a || it->second == b) return it->first == a && it->second == b;
    return a == b;
  }

  bool term(const TermPtr& a, const TermPtr& b) {
    if (a->kind == TermKind::Var || b->kind == TermKind::Var)
      return a->kind == TermKind::Var && b->kind == TermKind::Var && var_pair(a->name, b->name);
    if (a->kind == TermKind::Iota && b->kind == TermKind::Iota) {
      env.emplace_back(a->name, b->name);
      bool same = formula(a->body, b->body);
      env.pop_back();
      if (same) return true;
    } else if (a->kind == b->kind && a->name == b->name) {
      return true;
    }
    return term_alpha_eq(a, t1) && term_alpha_eq(b, t2);
  }

  bool formula(const FormulaPtr& a, const FormulaPtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case FormulaKind::Atom: {
        if (a->pred != b->pred || a->args.size() != b->args.size()) return false;
        for (std::size_t i = 0; i < a->args.size(); ++i)
          if (!term(a->args[i], b->args[i])) return false;
        return true;
      }
      case FormulaKind::Bottom: return true;
      case FormulaKind::Eq: return term(a->lhs, b->lhs) && term(a->rhs, b->rhs);
      case FormulaKind::ExistsBang: return term(a->lhs, b->lhs);
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Imp:
      case FormulaKind::Iff: return formula(a->left, b->left) && formula(a->right, b->right);
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        env.emplace_back(a->bound_var, b->bound_var);
        bool ok = formula(a->left, b->left);
        env.pop_back();
        return ok;
      }
      case FormulaKind::IQuant: {
        env.emplace_back(a->bound_var, b->bound_var);
        bool ok = formula(a->left, b->left) && formula(a->right, b->right);
        env.pop_back();
        return ok;
      }
    }
    return false;
  }
};

bool leibniz_match(const FormulaPtr& from, const FormulaPtr& to, const TermPtr& t1,
                   const TermPtr& t2) {
  LeibnizWalk w{t1, t2, {}};
  return w.formula(from, to);
}

// Ix[F, ex!x]
bool i_exists_scope(const FormulaPtr& m) {
  return m->kind == FormulaKind::IQuant && m->right->kind == FormulaKind::ExistsBang &&
         m->right->lhs->kind == TermKind::Var && m->right->lhs->name == m->bound_var;
}

// Ix[F, x=t], t free of x; yields t.
bool i_eq_scope(const FormulaPtr& m, TermPtr* t_out) {
  if (m->kind != FormulaKind::IQuant || m->right->kind != FormulaKind::Eq) return false;
  if (m->right->lhs->kind != TermKind::Var || m->right->lhs->name != m->bound_var) return false;
  if (free_vars_term(m->right->rhs).count(m->bound_var)) return false;
  *t_out = m->right->rhs;
  return true;
}

bool is_i_rule(RuleId r) {
  switch (r) {
    case RuleId::II:
    case RuleId::IE1p:
    case RuleId::IE2p:
    case RuleId::IE3p:
    case RuleId::IE4p:
    case RuleId::IE5p:
    case RuleId::IE1pPrime:
    case RuleId::IE2pPrime:
    case RuleId::IE4pPrime: return true;
    default: return false;
  }
}

struct SlotSpec {
  FormulaPtr formula;  // the assumption class formula the slot licenses
  int premise;         // the premise whose subdeduction it is discharged from
};

struct Checker {
  SystemId system;
  std::vector<Diagnostic> diags;

  void fail(const Position& pos, const char* code, std::string msg) {
    diags.push_back({pos, code, std::move(msg)});
  }

  void visit(const DeductionPtr& d, Position& pos) {
    check_node(d, pos);
    if (d->node == NodeKind::Rule) {
      for (int i = 0; i < static_cast<int>(d->premises.size()); ++i) {
        pos.push_back(i);
        visit(d->premises[i], pos);
        pos.pop_back();
      }
    }
  }

  void check_node(const DeductionPtr& d, const Position& pos) {
    switch (d->node) {
      case NodeKind::Assume: return;  // any formula may be assumed
      case NodeKind::EqRefl: {
        const FormulaPtr& c = d->conclusion;
        if (!d->term || c->kind != FormulaKind::Eq || !term_alpha_eq(c->lhs, d->term) ||
            !term_alpha_eq(c->rhs, d->term))
          fail(pos, "WrongPremiseShape", "eq-refl must conclude t=t for its own term");
        return;
      }
      case NodeKind::LL: {
        if (!system_has_iota(system)) {
          fail(pos, "RuleNotInSystem", "ll is available only in the iota systems");
          return;
        }
        if (d->ll_x == d->ll_y) {
          fail(pos, "LLVariablesNotDistinct", "ll requires two distinct variables");
          return;
        }
        if (!alpha_eq(d->conclusion, ll_conclusion(d->ll_x, d->ll_y, d->ll_body)))
          fail(pos, "WrongPremiseShape", "ll node does not conclude its own instance");
        return;
      }
      case NodeKind::Rule: check_rule(d, pos); return;
    }
  }

  // Discharge bookkeeping: every slot's class, when inhabited, must carry the
  // licensed formula, and a discharged label may occur open only beside the
  // premises its slots designate. Returns false after reporting a defect.
  bool check_discharges(const DeductionPtr& d, const Position& pos,
                        const std::vector<SlotSpec>& slots) {
    std::vector<std::map<std::string, FormulaPtr>> opens;
    opens.reserve(d->premises.size());
    for (auto& p : d->premises) opens.push_back(open_assumptions(p));

    std::map<std::string, std::set<int>> allowed;
    for (std::size_t i = 0; i < slots.size(); ++i)
      allowed[d->discharges[i]].insert(slots[i].premise);

    for (std::size_t i = 0; i < slots.size(); ++i) {
      const std::string& label = d->discharges[i];
      auto& where = opens[slots[i].premise];
      auto it = where.find(label);
      if (it != where.end() && !alpha_eq(it->second, slots[i].formula)) {
        fail(pos, "WrongDischarge",
             rule_name(d->rule) + ": class " + label + " does not carry the dischargeable formula");
        return false;
      }
    }
    for (auto& [label, js] : allowed) {
      for (int j = 0; j < static_cast<int>(d->premises.size()); ++j) {
        if (js.count(j)) continue;
        if (opens[j].count(label)) {
          fail(pos, "WrongDischarge",
               rule_name(d->rule) + ": class " + label +
                   " has occurrences beside a premise its discharge does not govern");
          return false;
        }
      }
    }
    return true;
  }

  // a must stay out of every open assumption of premise j other than the
  // classes discharged there by this application.
  bool eigen_open_ok(const DeductionPtr& d, int j, const std::set<std::string>& slot_labels,
                     const std::string& a, const Position& pos) {
    for (auto& [label, f] : open_assumptions(d->premises[j])) {
      if (slot_labels.count(label)) continue;
      if (occurs(a, f)) {
        fail(pos, "EigenInOpenAssumption",
             rule_name(d->rule) + ": eigenparameter " + a +
                 " occurs in the undischarged assumption " + label);
        return false;
      }
    }
    return true;
  }

  void check_rule(const DeductionPtr& d, const Position& pos) {
    const RuleInfo& info = rule_info(d->rule);
    if (is_i_rule(d->rule) && !system_has_i(system)) {
      fail(pos, "RuleNotInSystem",
           rule_name(d->rule) + " is available only in the I systems");
      return;
    }
    if (static_cast<int>(d->premises.size()) != info.arity) {
      fail(pos, "WrongPremiseShape",
           rule_name(d->rule) + ": expected " + std::to_string(info.arity) + " premises, got " +
               std::to_string(d->premises.size()));
      return;
    }
    if (static_cast<int>(d->eigens.size()) != info.eigens) {
      fail(pos, "WrongPremiseShape",
           rule_name(d->rule) + ": expected " + std::to_string(info.eigens) +
               " eigenparameters, got " + std::to_string(d->eigens.size()));
      return;
    }
    if (static_cast<int>(d->discharges.size()) != info.discharge_slots) {
      fail(pos, "WrongDischarge",
           rule_name(d->rule) + ": expected " + std::to_string(info.discharge_slots) +
               " discharge labels, got " + std::to_string(d->discharges.size()));
      return;
    }

    const auto& P = d->premises;
    const FormulaPtr& C = d->conclusion;
    auto shape_fail = [&](const std::string& msg) { fail(pos, "WrongPremiseShape", msg); };

    switch (d->rule) {
      case RuleId::AndI:
        if (C->kind != FormulaKind::And || !alpha_eq(C->left, P[0]->conclusion) ||
            !alpha_eq(C->right, P[1]->conclusion))
          shape_fail("and-i: conclusion must conjoin the premises in order");
        return;
      case RuleId::AndEL: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::And || !alpha_eq(C, m->left))
          shape_fail("and-el: conclusion must be the left conjunct of the premise");
        return;
      }
      case RuleId::AndER: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::And || !alpha_eq(C, m->right))
          shape_fail("and-er: conclusion must be the right conjunct of the premise");
        return;
      }
      case RuleId::ImpI: {
        if (C->kind != FormulaKind::Imp || !alpha_eq(C->right, P[0]->conclusion)) {
          shape_fail("imp-i: conclusion must be an implication ending in the premise");
          return;
        }
        check_discharges(d, pos, {{C->left, 0}});
        return;
      }
      case RuleId::ImpE: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Imp || !alpha_eq(m->left, P[1]->conclusion) ||
            !alpha_eq(C, m->right))
          shape_fail("imp-e: premises must be an implication and its antecedent");
        return;
      }
      case RuleId::OrIL:
        if (C->kind != FormulaKind::Or || !alpha_eq(C->left, P[0]->conclusion))
          shape_fail("or-il: conclusion must be a disjunction with the premise on the left");
        return;
      case RuleId::OrIR:
        if (C->kind != FormulaKind::Or || !alpha_eq(C->right, P[0]->conclusion))
          shape_fail("or-ir: conclusion must be a disjunction with the premise on the right");
        return;
      case RuleId::OrE: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Or) {
          shape_fail("or-e: major premise must be a disjunction");
          return;
        }
        if (!alpha_eq(P[1]->conclusion, C) || !alpha_eq(P[2]->conclusion, C)) {
          shape_fail("or-e: both minor premises must conclude the conclusion");
          return;
        }
        check_discharges(d, pos, {{m->left, 1}, {m->right, 2}});
        return;
      }
      case RuleId::BotE:
        if (P[0]->conclusion->kind != FormulaKind::Bottom) {
          shape_fail("bot-e: premise must be absurdity");
          return;
        }
        if (!is_atomic(C)) fail(pos, "NotAtomic", "bot-e: conclusion must be atomic");
        return;
      case RuleId::IffI: {
        if (C->kind != FormulaKind::Iff || !alpha_eq(P[0]->conclusion, C->right) ||
            !alpha_eq(P[1]->conclusion, C->left)) {
          shape_fail("iff-i: premises must derive each side from the other");
          return;
        }
        check_discharges(d, pos, {{C->left, 0}, {C->right, 1}});
        return;
      }
      case RuleId::IffE1: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Iff || !alpha_eq(P[1]->conclusion, m->left) ||
            !alpha_eq(C, m->right))
          shape_fail("iff-e1: premises must be a biconditional and its left side");
        return;
      }
      case RuleId::IffE2: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Iff || !alpha_eq(P[1]->conclusion, m->right) ||
            !alpha_eq(C, m->left))
          shape_fail("iff-e2: premises must be a biconditional and its right side");
        return;
      }
      case RuleId::ForallI: {
        const std::string& a = d->eigens[0];
        if (C->kind != FormulaKind::Forall) {
          shape_fail("all-i: conclusion must be universally quantified");
          return;
        }
        if (!alpha_eq(P[0]->conclusion, substitute(C->left, C->bound_var, mk_param(a)))) {
          shape_fail("all-i: premise must be the matrix at the eigenparameter");
          return;
        }
        if (!check_discharges(d, pos, {{mk_exists_bang(mk_param(a)), 0}})) return;
        if (occurs(a, C)) {
          fail(pos, "EigenNotFresh", "all-i: eigenparameter occurs in the quantified formula");
          return;
        }
        eigen_open_ok(d, 0, {d->discharges[0]}, a, pos);
        return;
      }
      case RuleId::ForallE: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Forall || P[1]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("all-e: premises must be a universal and an existence formula");
          return;
        }
        TermPtr t = P[1]->conclusion->lhs;
        if (!alpha_eq(C, substitute(m->left, m->bound_var, t)))
          shape_fail("all-e: conclusion must be the matrix at the existing term");
        return;
      }
      case RuleId::ExistsI: {
        if (C->kind != FormulaKind::Exists || P[1]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ex-i: conclusion must be existential with an existence side premise");
          return;
        }
        TermPtr t = P[1]->conclusion->lhs;
        if (!alpha_eq(P[0]->conclusion, substitute(C->left, C->bound_var, t)))
          shape_fail("ex-i: premise must be the matrix at the existing term");
        return;
      }
      case RuleId::ExistsE: {
        const FormulaPtr& m = P[0]->conclusion;
        const std::string& a = d->eigens[0];
        if (m->kind != FormulaKind::Exists) {
          shape_fail("ex-e: major premise must be existentially quantified");
          return;
        }
        if (!alpha_eq(P[1]->conclusion, C)) {
          shape_fail("ex-e: minor premise must conclude the conclusion");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(m->left, m->bound_var, mk_param(a)), 1},
                               {mk_exists_bang(mk_param(a)), 1}}))
          return;
        if (occurs(a, m)) {
          fail(pos, "EigenNotFresh", "ex-e: eigenparameter occurs in the major premise");
          return;
        }
        if (occurs(a, C)) {
          fail(pos, "EigenInConclusion", "ex-e: eigenparameter occurs in the conclusion");
          return;
        }
        eigen_open_ok(d, 1, {d->discharges[0], d->discharges[1]}, a, pos);
        return;
      }
      case RuleId::EqE: {
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::Eq) {
          shape_fail("eq-e: major premise must be an identity");
          return;
        }
        if (!is_atomic(P[1]->conclusion) || !is_atomic(C)) {
          fail(pos, "NotAtomic", "eq-e: minor premise and conclusion must be atomic");
          return;
        }
        if (term_alpha_eq(m->lhs, m->rhs)) {
          fail(pos, "VacuousEq", "eq-e: the identity premise must have distinct sides");
          return;
        }
        if (!leibniz_match(P[1]->conclusion, C, m->lhs, m->rhs))
          shape_fail(
              "eq-e: conclusion must be the minor premise with occurrences of the left term "
              "replaced by the right term");
        return;
      }
      case RuleId::II: {
        const std::string& a = d->eigens[0];
        if (C->kind != FormulaKind::IQuant) {
          shape_fail("ii: conclusion must be an I formula");
          return;
        }
        const FormulaPtr& F = C->left;
        const FormulaPtr& G = C->right;
        const std::string& x = C->bound_var;
        if (P[2]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ii: third premise must be an existence formula");
          return;
        }
        TermPtr t = P[2]->conclusion->lhs;
        if (!alpha_eq(P[0]->conclusion, substitute(F, x, t))) {
          shape_fail("ii: first premise must be the restrictor at the term");
          return;
        }
        if (!alpha_eq(P[1]->conclusion, substitute(G, x, t))) {
          shape_fail("ii: second premise must be the scope at the term");
          return;
        }
        const FormulaPtr& e = P[3]->conclusion;
        if (e->kind != FormulaKind::Eq || e->lhs->kind != TermKind::Param || e->lhs->name != a ||
            !term_alpha_eq(e->rhs, t)) {
          shape_fail("ii: fourth premise must conclude a=t for the eigenparameter");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(F, x, mk_param(a)), 3},
                               {mk_exists_bang(mk_param(a)), 3}}))
          return;
        if (occurs_term(a, t) || occurs(a, F) || occurs(a, G)) {
          fail(pos, "EigenNotFresh",
               "ii: eigenparameter must differ from the term and stay out of restrictor and "
               "scope");
          return;
        }
        eigen_open_ok(d, 3, {d->discharges[0], d->discharges[1]}, a, pos);
        return;
      }
      case RuleId::IE1p: {
        const std::string& a = d->eigens[0];
        const std::string& b = d->eigens[1];
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::IQuant) {
          shape_fail("ie1p: major premise must be an I formula");
          return;
        }
        const FormulaPtr& F = m->left;
        const FormulaPtr& G = m->right;
        const std::string& x = m->bound_var;
        if (P[2]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ie1p: third premise must be an existence formula");
          return;
        }
        TermPtr t = P[2]->conclusion->lhs;
        if (!alpha_eq(P[1]->conclusion, substitute(F, x, t))) {
          shape_fail("ie1p: second premise must be the restrictor at the term");
          return;
        }
        const FormulaPtr& e = P[3]->conclusion;
        if (e->kind != FormulaKind::Eq || e->lhs->kind != TermKind::Param || e->lhs->name != a ||
            !term_alpha_eq(e->rhs, t)) {
          shape_fail("ie1p: fourth premise must conclude a=t for the first eigenparameter");
          return;
        }
        if (!alpha_eq(P[4]->conclusion, C)) {
          shape_fail("ie1p: fifth premise must conclude the conclusion");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(F, x, mk_param(a)), 3},
                               {mk_exists_bang(mk_param(a)), 3},
                               {substitute(F, x, mk_param(b)), 4},
                               {substitute(G, x, mk_param(b)), 4},
                               {mk_exists_bang(mk_param(b)), 4}}))
          return;
        if (occurs_term(a, t) || occurs(a, F) || occurs(a, G)) {
          fail(pos, "EigenNotFresh",
               "ie1p: first eigenparameter must differ from the term and stay out of restrictor "
               "and scope");
          return;
        }
        if (!eigen_open_ok(d, 3, {d->discharges[0], d->discharges[1]}, a, pos)) return;
        if (occurs(b, F) || occurs(b, G)) {
          fail(pos, "EigenNotFresh",
               "ie1p: second eigenparameter must stay out of restrictor and scope");
          return;
        }
        if (occurs(b, C)) {
          fail(pos, "EigenInConclusion",
               "ie1p: second eigenparameter occurs in the conclusion");
          return;
        }
        eigen_open_ok(d, 4, {d->discharges[2], d->discharges[3], d->discharges[4]}, b, pos);
        return;
      }
      case RuleId::IE2p: {
        const FormulaPtr& m = P[0]->conclusion;
        if (!i_exists_scope(m)) {
          shape_fail("ie2p: major premise must be an I formula with existence scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (P[1]->conclusion->kind != FormulaKind::ExistsBang ||
            P[2]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ie2p: second and third premises must be existence formulas");
          return;
        }
        TermPtr t1 = P[1]->conclusion->lhs;
        TermPtr t2 = P[2]->conclusion->lhs;
        if (!alpha_eq(P[3]->conclusion, substitute(F, x, t1)) ||
            !alpha_eq(P[4]->conclusion, substitute(F, x, t2))) {
          shape_fail("ie2p: fourth and fifth premises must be the restrictor at the two terms");
          return;
        }
        if (!is_atomic(P[5]->conclusion) || !is_atomic(C)) {
          fail(pos, "NotAtomic", "ie2p: replacement premise and conclusion must be atomic");
          return;
        }
        if (!leibniz_match(P[5]->conclusion, C, t1, t2))
          shape_fail(
              "ie2p: conclusion must be the sixth premise with the first term replaced by the "
              "second");
        return;
      }
      case RuleId::IE3p: {
        const std::string& a = d->eigens[0];
        const FormulaPtr& m = P[0]->conclusion;
        if (!i_exists_scope(m)) {
          shape_fail("ie3p: major premise must be an I formula with existence scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (!alpha_eq(P[1]->conclusion, C)) {
          shape_fail("ie3p: minor premise must conclude the conclusion");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(F, x, mk_param(a)), 1},
                               {mk_exists_bang(mk_param(a)), 1}}))
          return;
        if (occurs(a, F)) {
          fail(pos, "EigenNotFresh", "ie3p: eigenparameter occurs in the restrictor");
          return;
        }
        if (occurs(a, C)) {
          fail(pos, "EigenInConclusion", "ie3p: eigenparameter occurs in the conclusion");
          return;
        }
        eigen_open_ok(d, 1, {d->discharges[0], d->discharges[1]}, a, pos);
        return;
      }
      case RuleId::IE4p: {
        const FormulaPtr& m = P[0]->conclusion;
        TermPtr t2;
        if (!i_eq_scope(m, &t2)) {
          shape_fail("ie4p: major premise must be an I formula with identity scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (P[1]->conclusion->kind != FormulaKind::ExistsBang ||
            P[2]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ie4p: second and third premises must be existence formulas");
          return;
        }
        TermPtr t1 = P[1]->conclusion->lhs;
        if (!term_alpha_eq(P[2]->conclusion->lhs, t2)) {
          shape_fail("ie4p: third premise must assert existence of the scope term");
          return;
        }
        if (!alpha_eq(P[3]->conclusion, substitute(F, x, t1))) {
          shape_fail("ie4p: fourth premise must be the restrictor at the first term");
          return;
        }
        if (!is_atomic(P[4]->conclusion) || !is_atomic(C)) {
          fail(pos, "NotAtomic", "ie4p: replacement premise and conclusion must be atomic");
          return;
        }
        if (!leibniz_match(P[4]->conclusion, C, t1, t2))
          shape_fail(
              "ie4p: conclusion must be the fifth premise with the first term replaced by the "
              "scope term");
        return;
      }
      case RuleId::IE5p: {
        const std::string& a = d->eigens[0];
        const FormulaPtr& m = P[0]->conclusion;
        TermPtr t;
        if (!i_eq_scope(m, &t)) {
          shape_fail("ie5p: major premise must be an I formula with identity scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (P[1]->conclusion->kind != FormulaKind::ExistsBang ||
            !term_alpha_eq(P[1]->conclusion->lhs, t)) {
          shape_fail("ie5p: second premise must assert existence of the scope term");
          return;
        }
        if (!alpha_eq(P[2]->conclusion, C)) {
          shape_fail("ie5p: minor premise must conclude the conclusion");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(F, x, mk_param(a)), 2},
                               {mk_exists_bang(mk_param(a)), 2}}))
          return;
        if (occurs(a, F) || occurs_term(a, t)) {
          fail(pos, "EigenNotFresh",
               "ie5p: eigenparameter must stay out of the restrictor and the scope term");
          return;
        }
        if (occurs(a, C)) {
          fail(pos, "EigenInConclusion", "ie5p: eigenparameter occurs in the conclusion");
          return;
        }
        eigen_open_ok(d, 2, {d->discharges[0], d->discharges[1]}, a, pos);
        return;
      }
      case RuleId::IE1pPrime: {
        const std::string& a = d->eigens[0];
        const FormulaPtr& m = P[0]->conclusion;
        if (m->kind != FormulaKind::IQuant) {
          shape_fail("ie1p': first premise must be an I formula");
          return;
        }
        const FormulaPtr& F = m->left;
        const FormulaPtr& G = m->right;
        const std::string& x = m->bound_var;
        if (!alpha_eq(P[1]->conclusion, mk_i(x, F, mk_exists_bang(mk_var(x))))) {
          shape_fail(
              "ie1p': second premise must be the existence-scoped I formula over the same "
              "restrictor");
          return;
        }
        if (!alpha_eq(P[2]->conclusion, C)) {
          shape_fail("ie1p': minor premise must conclude the conclusion");
          return;
        }
        if (!check_discharges(d, pos,
                              {{substitute(F, x, mk_param(a)), 2},
                               {substitute(G, x, mk_param(a)), 2},
                               {mk_exists_bang(mk_param(a)), 2}}))
          return;
        if (occurs(a, F) || occurs(a, G)) {
          fail(pos, "EigenNotFresh",
               "ie1p': eigenparameter must stay out of restrictor and scope");
          return;
        }
        if (occurs(a, C)) {
          fail(pos, "EigenInConclusion", "ie1p': eigenparameter occurs in the conclusion");
          return;
        }
        eigen_open_ok(d, 2, {d->discharges[0], d->discharges[1], d->discharges[2]}, a, pos);
        return;
      }
      case RuleId::IE2pPrime: {
        const FormulaPtr& m = P[0]->conclusion;
        if (!i_exists_scope(m)) {
          shape_fail("ie2p': major premise must be an I formula with existence scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (P[1]->conclusion->kind != FormulaKind::ExistsBang ||
            P[2]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ie2p': second and third premises must be existence formulas");
          return;
        }
        TermPtr t1 = P[1]->conclusion->lhs;
        TermPtr t2 = P[2]->conclusion->lhs;
        if (!alpha_eq(P[3]->conclusion, substitute(F, x, t1)) ||
            !alpha_eq(P[4]->conclusion, substitute(F, x, t2))) {
          shape_fail("ie2p': fourth and fifth premises must be the restrictor at the two terms");
          return;
        }
        if (C->kind != FormulaKind::Eq || !term_alpha_eq(C->lhs, t1) ||
            !term_alpha_eq(C->rhs, t2))
          shape_fail("ie2p': conclusion must identify the two terms in order");
        return;
      }
      case RuleId::IE4pPrime: {
        const FormulaPtr& m = P[0]->conclusion;
        TermPtr t2;
        if (!i_eq_scope(m, &t2)) {
          shape_fail("ie4p': major premise must be an I formula with identity scope");
          return;
        }
        const FormulaPtr& F = m->left;
        const std::string& x = m->bound_var;
        if (P[1]->conclusion->kind != FormulaKind::ExistsBang) {
          shape_fail("ie4p': second premise must be an existence formula");
          return;
        }
        TermPtr t1 = P[1]->conclusion->lhs;
        if (P[2]->conclusion->kind != FormulaKind::ExistsBang ||
            !term_alpha_eq(P[2]->conclusion->lhs, t2)) {
          shape_fail("ie4p': third premise must assert existence of the scope term");
          return;
        }
        if (!alpha_eq(P[3]->conclusion, substitute(F, x, t1))) {
          shape_fail("ie4p': fourth premise must be the restrictor at the first term");
          return;
        }
        if (C->kind != FormulaKind::Eq || !term_alpha_eq(C->lhs, t1) ||
            !term_alpha_eq(C->rhs, t2))
          shape_fail("ie4p': conclusion must identify the two terms in order");
        return;
      }
    }
  }

  // Restricted systems: flag the first formula (pre-order over node
  // conclusions) that leaves the restricted fragment. One diagnostic at most.
  bool scan_restrictions(const DeductionPtr& d, Position& pos) {
    std::optional<std::string> hit = system == SystemId::IPF_IR
                                         ? scan_i_restriction(d->conclusion)
                                         : scan_iota_restriction(d->conclusion);
    if (hit) {
      std::string msg = *hit == "RestrictedLeibniz"
                            ? "identity between two distinct descriptions is outside the "
                              "restricted fragment"
                            : (system == SystemId::IPF_IR
                                   ? "I formulas must have existence or identity scope here"
                                   : "descriptions may appear only under ex! or on one side of "
                                     "an identity here");
      diags.push_back({pos, *hit, std::move(msg)});
      return true;
    }
    if (d->node == NodeKind::Rule) {
      for (int i = 0; i < static_cast<int>(d->premises.size()); ++i) {
        pos.push_back(i);
        bool found = scan_restrictions(d->premises[i], pos);
        pos.pop_back();
        if (found) return true;
      }
    }
    return false;
  }
};

}  // namespace

CheckReport check(const DeductionPtr& d, SystemId system) {
  CheckReport rep;
  rep.system = system;
  if (!d) {
    rep.valid = false;
    rep.diagnostics.push_back({{}, "WrongPremiseShape", "empty deduction"});
    return rep;
  }
  Checker ck{system, {}};
  Position pos;
  ck.visit(d, pos);
  if (system_restricted(system)) ck.scan_restrictions(d, pos);
  rep.diagnostics = std::move(ck.diags);
  rep.valid = rep.diagnostics.empty();
  return rep;
}

}  // namespace ipf

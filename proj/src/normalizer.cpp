#include "ipf/normalizer.hpp"

#include <algorithm>
#include <sstream>

#include "ipf/checker.hpp"

namespace ipf {

namespace {

bool rule_node(const DeductionPtr& d) { return d && d->node == NodeKind::Rule; }
bool intro_node(const DeductionPtr& d) { return rule_node(d) && rule_info(d->rule).is_intro; }
bool elim_node(const DeductionPtr& d) { return rule_node(d) && rule_info(d->rule).is_elim; }
bool del_node(const DeductionPtr& d) { return rule_node(d) && is_del_rule(d->rule); }

// A reducible spot: an elimination whose major premise is the conclusion of
// an introduction (detour) or of a del-rule (segment to permute past).
struct Candidate {
  bool perm = false;
  Position elim;
  int degree = 0;
  std::vector<std::vector<Position>> chains;  // perm only, each topmost-first
};

// All same-formula chains running from a non-del node down through minor
// premises of del-rules to `n` (itself a del-rule). Positions are topmost
// first, so each chain ends with `at`.
std::vector<std::vector<Position>> chase(const DeductionPtr& n, const Position& at) {
  if (!del_node(n)) return {{at}};
  std::vector<std::vector<Position>> out;
  for (int m : rule_info(n->rule).del_minors) {
    Position q = at;
    q.push_back(m);
    for (auto& chain : chase(n->premises[m], q)) {
      chain.push_back(at);
      out.push_back(std::move(chain));
    }
  }
  return out;
}

void collect(const DeductionPtr& n, Position& at, std::vector<Candidate>& out) {
  if (!rule_node(n)) return;
  for (int i = 0; i < static_cast<int>(n->premises.size()); ++i) {
    at.push_back(i);
    collect(n->premises[i], at, out);
    at.pop_back();
  }
  if (!rule_info(n->rule).is_elim || n->premises.empty()) return;
  const DeductionPtr& maj = n->premises[0];
  if (intro_node(maj)) {
    out.push_back({false, at, degree(maj->conclusion), {}});
  } else if (del_node(maj)) {
    Position q = at;
    q.push_back(0);
    out.push_back({true, at, degree(maj->conclusion), chase(maj, q)});
  }
}

std::vector<Candidate> find_candidates(const DeductionPtr& d) {
  std::vector<Candidate> out;
  Position at;
  collect(d, at, out);
  return out;
}

Rank rank_of(const std::vector<Candidate>& cands) {
  Rank r;
  for (const auto& c : cands) r.d = std::max(r.d, c.degree);
  if (cands.empty()) return r;
  for (const auto& c : cands) {
    if (c.degree != r.d) continue;
    if (!c.perm) {
      r.l += 1;
    } else {
      for (const auto& chain : c.chains) r.l += static_cast<int>(chain.size());
    }
  }
  return r;
}

// q lies at or inside the subtree rooted at p.
bool within(const Position& q, const Position& p) {
  return q.size() >= p.size() && std::equal(p.begin(), p.end(), q.begin());
}

// Formula-occurrence positions the candidate owns: the introduction node for
// a detour, every chain node for a segment.
std::vector<Position> occurrences(const Candidate& c) {
  if (!c.perm) {
    Position p = c.elim;
    p.push_back(0);
    return {p};
  }
  std::vector<Position> out;
  for (const auto& chain : c.chains) out.insert(out.end(), chain.begin(), chain.end());
  return out;
}

// The chain of eliminations to move in one permutation step: the candidate
// elimination itself, then each parent elimination consuming the previous
// conclusion as its major premise while that conclusion still has top
// degree (leaving it behind would spawn fresh top-degree segments below).
std::vector<std::pair<Position, DeductionPtr>> build_stack(const DeductionPtr& root,
                                                           const Position& elim, int dstar) {
  std::vector<std::pair<Position, DeductionPtr>> stack;
  Position at = elim;
  stack.emplace_back(at, subtree_at(root, at));
  while (!at.empty() && at.back() == 0 && degree(stack.back().second->conclusion) == dstar) {
    Position par = at;
    par.pop_back();
    DeductionPtr pn = subtree_at(root, par);
    if (!elim_node(pn)) break;
    stack.emplace_back(par, pn);
    at = par;
  }
  return stack;
}

// Candidates whose reduction would duplicate or lengthen another top-degree
// candidate's material are held back; some other candidate is always free.
bool blocked(const Candidate& c, const std::vector<const Candidate*>& top,
             const std::vector<std::pair<Position, DeductionPtr>>& stack) {
  for (const Candidate* o : top) {
    if (o == &c) continue;
    for (const auto& q : occurrences(*o)) {
      if (!c.perm) {
        if (within(q, c.elim) && q != c.elim) return true;
        continue;
      }
      // Side premises of every stacked elimination get copied per branch.
      for (const auto& [pos, node] : stack) {
        for (int m = 1; m < static_cast<int>(node->premises.size()); ++m) {
          Position side = pos;
          side.push_back(m);
          if (within(q, side)) return true;
        }
      }
      // A chain topping out at the stack bottom would grow by the step.
      if (q == stack.back().first) return true;
    }
  }
  return false;
}

bool deeper_righter(const Position& a, const Position& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a > b;
}

// ---------------------------------------------------------------------------
// Conversions

// Remove =E applications whose major premise concludes a reflexive identity;
// substitution steps can leave such husks behind.
DeductionPtr sweep_vacuous(const DeductionPtr& d) {
  if (!rule_node(d)) return d;
  std::vector<DeductionPtr> prems;
  prems.reserve(d->premises.size());
  bool changed = false;
  for (const auto& p : d->premises) {
    auto q = sweep_vacuous(p);
    changed = changed || q != p;
    prems.push_back(std::move(q));
  }
  DeductionPtr cur =
      changed ? mk_rule(d->rule, d->conclusion, std::move(prems), d->discharges, d->eigens) : d;
  if (cur->rule == RuleId::EqE) {
    const FormulaPtr& maj = cur->premises[0]->conclusion;
    if (maj->kind == FormulaKind::Eq && term_alpha_eq(maj->lhs, maj->rhs))
      return cur->premises[1];
  }
  return cur;
}

// e is an elimination whose major premise i = e->premises[0] is an
// introduction of the major's formula. Build the direct derivation.
DeductionPtr convert_detour(const DeductionPtr& e, NamePool& pool) {
  const DeductionPtr& i = e->premises[0];
  switch (e->rule) {
    case RuleId::AndEL:
      return i->premises[0];
    case RuleId::AndER:
      return i->premises[1];
    case RuleId::ImpE:
      return graft(i->premises[0], i->discharges[0], e->premises[1]);
    case RuleId::IffE1:
      return graft(i->premises[0], i->discharges[0], e->premises[1]);
    case RuleId::IffE2:
      return graft(i->premises[1], i->discharges[1], e->premises[1]);
    case RuleId::OrE:
      if (i->rule == RuleId::OrIL) return graft(e->premises[1], e->discharges[0], i->premises[0]);
      return graft(e->premises[2], e->discharges[1], i->premises[0]);
    case RuleId::ForallE: {
      const TermPtr& t = e->premises[1]->conclusion->lhs;
      auto body = substitute_in_deduction(i->premises[0], i->eigens[0], t);
      return graft(body, i->discharges[0], e->premises[1]);
    }
    case RuleId::ExistsE: {
      const TermPtr& t = i->premises[1]->conclusion->lhs;
      auto body = substitute_in_deduction(e->premises[1], e->eigens[0], t);
      body = graft(body, e->discharges[0], i->premises[0]);
      return graft(body, e->discharges[1], i->premises[1]);
    }
    case RuleId::IE1p: {
      // Instantiate the general minor at the introduction's witness and feed
      // it the introduction's three premises.
      const TermPtr& t1 = i->premises[2]->conclusion->lhs;
      auto body = substitute_in_deduction(e->premises[4], e->eigens[1], t1);
      body = graft(body, e->discharges[2], i->premises[0]);
      body = graft(body, e->discharges[3], i->premises[1]);
      return graft(body, e->discharges[4], i->premises[2]);
    }
    case RuleId::IE3p: {
      const TermPtr& t1 = i->premises[2]->conclusion->lhs;
      auto body = substitute_in_deduction(e->premises[1], e->eigens[0], t1);
      body = graft(body, e->discharges[0], i->premises[0]);
      return graft(body, e->discharges[1], i->premises[1]);
    }
    case RuleId::IE5p: {
      const TermPtr& t1 = i->premises[2]->conclusion->lhs;
      auto body = substitute_in_deduction(e->premises[2], e->eigens[0], t1);
      body = graft(body, e->discharges[0], i->premises[0]);
      return graft(body, e->discharges[1], i->premises[2]);
    }
    case RuleId::IE2p: {
      // Two instances of the introduction's uniqueness minor give u = t1 and
      // v = t1; symmetry and transitivity by =E over reflexive identities
      // turn them into u = v, which carries the replaced premise across.
      const TermPtr& t1 = i->premises[2]->conclusion->lhs;
      const TermPtr& u = e->premises[1]->conclusion->lhs;
      const TermPtr& v = e->premises[2]->conclusion->lhs;
      const DeductionPtr& xi = i->premises[3];
      auto x1 = substitute_in_deduction(xi, i->eigens[0], v);
      x1 = graft(x1, i->discharges[0], e->premises[4]);
      x1 = graft(x1, i->discharges[1], e->premises[2]);
      auto xi2 = refresh_internal(xi, pool);
      auto x2 = substitute_in_deduction(xi2, i->eigens[0], u);
      x2 = graft(x2, i->discharges[0], e->premises[3]);
      x2 = graft(x2, i->discharges[1], e->premises[1]);
      auto sym = mk_rule(RuleId::EqE, mk_eq(t1, v), {x1, mk_eqrefl(v)});
      auto trans = mk_rule(RuleId::EqE, mk_eq(u, v), {sym, x2});
      return mk_rule(RuleId::EqE, e->conclusion, {trans, e->premises[5]});
    }
    case RuleId::IE4p: {
      // One instance of the uniqueness minor gives u = w; the introduction's
      // scope premise w = s then bridges to u = s by transitivity.
      const TermPtr& u = e->premises[1]->conclusion->lhs;
      const TermPtr& s = e->premises[2]->conclusion->lhs;
      const DeductionPtr& xi = i->premises[3];
      auto x = substitute_in_deduction(xi, i->eigens[0], u);
      x = graft(x, i->discharges[0], e->premises[3]);
      x = graft(x, i->discharges[1], e->premises[1]);
      auto trans = mk_rule(RuleId::EqE, mk_eq(u, s), {i->premises[1], x});
      return mk_rule(RuleId::EqE, e->conclusion, {trans, e->premises[4]});
    }
    default:
      throw KernelError("InternalNonTermination", "no detour conversion for " + rule_name(e->rule));
  }
}

// Rebuild the stacked eliminations on top of one del-rule branch.
DeductionPtr wrap_stack(const std::vector<std::pair<Position, DeductionPtr>>& stack,
                        DeductionPtr major) {
  DeductionPtr cur = std::move(major);
  for (const auto& [pos, y] : stack) {
    std::vector<DeductionPtr> prems = y->premises;
    prems[0] = cur;
    cur = mk_rule(y->rule, y->conclusion, std::move(prems), y->discharges, y->eigens);
  }
  return cur;
}

// Move the stacked eliminations past the del-rule into each of its minor
// branches; copies beyond the first get fresh internal labels and
// eigenparameters.
DeductionPtr convert_perm(const std::vector<std::pair<Position, DeductionPtr>>& stack,
                          NamePool& pool) {
  const DeductionPtr& del = stack.front().second->premises[0];
  std::vector<DeductionPtr> prems = del->premises;
  bool first = true;
  for (int m : rule_info(del->rule).del_minors) {
    auto branch = wrap_stack(stack, del->premises[m]);
    if (!first) branch = refresh_internal(branch, pool);
    first = false;
    prems[m] = branch;
  }
  return mk_rule(del->rule, stack.back().second->conclusion, std::move(prems), del->discharges,
                 del->eigens);
}

}  // namespace

std::string rank_string(const Rank& r) {
  std::ostringstream os;
  os << '<' << r.d << ',' << r.l << '>';
  return os.str();
}

std::string trace_line(int n, const ReductionStep& s) {
  std::ostringstream os;
  os << "STEP " << n << ' ' << (s.kind == StepKind::Detour ? "detour" : "permutation") << ' '
     << s.rules << " rank " << rank_string(s.before) << " -> " << rank_string(s.after);
  return os.str();
}

std::vector<Position> maximal_formulas(const DeductionPtr& d) {
  std::vector<Position> out;
  for (const auto& c : find_candidates(d)) {
    if (c.perm) continue;
    Position p = c.elim;
    p.push_back(0);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Segment> maximal_segments(const DeductionPtr& d) {
  std::vector<Segment> out;
  for (const auto& c : find_candidates(d)) {
    if (!c.perm) continue;
    for (const auto& chain : c.chains) out.push_back({chain, c.degree});
  }
  return out;
}

Rank rank(const DeductionPtr& d) { return rank_of(find_candidates(d)); }

bool is_normal(const DeductionPtr& d) { return find_candidates(d).empty(); }

std::vector<Redex> redexes(const DeductionPtr& d) {
  std::vector<Redex> out;
  for (const auto& c : find_candidates(d)) out.push_back({c.elim, c.perm, c.degree});
  return out;
}

DeductionPtr reduce_at(const DeductionPtr& d, const Redex& r) {
  NamePool pool;
  pool.absorb(d);
  Position site = r.elim;
  DeductionPtr replacement;
  if (r.perm) {
    auto stack = build_stack(d, r.elim, r.degree);
    site = stack.back().first;
    replacement = convert_perm(stack, pool);
  } else {
    replacement = convert_detour(subtree_at(d, r.elim), pool);
  }
  return replace_at(d, site, sweep_vacuous(replacement));
}

std::pair<DeductionPtr, ReductionStep> reduce_once(const DeductionPtr& d0) {
  DeductionPtr d = uniquify_parameters(elaborate_macros(d0));
  auto cands = find_candidates(d);
  if (cands.empty()) throw KernelError("AlreadyNormal", "deduction is already normal");
  Rank before = rank_of(cands);

  std::vector<const Candidate*> top;
  for (const auto& c : cands)
    if (c.degree == before.d) top.push_back(&c);

  const Candidate* pick = nullptr;
  std::vector<std::pair<Position, DeductionPtr>> pick_stack;
  for (const Candidate* c : top) {
    std::vector<std::pair<Position, DeductionPtr>> stack;
    if (c->perm) stack = build_stack(d, c->elim, before.d);
    if (blocked(*c, top, stack)) continue;
    if (!pick || deeper_righter(c->elim, pick->elim)) {
      pick = c;
      pick_stack = std::move(stack);
    }
  }
  if (!pick) {
    // Every top-degree candidate interlocks with another; fall back to the
    // innermost one rather than stalling.
    for (const Candidate* c : top)
      if (!pick || deeper_righter(c->elim, pick->elim)) pick = c;
    if (pick->perm) pick_stack = build_stack(d, pick->elim, before.d);
  }

  NamePool pool;
  pool.absorb(d);
  DeductionPtr node = subtree_at(d, pick->elim);
  std::string rules = rule_name(node->premises[0]->rule) + "/" + rule_name(node->rule);

  Position site;
  DeductionPtr replacement;
  if (pick->perm) {
    site = pick_stack.back().first;
    replacement = convert_perm(pick_stack, pool);
  } else {
    site = pick->elim;
    replacement = convert_detour(node, pool);
  }
  replacement = sweep_vacuous(replacement);

  DeductionPtr out = replace_at(d, site, replacement);
  ReductionStep step{pick->perm ? StepKind::Permutation : StepKind::Detour, rules, site, before,
                     rank(out)};
  return {out, step};
}

std::pair<DeductionPtr, std::vector<ReductionStep>> normalize(const DeductionPtr& d0) {
  DeductionPtr cur = uniquify_parameters(elaborate_macros(d0));
  std::vector<ReductionStep> steps;
  constexpr int kBudget = 100000;
  while (!is_normal(cur)) {
    if (static_cast<int>(steps.size()) >= kBudget)
      throw KernelError("InternalNonTermination", "step budget exhausted");
    auto [next, step] = reduce_once(cur);
    cur = std::move(next);
    steps.push_back(std::move(step));
  }
  return {cur, steps};
}

}  // namespace ipf

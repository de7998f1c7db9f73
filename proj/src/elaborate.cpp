#include "ipf/checker.hpp"

#include <utility>
#include <vector>

namespace ipf {

namespace {

// The primed rules are shortcuts. ie2p' and ie4p' each absorb one trailing
// identity-replacement step, so expanding them only takes supplying the
// reflexivity axiom t1=t1 as the replacement premise (template t1=x). ie1p'
// unfolds into ie2p + ie1p + ie3p: derive b=c for two hypothetical witnesses
// of the restrictor, use that identity subproof as ie1p's linking premise,
// then close the remaining witness hypotheses with ie3p.
struct Elaborator {
  NamePool pool;

  [[noreturn]] static void unfit(const std::string& msg) {
    throw KernelError("NotElaborable", msg);
  }

  DeductionPtr walk(const DeductionPtr& d) {
    if (d->node != NodeKind::Rule) return d;
    std::vector<DeductionPtr> kids;
    kids.reserve(d->premises.size());
    bool changed = false;
    for (auto& p : d->premises) {
      kids.push_back(walk(p));
      changed |= kids.back() != p;
    }
    DeductionPtr base =
        changed ? mk_rule(d->rule, d->conclusion, std::move(kids), d->discharges, d->eigens) : d;
    switch (d->rule) {
      case RuleId::IE2pPrime: return reflexivity_expand(base, RuleId::IE2p, 5, "ie2p'");
      case RuleId::IE4pPrime: return reflexivity_expand(base, RuleId::IE4p, 4, "ie4p'");
      case RuleId::IE1pPrime: return expand_ie1p_prime(base);
      default: return base;
    }
  }

  static DeductionPtr reflexivity_expand(const DeductionPtr& d, RuleId target, int arity,
                                         const char* name) {
    if (static_cast<int>(d->premises.size()) != arity)
      unfit(std::string(name) + ": wrong premise count");
    const FormulaPtr& e1 = d->premises[1]->conclusion;
    if (e1->kind != FormulaKind::ExistsBang)
      unfit(std::string(name) + ": second premise must be an existence formula");
    auto prems = d->premises;
    prems.push_back(mk_eqrefl(e1->lhs));
    return mk_rule(target, d->conclusion, std::move(prems));
  }

  DeductionPtr expand_ie1p_prime(const DeductionPtr& d) {
    if (d->premises.size() != 3 || d->eigens.size() != 1 || d->discharges.size() != 3)
      unfit("ie1p': expected three premises, one eigenparameter, three discharge labels");
    const DeductionPtr& p0 = d->premises[0];
    const DeductionPtr& p1 = d->premises[1];
    const DeductionPtr& p2 = d->premises[2];
    if (p0->conclusion->kind != FormulaKind::IQuant ||
        p1->conclusion->kind != FormulaKind::IQuant)
      unfit("ie1p': first two premises must be I formulas");
    const FormulaPtr& F = p0->conclusion->left;
    const std::string& x = p0->conclusion->bound_var;
    const FormulaPtr& C = d->conclusion;

    std::string b = pool.fresh("b");
    std::string c = pool.fresh("c");
    std::string lab_fb = pool.fresh("i1");
    std::string lab_eb = pool.fresh("i2");
    std::string lab_fc = pool.fresh("k");
    std::string lab_ec = pool.fresh("j");

    FormulaPtr fb = substitute(F, x, mk_param(b));
    FormulaPtr fc = substitute(F, x, mk_param(c));
    DeductionPtr as_fb = mk_assume(lab_fb, fb);
    DeductionPtr as_eb = mk_assume(lab_eb, mk_exists_bang(mk_param(b)));
    DeductionPtr as_fc = mk_assume(lab_fc, fc);
    DeductionPtr as_ec = mk_assume(lab_ec, mk_exists_bang(mk_param(c)));

    // The existence-scoped premise is used twice; the second copy gets fresh
    // internal names so the result stays structurally well-formed.
    DeductionPtr p1copy = refresh_internal(p1, pool);

    DeductionPtr identity = mk_rule(
        RuleId::IE2p, mk_eq(mk_param(b), mk_param(c)),
        {p1copy, as_eb, as_ec, as_fb, as_fc, mk_eqrefl(mk_param(b))});
    DeductionPtr body = mk_rule(
        RuleId::IE1p, C, {p0, as_fc, as_ec, identity, p2},
        {lab_fb, lab_eb, d->discharges[0], d->discharges[1], d->discharges[2]},
        {b, d->eigens[0]});
    return mk_rule(RuleId::IE3p, C, {p1, body}, {lab_fc, lab_ec}, {c});
  }
};

}  // namespace

DeductionPtr elaborate_macros(const DeductionPtr& d) {
  if (!d) return d;
  Elaborator e;
  e.pool.absorb(d);
  return e.walk(d);
}

}  // namespace ipf

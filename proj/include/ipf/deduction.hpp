#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipf/syntax.hpp"

namespace ipf {

enum class RuleId {
  AndI,
  AndEL,
  AndER,
  ImpI,
  ImpE,
  OrIL,
  OrIR,
  OrE,
  BotE,
  IffI,
  IffE1,
  IffE2,
  ForallI,
  ForallE,
  ExistsI,
  ExistsE,
  EqE,
  II,
  IE1p,
  IE2p,
  IE3p,
  IE4p,
  IE5p,
  IE1pPrime,
  IE2pPrime,
  IE4pPrime,
};

std::string rule_name(RuleId r);
std::optional<RuleId> rule_from_name(const std::string& name);

struct RuleInfo {
  int arity;                                  // number of premises
  int eigens;                                 // number of eigenparameters (0..2)
  int discharge_slots;                        // number of assumption classes discharged
  std::vector<int> eigen_scope;               // designated premise index per eigen
  std::vector<int> discharge_premise;         // designated premise index per slot
  bool is_intro;
  bool is_elim;                               // major premise is premise 0
  std::vector<int> del_minors;                // C-minor premise indices (del-rules only)
};

const RuleInfo& rule_info(RuleId r);
inline bool is_del_rule(RuleId r) {
  return r == RuleId::OrE || r == RuleId::ExistsE || r == RuleId::IE1p || r == RuleId::IE3p ||
         r == RuleId::IE5p;
}

enum class NodeKind { Assume, EqRefl, LL, Rule };

struct Deduction;
using DeductionPtr = std::shared_ptr<const Deduction>;

struct Deduction {
  NodeKind node = NodeKind::Assume;
  FormulaPtr conclusion;

  // Assume
  std::string label;

  // EqRefl
  TermPtr term;

  // LL: instance of forall y (iota x F = y <-> forall x (F <-> x = y))
  std::string ll_x, ll_y;
  FormulaPtr ll_body;

  // Rule
  RuleId rule = RuleId::AndI;
  std::vector<DeductionPtr> premises;
  std::vector<std::string> discharges;  // one label per slot (labels may repeat)
  std::vector<std::string> eigens;
};

DeductionPtr mk_assume(std::string label, FormulaPtr f);
DeductionPtr mk_eqrefl(TermPtr t);
DeductionPtr mk_ll(std::string x, std::string y, FormulaPtr body);
DeductionPtr mk_rule(RuleId r, FormulaPtr conclusion, std::vector<DeductionPtr> premises,
                     std::vector<std::string> discharges = {}, std::vector<std::string> eigens = {});

// The conclusion formula an LL node with these binders and body proves.
FormulaPtr ll_conclusion(const std::string& x, const std::string& y, const FormulaPtr& body);

using Position = std::vector<int>;
std::string position_string(const Position& pos);

DeductionPtr subtree_at(const DeductionPtr& d, const Position& pos);
DeductionPtr replace_at(const DeductionPtr& d, const Position& pos, const DeductionPtr& sub);

struct KernelError : std::runtime_error {
  std::string code;
  KernelError(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

// ---------------------------------------------------------------------------
// Proof scripts

struct ProofScript {
  std::string name;
  SystemId system = SystemId::IPF;
  std::vector<std::pair<char, std::string>> decls;  // ('c'|'p', name)
  DeductionPtr body;
};

// Parses a whole script. Formulas are read under the script's declared system
// (or `force_system` when given); structural invariants are checked here,
// logical side conditions belong to the checker.
ProofScript parse_script(const std::string& text,
                         std::optional<SystemId> force_system = std::nullopt);
DeductionPtr parse_proof(const std::string& text);
std::string print_script(const ProofScript& s);
std::string print_deduction(const DeductionPtr& d, int indent = 0);

// ---------------------------------------------------------------------------
// Queries

// Open assumption classes: label -> formula, for classes with at least one
// occurrence not discharged below the root.
std::map<std::string, FormulaPtr> open_assumptions(const DeductionPtr& d);

// Every label appearing in d, as assumption occurrence or discharge entry.
std::set<std::string> all_labels(const DeductionPtr& d);

// Parameters occurring in any formula of d.
std::set<std::string> params_of_deduction(const DeductionPtr& d);

// How many rule applications use each parameter as an eigenparameter.
std::map<std::string, int> eigen_uses(const DeductionPtr& d);

// ---------------------------------------------------------------------------
// Transformations

// Replace every open occurrence of class `label` by a copy of `sigma`.
// Occurrence formulas must be alpha-equal to sigma's conclusion. Internal
// labels and eigenparameters of the copies are refreshed as needed to keep
// the result structurally well-formed.
DeductionPtr graft(const DeductionPtr& d, const std::string& label, const DeductionPtr& sigma);

// Replace parameter a by term t in every formula. Throws EigenCapture when a
// (or a parameter of t) is an eigenparameter of some rule application in d.
DeductionPtr substitute_in_deduction(const DeductionPtr& d, const std::string& a, const TermPtr& t);

// Rename eigenparameters until each one is used by exactly one rule
// application and occurs only inside that application's designated minor
// subtree. Idempotent; deductions already in this form pass through
// unchanged.
DeductionPtr uniquify_parameters(const DeductionPtr& d);

// Fresh-name supply seeded with every name already used in a deduction.
struct NamePool {
  std::set<std::string> used;
  void absorb(const DeductionPtr& d);
  void absorb(const std::set<std::string>& names);
  std::string fresh(const std::string& base);
};

// Rename all internally discharged class labels and all eigenparameters of d
// to fresh names drawn from `pool` (used when splicing copies of a subtree).
DeductionPtr refresh_internal(const DeductionPtr& d, NamePool& pool);

// Structural equality modulo a bijective renaming of parameters and class
// labels (and alpha for bound variables).
bool equiv_mod_renaming(const DeductionPtr& a, const DeductionPtr& b);

int node_count(const DeductionPtr& d);

}  // namespace ipf

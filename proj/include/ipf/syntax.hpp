#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipf {

enum class SystemId { IPF, IPF_I, IPF_iota, IPF_IR, IPF_iotaR };

std::string to_string(SystemId s);
SystemId system_from_string(const std::string& s);

inline bool system_has_i(SystemId s) { return s == SystemId::IPF_I || s == SystemId::IPF_IR; }
inline bool system_has_iota(SystemId s) { return s == SystemId::IPF_iota || s == SystemId::IPF_iotaR; }
inline bool system_restricted(SystemId s) { return s == SystemId::IPF_IR || s == SystemId::IPF_iotaR; }

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class TermKind { Const, Param, Var, Iota };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;  // const/param/var name, or the iota-bound variable
  FormulaPtr body;   // Iota only

  Term(TermKind k, std::string n, FormulaPtr b = nullptr)
      : kind(k), name(std::move(n)), body(std::move(b)) {}
};

TermPtr mk_const(std::string name);
TermPtr mk_param(std::string name);
TermPtr mk_var(std::string name);
TermPtr mk_iota(std::string var, FormulaPtr body);

enum class FormulaKind {
  Atom,
  Bottom,
  Eq,
  ExistsBang,
  And,
  Or,
  Imp,
  Iff,
  Forall,
  Exists,
  IQuant
};

struct Formula {
  FormulaKind kind;
  std::string pred;           // Atom
  std::vector<TermPtr> args;  // Atom
  TermPtr lhs, rhs;           // Eq; lhs doubles as ExistsBang's argument
  FormulaPtr left, right;     // binary connectives; IQuant restrictor/scope; quantifier body in left
  std::string bound_var;      // Forall/Exists/IQuant
};

FormulaPtr mk_atom(std::string pred, std::vector<TermPtr> args);
FormulaPtr mk_bottom();
FormulaPtr mk_eq(TermPtr lhs, TermPtr rhs);
FormulaPtr mk_exists_bang(TermPtr arg);
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_not(FormulaPtr a);  // sugar: Imp(a, Bottom)
FormulaPtr mk_forall(std::string var, FormulaPtr body);
FormulaPtr mk_exists(std::string var, FormulaPtr body);
FormulaPtr mk_i(std::string var, FormulaPtr restrictor, FormulaPtr scope);

// Parse errors carry a stable code so callers can dispatch without string
// matching on the human-readable message.
struct ParseError : std::runtime_error {
  std::string code;  // SyntaxError, IotaNotAllowed, INotAllowed, RestrictionViolation, ...
  std::size_t position;
  ParseError(std::string c, std::size_t pos, const std::string& msg)
      : std::runtime_error(msg), code(std::move(c)), position(pos) {}
};

FormulaPtr parse_formula(const std::string& text, SystemId mode);
TermPtr parse_term(const std::string& text, SystemId mode);

std::string print_term(const TermPtr& t);
std::string print_formula(const FormulaPtr& f);

bool term_alpha_eq(const TermPtr& a, const TermPtr& b);
bool alpha_eq(const FormulaPtr& a, const FormulaPtr& b);

// A^x_t. t must have no free variables (constants, parameters and
// closed-but-for-their-own-binder iota terms qualify), so replacement never
// needs to rename binders in A.
FormulaPtr substitute(const FormulaPtr& a, const std::string& x, const TermPtr& t);
TermPtr substitute_term(const TermPtr& s, const std::string& x, const TermPtr& t);

// Replace parameter a by term t everywhere (used by rule transformations).
FormulaPtr substitute_param(const FormulaPtr& f, const std::string& a, const TermPtr& t);
TermPtr substitute_param_term(const TermPtr& s, const std::string& a, const TermPtr& t);

int degree(const FormulaPtr& f);

std::set<std::string> params_of(const FormulaPtr& f);
std::set<std::string> params_of_term(const TermPtr& t);
std::set<std::string> free_vars(const FormulaPtr& f);
std::set<std::string> free_vars_term(const TermPtr& t);
bool is_atomic(const FormulaPtr& f);  // Atom, Bottom, Eq, ExistsBang

bool contains_i(const FormulaPtr& f);
bool contains_iota(const FormulaPtr& f);

// Classify the first restriction breach in f, if any. For the restricted
// I-system every breach is a scope violation ("RestrictedScope"); for the
// restricted iota-system an identity with descriptions on both sides (other
// than a reflexive instance) is "RestrictedLeibniz" and every other illegal
// placement of a description is "RestrictedScope".
std::optional<std::string> scan_i_restriction(const FormulaPtr& f);
std::optional<std::string> scan_iota_restriction(const FormulaPtr& f);

// True when f contains an I-formula whose scope is neither ex!x nor x=t
// (t free of x), i.e. f breaks the restricted-I shape.
bool violates_i_restriction(const FormulaPtr& f);
// True when f uses an iota term anywhere other than as the argument of ex!
// or as exactly one side of an identity.
bool violates_iota_restriction(const FormulaPtr& f);

}  // namespace ipf

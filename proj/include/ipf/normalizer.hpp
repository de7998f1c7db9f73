#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ipf/deduction.hpp"

namespace ipf {

// Lexicographic <degree, count> measure of how far a deduction is from normal
// form. `d` is the highest degree among maximal formulas and maximal
// segments; `l` counts, at that degree, each maximal formula once and each
// maximal segment by its length. A normal deduction has rank <0,0>.
struct Rank {
  int d = 0;
  int l = 0;
};

inline bool operator==(const Rank& a, const Rank& b) { return a.d == b.d && a.l == b.l; }
inline bool operator!=(const Rank& a, const Rank& b) { return !(a == b); }
inline bool operator<(const Rank& a, const Rank& b) { return a.d != b.d ? a.d < b.d : a.l < b.l; }

std::string rank_string(const Rank& r);  // "<d,l>"

// A maximal segment: two or more occurrences of one formula, each
// non-final occurrence a minor premise of a del-rule (or-e, ex-e, ie1p,
// ie3p, ie5p) whose conclusion is the next occurrence, the first not itself
// a del-rule conclusion, and the last the major premise of an elimination.
// `occurrences` lists the node whose conclusion carries each occurrence,
// topmost first; the final entry is the del-rule sitting directly under the
// consuming elimination.
struct Segment {
  std::vector<Position> occurrences;
  int degree = 0;
  int length() const { return static_cast<int>(occurrences.size()); }
};

enum class StepKind { Detour, Permutation };

struct ReductionStep {
  StepKind kind = StepKind::Detour;
  std::string rules;  // "intro/elim" for detours, "del/elim" for permutations
  Position position;  // node that was rewritten
  Rank before;
  Rank after;
};

// One trace line, stable format: STEP <n> <kind> <rule(s)> rank <d,l> -> <d',l'>
std::string trace_line(int n, const ReductionStep& s);

// Positions of every formula occurrence that is simultaneously the
// conclusion of an introduction rule and the major (leftmost) premise of an
// elimination rule. The position returned is the introduction node's.
std::vector<Position> maximal_formulas(const DeductionPtr& d);

std::vector<Segment> maximal_segments(const DeductionPtr& d);

Rank rank(const DeductionPtr& d);

// True iff the deduction has neither maximal formulas nor maximal segments.
bool is_normal(const DeductionPtr& d);

// One reducible spot: the consuming elimination's position, whether the
// step there is a permutation or a detour conversion, and the degree of the
// maximal formula/segment. Positions refer to the tree as handed in, so
// callers enumerate and reduce on already-elaborated deductions (reduce_once
// and normalize elaborate on entry; shortcut-rule expansion would shift
// positions).
struct Redex {
  Position elim;
  bool perm = false;
  int degree = 0;
};

// Every redex in the deduction, in no particular order. Empty iff is_normal.
std::vector<Redex> redexes(const DeductionPtr& d);

// Apply the conversion at one redex, ignoring the default strategy's choice
// of which to fire. Same validity/conclusion/opens guarantees as reduce_once
// for that single step; rank may move arbitrarily. The exhaustive-order
// suite drives every reduction sequence through this.
DeductionPtr reduce_at(const DeductionPtr& d, const Redex& r);

// Apply one conversion to a maximal formula or segment of highest degree,
// chosen so that no other candidate of that degree stands in material the
// step would duplicate or extend (innermost-rightmost among the eligible
// ones, deterministically). Shortcut-rule applications are elaborated and
// parameters uniquified on entry; vacuous =E applications created by the
// step are swept away as part of it. The result is valid whenever the input
// was, proves an alpha-equal conclusion, and opens no new assumption
// formulas. Throws KernelError("AlreadyNormal") if there is nothing to do.
std::pair<DeductionPtr, ReductionStep> reduce_once(const DeductionPtr& d);

// Iterate reduce_once to a normal form, returning it with the full step
// trace. Rank strictly decreases at every step, which bounds the loop; a
// step budget of 100000 guards against driver bugs by throwing
// KernelError("InternalNonTermination").
std::pair<DeductionPtr, std::vector<ReductionStep>> normalize(const DeductionPtr& d);

}  // namespace ipf

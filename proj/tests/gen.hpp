#pragma once

// Deterministic random generators shared by the property-test suites and the
// acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "ipf/deduction.hpp"
#include "ipf/syntax.hpp"

namespace ipf::gen {

struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}

  int pick(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  bool coin() { return pick(0, 1) == 1; }
  template <class T>
  const T& choice(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(pick(0, static_cast<int>(xs.size()) - 1))];
  }
};

// Closed formula over a small vocabulary of predicates, constants and
// parameters; `mode` gates I and iota nodes. `size` bounds operator count.
FormulaPtr random_formula(Gen& g, SystemId mode, int size);

// Term with no free variables: constant, parameter or (iota modes) a closed
// description term.
TermPtr random_closed_term(Gen& g, SystemId mode, int size);

// Formula satisfying the restricted-I shape: every I scope is (ex! x) or
// (= x t). Used by the bridge round-trip and equivalence suites.
FormulaPtr random_restricted_formula(Gen& g, int size);

// Unary-predicate matrix with exactly the variable `x` free, for use as an
// I restrictor or template body.
FormulaPtr random_matrix(Gen& g, const std::string& x, int size);

// Valid deduction in `sys` (IPF or IPF_I; the iota systems are not
// generated) with at most `max_nodes` nodes. Grown forward from assumption
// seeds by randomly chosen rule applications, so validity holds by
// construction; intro-built majors land under matching eliminations often
// enough that detours and del-rule segments are common, while plenty of
// already-normal shapes come out too.
DeductionPtr random_deduction(Gen& g, SystemId sys, int max_nodes);

}  // namespace ipf::gen

#pragma once

#include <string>
#include <vector>

#include "ipf/deduction.hpp"

namespace ipf {

struct Diagnostic {
  Position position;
  std::string code;
  std::string message;
};

struct CheckReport {
  bool valid = true;
  SystemId system = SystemId::IPF;
  std::vector<Diagnostic> diagnostics;
};

// Validate every node of d as an application of a rule of `system`, side
// conditions included. Each node contributes at most one diagnostic (the
// first condition it fails); in the restricted systems a single extra
// diagnostic flags the first formula that breaks the scope or Leibniz
// restriction. valid iff no diagnostics. Never throws.
CheckReport check(const DeductionPtr& d, SystemId system);

// Rewrite every application of a shortcut rule (ie1p', ie2p', ie4p') into
// the primitive rules it abbreviates, preserving conclusion and open
// assumptions. Macro-free deductions come back unchanged. Throws
// KernelError("NotElaborable") when a shortcut node is too malformed to
// instantiate its expansion.
DeductionPtr elaborate_macros(const DeductionPtr& d);

}  // namespace ipf

#pragma once

#include <string>

#include "pmlo/formula.hpp"

namespace pmlo {

// Parses the .pmlo surface syntax.  Performs scope checking (every variable
// bound or free with a consistent sort) and rejects cross-step clock
// predicates (x@t1 - y@t2 with t1 != t2) with L_DIFF_UNDECIDABLE.
FormulaRef parse_formula(const std::string& text);

}  // namespace pmlo

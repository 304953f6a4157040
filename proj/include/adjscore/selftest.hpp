#pragma once

#include <ostream>

namespace adjscore {

// Embedded oracle suite: engine/oracle equivalence, the mean-median
// adjustment identity, GLM closed-form agreement, pmf and density
// normalization, and the Bartlett identities.  Prints one line per group;
// returns 0 iff every group passes.
int run_selftest(std::ostream& out);

}  // namespace adjscore

#pragma once

#include "adjscore/cumulants.hpp"

namespace adjscore {

// Mean and median score adjustments from the matrix representation.
// A single Cholesky factorization of the information matrix is reused for all
// solves; throws numerical_error when the information matrix is singular or
// has reciprocal condition below 1e-12.
AdjustmentBundle compute_adjustments(const CumulantSet& cumulants);

// Independent route to M1 by explicit nested summation over the profile-score
// cumulants kappa_1r, kappa_2r, kappa_3r.  O(d^4); intended for verification
// at small d.  Shares no code with compute_adjustments.
Vector index_notation_oracle(const CumulantTensor& tensor);

}  // namespace adjscore

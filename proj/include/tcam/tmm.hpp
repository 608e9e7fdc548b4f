#pragma once

#include <cstddef>

#include "tcam/completion.hpp"

namespace tcam {

/** Matrix-completion baseline on one tensor mode matricization. */
struct TmmConfig {
    std::size_t split = 1;  // rows take modes 1..split
    std::size_t rank = 1;   // r_split from the TT-rank vector
    double tol = 1e-4;
    std::size_t max_iter = 1000;
    double ridge = 0.0;

    void validate(std::size_t order) const;
};

/**
 * Alternating minimization on X_[split] ~ U V^T over the observed entries.
 *
 * U and V start from the truncated SVD of the zero-filled matricization
 * (U = left vectors, V = right vectors scaled by the singular values). Each
 * iteration solves every row of U, then every row of V, by minimum-norm least
 * squares; rows without observations keep their value.
 */
CompletionReport tmm_complete(const DenseTensor& data, const ObservationMask& mask, const TmmConfig& cfg);

}  // namespace tcam

#pragma once

#include <cstddef>
#include <vector>

#include "tcam/linalg.hpp"
#include "tcam/tensor.hpp"
#include "tcam/tt.hpp"

namespace tcam {

/**
 * Leading singular triplets of a matrix. `u` is rows x k, `v` is cols x k and
 * `s` holds the k kept singular values in nonincreasing order, so that
 * u * s.asDiagonal() * v.transpose() is the best rank-k approximation.
 */
struct SVDResult {
    Matrix u;
    Vector s;
    Matrix v;

    std::size_t rank() const noexcept { return static_cast<std::size_t>(s.size()); }
    Matrix reconstruct() const;
};

/**
 * Keeps min(r, rows, cols, numerical rank) components of a dense SVD.
 *
 * Singular values at or below max(rows, cols) * eps * sigma_max count as zero
 * and are dropped, so the returned rank may be smaller than `r`. Each left
 * vector is flipped so its largest-magnitude entry (first on ties) is positive;
 * the matching right vector is flipped with it.
 */
SVDResult truncated_svd(const Matrix& m, std::size_t r);

/**
 * Sequential truncated-SVD tensor train approximation.
 *
 * `rank` is [r_0, ..., r_n] with r_0 = r_n = 1. The returned chain always has
 * exactly this rank vector: where the working matrix supports fewer components
 * the cores are zero-padded.
 */
TTTensor tt_approximate(const DenseTensor& t, const std::vector<std::size_t>& rank);

/** Throws std::invalid_argument unless `rank` is a valid TT-rank vector for `shape`. */
void check_rank_vector(const Shape& shape, const std::vector<std::size_t>& rank);

}  // namespace tcam

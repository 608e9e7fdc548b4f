#pragma once

#include <stdexcept>

#include "tcam/tensor.hpp"

namespace tcam {

/** Raised when a dense factorization fails to converge. */
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Singular values below this fraction of the reference scale are treated as zero in pseudo-inverses. */
inline constexpr double kPseudoInverseCutoff = 1e-12;

/**
 * argmin_x ||A x - y||^2 + ridge ||x||^2 via the SVD of A.
 *
 * With ridge == 0 this is the minimum-norm least-squares solution (pseudo-inverse
 * with kPseudoInverseCutoff). The cutoff is taken relative to
 * max(sigma_max(A), reference): a caller solving many small systems built from
 * one model passes the model's scale, so that a system made only of rounding
 * noise is recognized as empty instead of being inverted. Throws SolverError if
 * the SVD fails.
 */
Vector least_squares(const Matrix& a, const Vector& y, double ridge = 0.0, double reference = 0.0);

}  // namespace tcam

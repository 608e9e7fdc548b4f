#include "tcam/tmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcam/linalg.hpp"
#include "tcam/tt_svd.hpp"

namespace tcam {

namespace {

using Index = Eigen::Index;

// Re-solves every row of `target` against rows of `other`:
// target.row(i) = argmin sum_{j observed} (target.row(i) . other.row(j) - x(i, j))^2
void solve_rows(Matrix& target, const Matrix& other, const Matrix& x, const Matrix& observed, bool transposed,
                double ridge) {
    const Index rank = target.cols();
    // cutoff reference shared by all rows, as in the tensor solver: the largest
    // row of `other` that meets an observation
    double scale = 0.0;
    for (Index j = 0; j < other.rows(); ++j) {
        const bool seen = transposed ? observed.row(j).any() : observed.col(j).any();
        if (seen) scale = std::max(scale, other.row(j).norm());
    }
    std::vector<Index> members;
    for (Index i = 0; i < target.rows(); ++i) {
        members.clear();
        const Index extent = other.rows();
        for (Index j = 0; j < extent; ++j) {
            const double seen = transposed ? observed(j, i) : observed(i, j);
            if (seen != 0.0) members.push_back(j);
        }
        if (members.empty()) continue;
        Matrix a(static_cast<Index>(members.size()), rank);
        Vector y(static_cast<Index>(members.size()));
        for (std::size_t m = 0; m < members.size(); ++m) {
            const Index j = members[m];
            a.row(static_cast<Index>(m)) = other.row(j);
            y(static_cast<Index>(m)) = transposed ? x(j, i) : x(i, j);
        }
        target.row(i) = least_squares(a, y, ridge, scale).transpose();
    }
}

double relative_change(const Matrix& prev, const Matrix& next) {
    const double diff = (next - prev).norm();
    const double base = prev.norm();
    return base > 0.0 ? diff / base : diff;
}

double masked_matrix_objective(const Matrix& u, const Matrix& v, const Matrix& x, const Matrix& observed) {
    const Matrix residual = (u * v.transpose() - x).cwiseProduct(observed);
    return residual.squaredNorm();
}

}  // namespace

void TmmConfig::validate(std::size_t order) const {
    if (split < 1 || split + 1 > order) {
        throw std::invalid_argument("tmm split " + std::to_string(split) + " must lie in [1, " +
                                    std::to_string(order - 1) + "]");
    }
    if (rank < 1) throw std::invalid_argument("tmm rank must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tmm tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("tmm max_iter must be at least 1");
    if (!(ridge >= 0.0)) throw std::invalid_argument("tmm ridge must be nonnegative");
}

CompletionReport tmm_complete(const DenseTensor& data, const ObservationMask& mask, const TmmConfig& cfg) {
    if (data.shape() != mask.shape()) throw std::invalid_argument("tmm_complete: data and mask shapes differ");
    cfg.validate(data.order());

    const Matrix x = mode_matricize(apply_mask(data, mask), cfg.split);
    const Matrix observed = mode_matricize(mask.as_tensor(), cfg.split);

    const SVDResult svd = truncated_svd(x, cfg.rank);
    const auto kept = static_cast<Index>(svd.rank());
    const auto r = static_cast<Index>(cfg.rank);
    Matrix u = Matrix::Zero(x.rows(), r);
    Matrix v = Matrix::Zero(x.cols(), r);
    u.leftCols(kept) = svd.u;
    v.leftCols(kept) = svd.v * svd.s.asDiagonal();

    CompletionReport report;
    for (std::size_t iter = 1; iter <= cfg.max_iter; ++iter) {
        const Matrix u_prev = u;
        const Matrix v_prev = v;
        solve_rows(u, v, x, observed, false, cfg.ridge);
        solve_rows(v, u, x, observed, true, cfg.ridge);
        const double eps = relative_change(u_prev, u) + relative_change(v_prev, v);
        report.objective_trace.push_back(masked_matrix_objective(u, v, x, observed));
        report.epsilon_trace.push_back(eps);
        report.iterations = iter;
        if (eps <= cfg.tol) {
            report.converged = true;
            break;
        }
    }

    report.recovered = mode_matricize_fold(u * v.transpose(), data.shape(), cfg.split);
    const Matrix vt = v.transpose();
    report.chain.cores.push_back(left_fold(u, 1, static_cast<std::size_t>(u.rows()), cfg.rank));
    report.chain.cores.push_back(right_fold(vt, cfg.rank, static_cast<std::size_t>(v.rows()), 1));
    return report;
}

}  // namespace tcam

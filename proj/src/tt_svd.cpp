#include "tcam/tt_svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

namespace tcam {

namespace {

using Index = Eigen::Index;

// Column-major view of a flat buffer as a rows x cols matrix.
Matrix from_column_major(std::span<const double> buf, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r) m(static_cast<Index>(r), static_cast<Index>(c)) = buf[r + c * rows];
    return m;
}

std::vector<double> to_column_major(const Matrix& m) {
    std::vector<double> buf(static_cast<std::size_t>(m.size()));
    const auto rows = static_cast<std::size_t>(m.rows());
    for (Index c = 0; c < m.cols(); ++c)
        for (Index r = 0; r < m.rows(); ++r) buf[static_cast<std::size_t>(r) + static_cast<std::size_t>(c) * rows] = m(r, c);
    return buf;
}

}  // namespace

Matrix SVDResult::reconstruct() const { return u * s.asDiagonal() * v.transpose(); }

SVDResult truncated_svd(const Matrix& m, std::size_t r) {
    if (r == 0) throw std::invalid_argument("truncated_svd: target rank must be at least 1");
    if (m.size() == 0) throw std::invalid_argument("truncated_svd: empty matrix");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SolverError("truncated_svd: SVD did not converge");

    const Vector& sigma = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(m.rows(), m.cols())) *
                          std::numeric_limits<double>::epsilon() * (sigma.size() ? sigma(0) : 0.0);
    std::size_t keep = 0;
    const auto limit = std::min<std::size_t>(r, static_cast<std::size_t>(sigma.size()));
    while (keep < limit && sigma(static_cast<Index>(keep)) > cutoff) ++keep;

    const auto k = static_cast<Index>(keep);
    SVDResult out{svd.matrixU().leftCols(k), sigma.head(k), svd.matrixV().leftCols(k)};

    for (Index j = 0; j < k; ++j) {
        Index pivot = 0;
        double best = -1.0;
        for (Index i = 0; i < out.u.rows(); ++i) {
            const double a = std::abs(out.u(i, j));
            if (a > best) {
                best = a;
                pivot = i;
            }
        }
        if (out.u(pivot, j) < 0.0) {
            out.u.col(j) *= -1.0;
            out.v.col(j) *= -1.0;
        }
    }
    return out;
}

void check_rank_vector(const Shape& shape, const std::vector<std::size_t>& rank) {
    check_shape(shape);
    if (rank.size() != shape.size() + 1) {
        throw std::invalid_argument("rank vector has length " + std::to_string(rank.size()) + ", expected " +
                                    std::to_string(shape.size() + 1) + " for an order-" +
                                    std::to_string(shape.size()) + " tensor");
    }
    if (rank.front() != 1 || rank.back() != 1) throw std::invalid_argument("boundary ranks r_0 and r_n must be 1");
    for (auto r : rank) {
        if (r == 0) throw std::invalid_argument("TT ranks must be positive");
    }
}

TTTensor tt_approximate(const DenseTensor& t, const std::vector<std::size_t>& rank) {
    check_rank_vector(t.shape(), rank);
    const auto& shape = t.shape();
    const std::size_t n = shape.size();

    TTTensor tt;
    tt.cores.reserve(n);
    if (n == 1) {
        tt.cores.emplace_back(1, shape[0], 1, vectorize(t));
        return tt;
    }

    // `work` is M_{k-1} in column-major order; read as (r_{k-1} I_k) x rest it is X_k.
    std::vector<double> work = vectorize(t);
    std::size_t rest = t.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t r_prev = rank[k];
        const std::size_t r_next = rank[k + 1];
        rest /= shape[k];
        const std::size_t rows = r_prev * shape[k];
        const Matrix x = from_column_major(work, rows, rest);

        const SVDResult svd = truncated_svd(x, r_next);
        const auto kept = static_cast<Index>(svd.rank());

        Matrix u = Matrix::Zero(static_cast<Index>(rows), static_cast<Index>(r_next));
        u.leftCols(kept) = svd.u;
        tt.cores.push_back(left_fold(u, r_prev, shape[k], r_next));

        Matrix carry = Matrix::Zero(static_cast<Index>(r_next), static_cast<Index>(rest));
        carry.topRows(kept) = svd.s.asDiagonal() * svd.v.transpose();
        work = to_column_major(carry);
    }
    tt.cores.emplace_back(rank[n - 1], shape[n - 1], 1, std::move(work));
    return tt;
}

}  // namespace tcam

#include "tcam/linalg.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/SVD>

namespace tcam {

Vector least_squares(const Matrix& a, const Vector& y, double ridge, double reference) {
    if (a.rows() != y.size()) throw std::invalid_argument("least_squares: row count does not match right-hand side");
    if (ridge < 0.0) throw std::invalid_argument("least_squares: ridge must be nonnegative");
    if (a.rows() == 0) return Vector::Zero(a.cols());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw SolverError("least_squares: SVD did not converge");

    const Vector& s = svd.singularValues();
    const double cutoff = kPseudoInverseCutoff * std::max(s.size() ? s(0) : 0.0, reference);
    Vector filter(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        filter(i) = (s(i) > cutoff && s(i) > 0.0) ? s(i) / (s(i) * s(i) + ridge) : 0.0;
    }
    const Vector uty = svd.matrixU().transpose() * y;
    return svd.matrixV() * filter.cwiseProduct(uty);
}

}  // namespace tcam

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace tcam {

/** Row-major dense matrix used for every unfolding in the project. */
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Shape = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;

/** Largest tensor order accepted anywhere in the library. */
inline constexpr std::size_t kMaxOrder = 16;

/** Number of entries of a tensor with the given shape. Throws on an invalid shape. */
std::size_t element_count(const Shape& shape);

/** Throws std::invalid_argument unless 1 <= order <= kMaxOrder and every mode size >= 1. */
void check_shape(const Shape& shape);

/**
 * Dense n-mode array of doubles.
 *
 * Entries are stored lexicographically with the first index varying fastest,
 * so `data()` is exactly vec(X). Immutable once constructed.
 */
class DenseTensor {
public:
    DenseTensor() = default;
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor zeros(const Shape& shape);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::span<const double> data() const noexcept { return data_; }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double at(std::span<const std::size_t> index) const;

    std::size_t flat_index(std::span<const std::size_t> index) const;
    MultiIndex multi_index(std::size_t flat) const;

private:
    Shape shape_;
    std::vector<double> data_;
};

/** Binary tensor P_Omega marking observed entries. */
class ObservationMask {
public:
    ObservationMask() = default;
    ObservationMask(Shape shape, std::vector<std::uint8_t> bits);

    static ObservationMask all(const Shape& shape);
    static ObservationMask none(const Shape& shape);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t observed_count() const noexcept { return observed_count_; }
    bool observed(std::size_t flat) const { return bits_[flat] != 0; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    /** Flat indices of the observed entries, ascending. */
    std::vector<std::size_t> observed_indices() const;

    /** The mask as a 0/1 valued tensor. */
    DenseTensor as_tensor() const;

private:
    Shape shape_;
    std::vector<std::uint8_t> bits_;
    std::size_t observed_count_ = 0;
};

/**
 * Mode-k unfolding X_[k] (k is 0-based). Rows index mode k; the column index
 * runs over modes k+1, ..., n-1, 0, ..., k-1 with the earliest of those fastest.
 */
Matrix mode_k_unfold(const DenseTensor& t, std::size_t k);
DenseTensor mode_k_fold(const Matrix& m, const Shape& shape, std::size_t k);

/**
 * Tensor mode matricization splitting the first `split` modes (rows) from the
 * remaining ones (columns); 1 <= split <= n-1.
 */
Matrix mode_matricize(const DenseTensor& t, std::size_t split);
DenseTensor mode_matricize_fold(const Matrix& m, const Shape& shape, std::size_t split);

/** Cyclic tensor permutation: mode `start` (0-based) becomes the leading mode. */
DenseTensor permute_cyclic(const DenseTensor& t, std::size_t start);
ObservationMask permute_cyclic(const ObservationMask& m, std::size_t start);

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

/** Zero-filled tensor P_Omega o X. */
DenseTensor apply_mask(const DenseTensor& t, const ObservationMask& mask);

double frobenius_norm(const DenseTensor& t);

std::vector<double> vectorize(const DenseTensor& t);

}  // namespace tcam

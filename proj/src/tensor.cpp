#include "tcam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tcam {

namespace {

std::vector<std::size_t> strides_of(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t m = 1; m < shape.size(); ++m) strides[m] = strides[m - 1] * shape[m - 1];
    return strides;
}

// Advances a first-index-fastest odometer by one position.
void increment(MultiIndex& idx, const Shape& shape) {
    for (std::size_t m = 0; m < shape.size(); ++m) {
        if (++idx[m] < shape[m]) return;
        idx[m] = 0;
    }
}

// Strides that place mode k in the rows and the cyclic remainder in the columns.
std::vector<std::size_t> unfold_col_strides(const Shape& shape, std::size_t k) {
    const std::size_t n = shape.size();
    std::vector<std::size_t> strides(n, 0);
    std::size_t s = 1;
    for (std::size_t step = 1; step < n; ++step) {
        const std::size_t m = (k + step) % n;
        strides[m] = s;
        s *= shape[m];
    }
    return strides;
}

void check_mode(const Shape& shape, std::size_t k, const char* what) {
    if (k >= shape.size()) {
        throw std::invalid_argument(std::string(what) + ": mode index " + std::to_string(k) +
                                    " out of range for order " + std::to_string(shape.size()));
    }
}

void check_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

Shape rotated_shape(const Shape& shape, std::size_t start) {
    const std::size_t n = shape.size();
    Shape out(n);
    for (std::size_t m = 0; m < n; ++m) out[m] = shape[(start + m) % n];
    return out;
}

// For each flat index of the source, the flat index it maps to after rotation.
std::vector<std::size_t> rotation_targets(const Shape& shape, std::size_t start) {
    const std::size_t n = shape.size();
    const auto rshape = rotated_shape(shape, start);
    const auto rstrides = strides_of(rshape);
    // source mode m sits at position (m - start) mod n in the rotated tensor
    std::vector<std::size_t> src_to_dst(n);
    for (std::size_t m = 0; m < n; ++m) src_to_dst[m] = rstrides[(m + n - start) % n];

    const std::size_t total = element_count(shape);
    std::vector<std::size_t> targets(total);
    MultiIndex idx(n, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t dst = 0;
        for (std::size_t m = 0; m < n; ++m) dst += idx[m] * src_to_dst[m];
        targets[flat] = dst;
        increment(idx, shape);
    }
    return targets;
}

}  // namespace

void check_shape(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor order must be at least 1");
    if (shape.size() > kMaxOrder) {
        throw std::invalid_argument("tensor order " + std::to_string(shape.size()) +
                                    " exceeds the supported maximum of " + std::to_string(kMaxOrder));
    }
    for (auto s : shape) {
        if (s == 0) throw std::invalid_argument("tensor mode sizes must be positive");
    }
}

std::size_t element_count(const Shape& shape) {
    check_shape(shape);
    std::size_t total = 1;
    for (auto s : shape) total *= s;
    return total;
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    const auto expected = element_count(shape_);
    if (data_.size() != expected) {
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape (expected " + std::to_string(expected) + ")");
    }
}

DenseTensor DenseTensor::zeros(const Shape& shape) {
    return DenseTensor(shape, std::vector<double>(element_count(shape), 0.0));
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw std::invalid_argument("index order does not match tensor order");
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
        if (index[m] >= shape_[m]) throw std::out_of_range("tensor index out of range");
        flat += index[m] * stride;
        stride *= shape_[m];
    }
    return flat;
}

MultiIndex DenseTensor::multi_index(std::size_t flat) const {
    if (flat >= data_.size()) throw std::out_of_range("flat index out of range");
    MultiIndex idx(shape_.size());
    for (std::size_t m = 0; m < shape_.size(); ++m) {
        idx[m] = flat % shape_[m];
        flat /= shape_[m];
    }
    return idx;
}

double DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

ObservationMask::ObservationMask(Shape shape, std::vector<std::uint8_t> bits)
    : shape_(std::move(shape)), bits_(std::move(bits)) {
    const auto expected = element_count(shape_);
    if (bits_.size() != expected) {
        throw std::invalid_argument("mask length " + std::to_string(bits_.size()) +
                                    " does not match shape (expected " + std::to_string(expected) + ")");
    }
    for (auto& b : bits_) {
        if (b > 1) throw std::invalid_argument("mask values must be 0 or 1");
        observed_count_ += b;
    }
}

ObservationMask ObservationMask::all(const Shape& shape) {
    return ObservationMask(shape, std::vector<std::uint8_t>(element_count(shape), 1));
}

ObservationMask ObservationMask::none(const Shape& shape) {
    return ObservationMask(shape, std::vector<std::uint8_t>(element_count(shape), 0));
}

std::vector<std::size_t> ObservationMask::observed_indices() const {
    std::vector<std::size_t> out;
    out.reserve(observed_count_);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) out.push_back(i);
    }
    return out;
}

DenseTensor ObservationMask::as_tensor() const {
    std::vector<double> values(bits_.begin(), bits_.end());
    return DenseTensor(shape_, std::move(values));
}

Matrix mode_k_unfold(const DenseTensor& t, std::size_t k) {
    const auto& shape = t.shape();
    check_mode(shape, k, "mode_k_unfold");
    const auto col_strides = unfold_col_strides(shape, k);
    Matrix m(shape[k], t.size() / shape[k]);
    MultiIndex idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::size_t col = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) col += idx[d] * col_strides[d];
        m(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(col)) = t[flat];
        increment(idx, shape);
    }
    return m;
}

DenseTensor mode_k_fold(const Matrix& m, const Shape& shape, std::size_t k) {
    const auto total = element_count(shape);
    check_mode(shape, k, "mode_k_fold");
    if (static_cast<std::size_t>(m.rows()) != shape[k] ||
        static_cast<std::size_t>(m.cols()) != total / shape[k]) {
        throw std::invalid_argument("mode_k_fold: matrix dimensions do not match shape");
    }
    const auto col_strides = unfold_col_strides(shape, k);
    std::vector<double> data(total);
    MultiIndex idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t col = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) col += idx[d] * col_strides[d];
        data[flat] = m(static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(col));
        increment(idx, shape);
    }
    return DenseTensor(shape, std::move(data));
}

Matrix mode_matricize(const DenseTensor& t, std::size_t split) {
    const auto& shape = t.shape();
    if (split < 1 || split >= shape.size()) {
        throw std::invalid_argument("mode_matricize: split position " + std::to_string(split) +
                                    " must lie in [1, " + std::to_string(shape.size() - 1) + "]");
    }
    std::size_t rows = 1;
    for (std::size_t m = 0; m < split; ++m) rows *= shape[m];
    const std::size_t cols = t.size() / rows;
    // With the first index fastest, row + col*rows is exactly the flat offset.
    Matrix out(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t[r + c * rows];
        }
    }
    return out;
}

DenseTensor mode_matricize_fold(const Matrix& m, const Shape& shape, std::size_t split) {
    const auto total = element_count(shape);
    if (split < 1 || split >= shape.size()) throw std::invalid_argument("mode_matricize_fold: invalid split position");
    std::size_t rows = 1;
    for (std::size_t d = 0; d < split; ++d) rows *= shape[d];
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != total / rows) {
        throw std::invalid_argument("mode_matricize_fold: matrix dimensions do not match shape");
    }
    std::vector<double> data(total);
    for (std::size_t c = 0; c < total / rows; ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            data[r + c * rows] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    return DenseTensor(shape, std::move(data));
}

DenseTensor permute_cyclic(const DenseTensor& t, std::size_t start) {
    check_mode(t.shape(), start, "permute_cyclic");
    if (start == 0) return t;
    const auto targets = rotation_targets(t.shape(), start);
    std::vector<double> data(t.size());
    for (std::size_t flat = 0; flat < t.size(); ++flat) data[targets[flat]] = t[flat];
    return DenseTensor(rotated_shape(t.shape(), start), std::move(data));
}

ObservationMask permute_cyclic(const ObservationMask& mask, std::size_t start) {
    check_mode(mask.shape(), start, "permute_cyclic");
    if (start == 0) return mask;
    const auto targets = rotation_targets(mask.shape(), start);
    std::vector<std::uint8_t> bits(mask.size());
    for (std::size_t flat = 0; flat < mask.size(); ++flat) bits[targets[flat]] = mask.bits()[flat];
    return ObservationMask(rotated_shape(mask.shape(), start), std::move(bits));
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
    check_same_shape(a.shape(), b.shape(), "hadamard");
    std::vector<double> data(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) data[i] = a[i] * b[i];
    return DenseTensor(a.shape(), std::move(data));
}

DenseTensor apply_mask(const DenseTensor& t, const ObservationMask& mask) {
    check_same_shape(t.shape(), mask.shape(), "apply_mask");
    std::vector<double> data(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) data[i] = mask.observed(i) ? t[i] : 0.0;
    return DenseTensor(t.shape(), std::move(data));
}

double frobenius_norm(const DenseTensor& t) {
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    return std::sqrt(sum);
}

std::vector<double> vectorize(const DenseTensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace tcam

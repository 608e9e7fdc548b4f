#include "tcam/tt.hpp"

#include <cmath>
#include <stdexcept>

namespace tcam {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void check_core_dims(std::size_t r_prev, std::size_t i_dim, std::size_t r_next) {
    if (r_prev == 0 || i_dim == 0 || r_next == 0) throw std::invalid_argument("TT core dimensions must be positive");
}

}  // namespace

TTCore::TTCore(std::size_t r_prev, std::size_t i_dim, std::size_t r_next)
    : TTCore(r_prev, i_dim, r_next, std::vector<double>(r_prev * i_dim * r_next, 0.0)) {}

TTCore::TTCore(std::size_t r_prev, std::size_t i_dim, std::size_t r_next, std::vector<double> data)
    : r_prev_(r_prev), i_dim_(i_dim), r_next_(r_next), data_(std::move(data)) {
    check_core_dims(r_prev, i_dim, r_next);
    if (data_.size() != r_prev * i_dim * r_next) {
        throw std::invalid_argument("TT core data length " + std::to_string(data_.size()) + " does not match " +
                                    std::to_string(r_prev) + "x" + std::to_string(i_dim) + "x" +
                                    std::to_string(r_next));
    }
}

Matrix TTCore::slice(std::size_t i) const {
    if (i >= i_dim_) throw std::out_of_range("TT core slice index out of range");
    Matrix m(r_prev_, r_next_);
    for (std::size_t b = 0; b < r_next_; ++b)
        for (std::size_t a = 0; a < r_prev_; ++a) m(idx(a), idx(b)) = (*this)(a, i, b);
    return m;
}

void TTCore::set_slice(std::size_t i, const Matrix& m) {
    if (i >= i_dim_) throw std::out_of_range("TT core slice index out of range");
    if (static_cast<std::size_t>(m.rows()) != r_prev_ || static_cast<std::size_t>(m.cols()) != r_next_) {
        throw std::invalid_argument("TT core slice has wrong dimensions");
    }
    for (std::size_t b = 0; b < r_next_; ++b)
        for (std::size_t a = 0; a < r_prev_; ++a) (*this)(a, i, b) = m(idx(a), idx(b));
}

double TTCore::frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
}

Matrix left_unfold(const TTCore& c) {
    Matrix m(c.r_prev() * c.i_dim(), c.r_next());
    for (std::size_t b = 0; b < c.r_next(); ++b)
        for (std::size_t i = 0; i < c.i_dim(); ++i)
            for (std::size_t a = 0; a < c.r_prev(); ++a) m(idx(a + i * c.r_prev()), idx(b)) = c(a, i, b);
    return m;
}

TTCore left_fold(const Matrix& m, std::size_t r_prev, std::size_t i_dim, std::size_t r_next) {
    check_core_dims(r_prev, i_dim, r_next);
    if (static_cast<std::size_t>(m.rows()) != r_prev * i_dim || static_cast<std::size_t>(m.cols()) != r_next) {
        throw std::invalid_argument("left_fold: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected " + std::to_string(r_prev * i_dim) +
                                    "x" + std::to_string(r_next));
    }
    TTCore c(r_prev, i_dim, r_next);
    for (std::size_t b = 0; b < r_next; ++b)
        for (std::size_t i = 0; i < i_dim; ++i)
            for (std::size_t a = 0; a < r_prev; ++a) c(a, i, b) = m(idx(a + i * r_prev), idx(b));
    return c;
}

Matrix right_unfold(const TTCore& c) {
    Matrix m(c.r_prev(), c.i_dim() * c.r_next());
    for (std::size_t b = 0; b < c.r_next(); ++b)
        for (std::size_t i = 0; i < c.i_dim(); ++i)
            for (std::size_t a = 0; a < c.r_prev(); ++a) m(idx(a), idx(i + b * c.i_dim())) = c(a, i, b);
    return m;
}

TTCore right_fold(const Matrix& m, std::size_t r_prev, std::size_t i_dim, std::size_t r_next) {
    check_core_dims(r_prev, i_dim, r_next);
    if (static_cast<std::size_t>(m.rows()) != r_prev || static_cast<std::size_t>(m.cols()) != i_dim * r_next) {
        throw std::invalid_argument("right_fold: matrix is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected " + std::to_string(r_prev) + "x" +
                                    std::to_string(i_dim * r_next));
    }
    TTCore c(r_prev, i_dim, r_next);
    for (std::size_t b = 0; b < r_next; ++b)
        for (std::size_t i = 0; i < i_dim; ++i)
            for (std::size_t a = 0; a < r_prev; ++a) c(a, i, b) = m(idx(a), idx(i + b * i_dim));
    return c;
}

TTCore connect_product(const TTCore& a, const TTCore& b) {
    if (a.r_next() != b.r_prev()) {
        throw std::invalid_argument("connect_product: rank chain mismatch (" + std::to_string(a.r_next()) +
                                    " vs " + std::to_string(b.r_prev()) + ")");
    }
    TTCore out(a.r_prev(), a.i_dim() * b.i_dim(), b.r_next());
    std::vector<Matrix> a_slices(a.i_dim());
    for (std::size_t i = 0; i < a.i_dim(); ++i) a_slices[i] = a.slice(i);
    for (std::size_t ib = 0; ib < b.i_dim(); ++ib) {
        const Matrix sb = b.slice(ib);
        for (std::size_t ia = 0; ia < a.i_dim(); ++ia) {
            out.set_slice(ia + ib * a.i_dim(), a_slices[ia] * sb);
        }
    }
    return out;
}

std::vector<std::size_t> TTTensor::ranks() const {
    std::vector<std::size_t> r;
    if (cores.empty()) return r;
    r.reserve(cores.size() + 1);
    r.push_back(cores.front().r_prev());
    for (const auto& c : cores) r.push_back(c.r_next());
    return r;
}

Shape TTTensor::shape() const {
    Shape s;
    s.reserve(cores.size());
    for (const auto& c : cores) s.push_back(c.i_dim());
    return s;
}

std::optional<std::string> validate(const TTTensor& tt) {
    if (tt.cores.empty()) return "empty chain: a tensor train needs at least one core";
    if (tt.cores.size() > kMaxOrder) return "chain order exceeds the supported maximum";
    for (std::size_t k = 0; k < tt.cores.size(); ++k) {
        const auto& c = tt.cores[k];
        if (c.r_prev() == 0 || c.i_dim() == 0 || c.r_next() == 0 || c.size() != c.r_prev() * c.i_dim() * c.r_next()) {
            return "core " + std::to_string(k) + " has inconsistent dimensions";
        }
    }
    if (tt.cores.front().r_prev() != 1) {
        return "boundary rank r_0 must be 1, found " + std::to_string(tt.cores.front().r_prev());
    }
    if (tt.cores.back().r_next() != 1) {
        return "boundary rank r_n must be 1, found " + std::to_string(tt.cores.back().r_next());
    }
    for (std::size_t k = 0; k + 1 < tt.cores.size(); ++k) {
        if (tt.cores[k].r_next() != tt.cores[k + 1].r_prev()) {
            return "rank mismatch at junction between cores " + std::to_string(k) + " and " + std::to_string(k + 1) +
                   " (" + std::to_string(tt.cores[k].r_next()) + " vs " + std::to_string(tt.cores[k + 1].r_prev()) +
                   ")";
        }
    }
    return std::nullopt;
}

void require_valid(const TTTensor& tt) {
    if (auto violation = validate(tt)) throw std::invalid_argument("invalid tensor train: " + *violation);
}

DenseTensor reconstruct_traced(std::span<const TTCore> cores) {
    if (cores.empty()) throw std::invalid_argument("reconstruct_traced: empty chain");
    if (cores.front().r_prev() != cores.back().r_next()) {
        throw std::invalid_argument("reconstruct_traced: chain is not cyclically closed");
    }
    TTCore acc = cores.front();
    for (std::size_t k = 1; k < cores.size(); ++k) acc = connect_product(acc, cores[k]);

    Shape shape;
    for (const auto& c : cores) shape.push_back(c.i_dim());
    std::vector<double> data(acc.i_dim());
    for (std::size_t j = 0; j < acc.i_dim(); ++j) {
        double trace = 0.0;
        for (std::size_t a = 0; a < acc.r_prev(); ++a) trace += acc(a, j, a);
        data[j] = trace;
    }
    return DenseTensor(std::move(shape), std::move(data));
}

DenseTensor tt_reconstruct(const TTTensor& tt) {
    require_valid(tt);
    // With r_0 = r_n = 1 the connected core is 1 x N x 1 and its data is vec(X).
    TTCore acc = tt.cores.front();
    for (std::size_t k = 1; k < tt.cores.size(); ++k) acc = connect_product(acc, tt.cores[k]);
    return DenseTensor(tt.shape(), {acc.data().begin(), acc.data().end()});
}

double tt_entry(const TTTensor& tt, std::span<const std::size_t> index) {
    require_valid(tt);
    if (index.size() != tt.cores.size()) throw std::invalid_argument("tt_entry: index order does not match chain");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < tt.cores.size(); ++k) {
        if (index[k] >= tt.cores[k].i_dim()) throw std::out_of_range("tt_entry: index out of range");
        row = row * tt.cores[k].slice(index[k]);
    }
    return row(0);
}

std::vector<TTCore> permuted_chain(const TTTensor& tt, std::size_t start) {
    require_valid(tt);
    const std::size_t n = tt.cores.size();
    if (start >= n) throw std::invalid_argument("permuted_chain: start mode out of range");
    std::vector<TTCore> rotated;
    rotated.reserve(n);
    for (std::size_t m = 0; m < n; ++m) rotated.push_back(tt.cores[(start + m) % n]);
    return rotated;
}

}  // namespace tcam

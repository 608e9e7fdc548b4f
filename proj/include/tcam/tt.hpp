#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcam/tensor.hpp"

namespace tcam {

/**
 * Order-3 tensor train core of shape r_prev x i_dim x r_next.
 *
 * Storage is first index fastest: element (a, i, b) lives at
 * a + r_prev * (i + i_dim * b). Slice (:, i, :) is the r_prev x r_next matrix
 * that multiplies into the chain for mode index i.
 */
class TTCore {
public:
    TTCore() = default;
    TTCore(std::size_t r_prev, std::size_t i_dim, std::size_t r_next);
    TTCore(std::size_t r_prev, std::size_t i_dim, std::size_t r_next, std::vector<double> data);

    std::size_t r_prev() const noexcept { return r_prev_; }
    std::size_t i_dim() const noexcept { return i_dim_; }
    std::size_t r_next() const noexcept { return r_next_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double operator()(std::size_t a, std::size_t i, std::size_t b) const {
        return data_[a + r_prev_ * (i + i_dim_ * b)];
    }
    double& operator()(std::size_t a, std::size_t i, std::size_t b) {
        return data_[a + r_prev_ * (i + i_dim_ * b)];
    }

    Matrix slice(std::size_t i) const;
    void set_slice(std::size_t i, const Matrix& m);

    double frobenius_norm() const;

private:
    std::size_t r_prev_ = 0;
    std::size_t i_dim_ = 0;
    std::size_t r_next_ = 0;
    std::vector<double> data_;
};

/** L(U): (r_prev * i_dim) x r_next, row a + i*r_prev. */
Matrix left_unfold(const TTCore& c);
TTCore left_fold(const Matrix& m, std::size_t r_prev, std::size_t i_dim, std::size_t r_next);

/** R(U): r_prev x (i_dim * r_next), column i + b*i_dim. */
Matrix right_unfold(const TTCore& c);
TTCore right_fold(const Matrix& m, std::size_t r_prev, std::size_t i_dim, std::size_t r_next);

/**
 * Tensor connect product of two chained cores. The merged mode index is
 * i_a + i_b * a.i_dim() and its slice is a.slice(i_a) * b.slice(i_b).
 */
TTCore connect_product(const TTCore& a, const TTCore& b);

/** Tensor train / MPS: a chain of cores with boundary ranks r_0 = r_n = 1. */
struct TTTensor {
    std::vector<TTCore> cores;

    std::size_t order() const noexcept { return cores.size(); }
    /** [r_0, ..., r_n] as read off the cores. */
    std::vector<std::size_t> ranks() const;
    Shape shape() const;
};

/** Checks the TTTensor invariants; returns a description of the first violation, or nothing. */
std::optional<std::string> validate(const TTTensor& tt);

/** Throws std::invalid_argument carrying validate()'s description if the chain is malformed. */
void require_valid(const TTTensor& tt);

DenseTensor tt_reconstruct(const TTTensor& tt);

double tt_entry(const TTTensor& tt, std::span<const std::size_t> index);

/**
 * Rotates the chain so core `start` (0-based) leads. The wrap-around rank
 * r_{start} is generally larger than one, so the result is a plain core list
 * that must be contracted with reconstruct_traced().
 */
std::vector<TTCore> permuted_chain(const TTTensor& tt, std::size_t start);

/** Entry-wise trace of the chained slice products; accepts any cyclically closed chain. */
DenseTensor reconstruct_traced(std::span<const TTCore> cores);

}  // namespace tcam

#include "tcam/completion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tcam/linalg.hpp"
#include "tcam/tt_svd.hpp"

namespace tcam {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

Shape chain_shape(std::span<const TTCore> cores) {
    Shape s;
    for (const auto& c : cores) s.push_back(c.i_dim());
    return s;
}

// Column strides of the mode-k unfolding (modes k+1, ..., k-1 cyclically).
std::vector<std::size_t> unfold_strides(const Shape& shape, std::size_t k) {
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

// Design matrix of a slice problem: row j holds vec(B_j^T), so that
// A vec(X) = [trace(X B_j)]_j with vec column-major over X (r_prev x r_next).
Matrix design_from_environments(std::span<const SliceObservation> rows, std::size_t r_prev, std::size_t r_next) {
    Matrix a(rows.size(), r_prev * r_next);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const Matrix& b = rows[j].environment;
        for (std::size_t col = 0; col < r_next; ++col)
            for (std::size_t row = 0; row < r_prev; ++row) a(idx(j), idx(row + r_prev * col)) = b(idx(col), idx(row));
    }
    return a;
}

Matrix unvec(const Vector& x, std::size_t r_prev, std::size_t r_next) {
    Matrix m(r_prev, r_next);
    for (std::size_t b = 0; b < r_next; ++b)
        for (std::size_t a = 0; a < r_prev; ++a) m(idx(a), idx(b)) = x(idx(a + r_prev * b));
    return m;
}

void check_problem_shapes(const Shape& chain, const DenseTensor& data, const ObservationMask& mask) {
    if (data.shape() != mask.shape()) throw std::invalid_argument("data and mask shapes differ");
    if (chain != data.shape()) throw std::invalid_argument("chain shape does not match the data shape");
}

/*
 * Sweep engine used by tcam_tt. For every observed entry it keeps the left
 * partial product U_1(i_1) ... U_{k-1}(i_{k-1}) (a row vector, updated as cores
 * are refreshed) and the right partials U_{k+1}(i_{k+1}) ... U_n(i_n) from the
 * previous sweep. Because r_0 = r_n = 1 the environment slice is the outer
 * product right * left, so each design row costs r_{k-1} r_k to form.
 */
class SweepEngine {
public:
    SweepEngine(const DenseTensor& data, const ObservationMask& mask)
        : order_(data.order()), entries_(mask.observed_indices()) {
        index_.resize(entries_.size() * order_);
        values_.resize(entries_.size());
        for (std::size_t e = 0; e < entries_.size(); ++e) {
            std::size_t flat = entries_[e];
            values_[e] = data[flat];
            for (std::size_t m = 0; m < order_; ++m) {
                index_[e * order_ + m] = flat % data.shape()[m];
                flat /= data.shape()[m];
            }
        }
        by_slice_.resize(order_);
        for (std::size_t k = 0; k < order_; ++k) {
            by_slice_[k].resize(data.shape()[k]);
            for (std::size_t e = 0; e < entries_.size(); ++e) by_slice_[k][mode_index(e, k)].push_back(e);
        }
    }

    /** One Gauss-Seidel pass; returns the masked objective of the updated chain. */
    double sweep(TTTensor& chain, double ridge, const std::function<void(std::size_t)>& after_core) {
        const std::size_t count = entries_.size();
        const auto ranks = chain.ranks();

        // right_[k] column e: U_{k+1}(i_{k+1}) ... U_n(i_n), a vector of length r_{k+1}.
        right_.assign(order_, Matrix());
        right_[order_ - 1] = Matrix::Ones(1, idx(count));
        for (std::size_t k = order_ - 1; k-- > 0;) {
            const auto slices = slices_of(chain.cores[k + 1]);
            right_[k].resize(idx(ranks[k + 1]), idx(count));
            for (std::size_t e = 0; e < count; ++e) {
                right_[k].col(idx(e)) = slices[mode_index(e, k + 1)] * right_[k + 1].col(idx(e));
            }
        }

        Matrix left = Matrix::Ones(idx(count), 1);  // row e: U_1(i_1) ... U_{k-1}(i_{k-1})
        for (std::size_t k = 0; k < order_; ++k) {
            TTCore& core = chain.cores[k];
            const std::size_t r_prev = core.r_prev();
            const std::size_t r_next = core.r_next();
            // design row e has norm |left_e| |right_e|
            double scale = 0.0;
            for (std::size_t e = 0; e < count; ++e)
                scale = std::max(scale, left.row(idx(e)).norm() * right_[k].col(idx(e)).norm());
            for (std::size_t i = 0; i < core.i_dim(); ++i) {
                const auto& members = by_slice_[k][i];
                if (members.empty()) continue;
                Matrix a(members.size(), r_prev * r_next);
                Vector y(idx(members.size()));
                for (std::size_t j = 0; j < members.size(); ++j) {
                    const std::size_t e = members[j];
                    for (std::size_t b = 0; b < r_next; ++b)
                        for (std::size_t p = 0; p < r_prev; ++p)
                            a(idx(j), idx(p + r_prev * b)) = left(idx(e), idx(p)) * right_[k](idx(b), idx(e));
                    y(idx(j)) = values_[e];
                }
                core.set_slice(i, unvec(least_squares(a, y, ridge, scale), r_prev, r_next));
            }

            const auto slices = slices_of(core);
            Matrix next(idx(count), idx(r_next));
            for (std::size_t e = 0; e < count; ++e) next.row(idx(e)) = left.row(idx(e)) * slices[mode_index(e, k)];
            left = std::move(next);
            if (after_core) after_core(k);
        }

        double objective = 0.0;
        for (std::size_t e = 0; e < count; ++e) {
            const double diff = left(idx(e), 0) - values_[e];
            objective += diff * diff;
        }
        return objective;
    }

private:
    std::size_t mode_index(std::size_t e, std::size_t k) const { return index_[e * order_ + k]; }

    static std::vector<Matrix> slices_of(const TTCore& c) {
        std::vector<Matrix> out(c.i_dim());
        for (std::size_t i = 0; i < c.i_dim(); ++i) out[i] = c.slice(i);
        return out;
    }

    std::size_t order_;
    std::vector<std::size_t> entries_;
    std::vector<std::size_t> index_;
    std::vector<double> values_;
    std::vector<std::vector<std::vector<std::size_t>>> by_slice_;
    std::vector<Matrix> right_;
};

}  // namespace

void SolverConfig::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("solver max_iter must be at least 1");
    if (!(ridge >= 0.0)) throw std::invalid_argument("solver ridge must be nonnegative");
}

EnvironmentSlices environment_slices(std::span<const TTCore> cores, std::size_t k, const ObservationMask& mask) {
    const std::size_t n = cores.size();
    if (k >= n) throw std::invalid_argument("environment_slices: core index " + std::to_string(k) + " out of range");
    const Shape shape = chain_shape(cores);
    if (mask.shape() != shape) throw std::invalid_argument("environment_slices: mask shape does not match chain");

    std::vector<std::vector<Matrix>> slices(n);
    for (std::size_t m = 0; m < n; ++m) {
        slices[m].resize(cores[m].i_dim());
        for (std::size_t i = 0; i < cores[m].i_dim(); ++i) slices[m][i] = cores[m].slice(i);
    }
    const auto col_strides = unfold_strides(shape, k);

    EnvironmentSlices out(shape[k]);
    MultiIndex index(n);
    for (std::size_t flat : mask.observed_indices()) {
        std::size_t rem = flat;
        std::size_t column = 0;
        for (std::size_t m = 0; m < n; ++m) {
            index[m] = rem % shape[m];
            rem /= shape[m];
            column += index[m] * col_strides[m];
        }
        Matrix env = Matrix::Identity(idx(cores[k].r_next()), idx(cores[k].r_next()));
        for (std::size_t step = 1; step < n; ++step) {
            const std::size_t m = (k + step) % n;
            env = env * slices[m][index[m]];
        }
        out[index[k]].push_back({column, flat, std::move(env)});
    }
    return out;
}

EnvironmentSlices environment_slices(const TTTensor& chain, std::size_t k, const ObservationMask& mask) {
    require_valid(chain);
    return environment_slices(std::span<const TTCore>(chain.cores), k, mask);
}

std::optional<Matrix> solve_slice(std::span<const SliceObservation> rows, std::size_t r_prev, std::size_t r_next,
                                  double ridge, double scale) {
    if (r_prev == 0 || r_next == 0) throw std::invalid_argument("solve_slice: ranks must be positive");
    if (rows.empty()) return std::nullopt;
    for (const auto& row : rows) {
        if (static_cast<std::size_t>(row.environment.rows()) != r_next ||
            static_cast<std::size_t>(row.environment.cols()) != r_prev) {
            throw std::invalid_argument("solve_slice: environment slice has wrong dimensions");
        }
    }
    const Matrix a = design_from_environments(rows, r_prev, r_next);
    Vector y(idx(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) y(idx(j)) = rows[j].value;
    return unvec(least_squares(a, y, ridge, scale), r_prev, r_next);
}

TTCore solve_core(std::span<const TTCore> cores, std::size_t k, const DenseTensor& data, const ObservationMask& mask,
                  double ridge) {
    check_problem_shapes(chain_shape(cores), data, mask);
    const auto env = environment_slices(cores, k, mask);
    double scale = 0.0;
    for (const auto& slice_rows : env)
        for (const auto& r : slice_rows) scale = std::max(scale, r.slice.norm());
    TTCore updated = cores[k];
    std::vector<SliceObservation> rows;
    for (std::size_t i = 0; i < env.size(); ++i) {
        rows.clear();
        for (const auto& r : env[i]) rows.push_back({r.slice, data[r.flat_index]});
        if (auto x = solve_slice(rows, updated.r_prev(), updated.r_next(), ridge, scale)) updated.set_slice(i, *x);
    }
    return updated;
}

SolverState update_core(SolverState state, std::size_t k, double ridge) {
    require_valid(state.chain);
    if (k >= state.chain.order()) throw std::invalid_argument("update_core: core index out of range");
    state.chain.cores[k] = solve_core(state.chain.cores, k, state.data, state.mask, ridge);
    return state;
}

double epsilon(const TTTensor& prev, const TTTensor& next) {
    if (prev.order() != next.order()) throw std::invalid_argument("epsilon: chains have different orders");
    double total = 0.0;
    for (std::size_t k = 0; k < prev.order(); ++k) {
        const auto& a = prev.cores[k];
        const auto& b = next.cores[k];
        if (a.r_prev() != b.r_prev() || a.i_dim() != b.i_dim() || a.r_next() != b.r_next()) {
            throw std::invalid_argument("epsilon: core " + std::to_string(k) + " shapes differ");
        }
        double diff = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = b.data()[j] - a.data()[j];
            diff += d * d;
        }
        diff = std::sqrt(diff);
        const double base = a.frobenius_norm();
        total += base > 0.0 ? diff / base : diff;
    }
    return total;
}

double masked_objective(const TTTensor& chain, const DenseTensor& data, const ObservationMask& mask) {
    check_problem_shapes(chain.shape(), data, mask);
    const DenseTensor full = tt_reconstruct(chain);
    double sum = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (!mask.observed(i)) continue;
        const double d = full[i] - data[i];
        sum += d * d;
    }
    return sum;
}

CompletionReport tcam_tt(const DenseTensor& data, const ObservationMask& mask, const std::vector<std::size_t>& rank,
                         const SolverConfig& cfg) {
    cfg.validate();
    if (data.shape() != mask.shape()) throw std::invalid_argument("tcam_tt: data and mask shapes differ");
    check_rank_vector(data.shape(), rank);

    const DenseTensor zero_filled = apply_mask(data, mask);
    TTTensor chain = tt_approximate(zero_filled, rank);
    SweepEngine engine(zero_filled, mask);

    CompletionReport report;
    for (std::size_t sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        const TTTensor previous = chain;
        std::function<void(std::size_t)> hook;
        if (cfg.on_core_update) {
            hook = [&](std::size_t core) { cfg.on_core_update(CoreUpdateEvent{sweep, core, chain}); };
        }
        const double objective = engine.sweep(chain, cfg.ridge, hook);
        const double eps = epsilon(previous, chain);
        report.objective_trace.push_back(objective);
        report.epsilon_trace.push_back(eps);
        report.iterations = sweep;
        if (eps <= cfg.tol) {
            report.converged = true;
            break;
        }
    }
    report.recovered = tt_reconstruct(chain);
    report.chain = std::move(chain);
    return report;
}

}  // namespace tcam

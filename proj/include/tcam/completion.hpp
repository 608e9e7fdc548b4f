#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tcam/tensor.hpp"
#include "tcam/tt.hpp"

namespace tcam {

struct CoreUpdateEvent {
    std::size_t sweep;  // 1-based
    std::size_t core;   // 0-based
    const TTTensor& chain;
};

struct SolverConfig {
    double tol = 1e-4;
    std::size_t max_iter = 100;
    /** Tikhonov weight on each slice solve; 0 runs the plain alternating least squares. */
    double ridge = 0.0;
    /** Reserved for randomized fallbacks; the solver itself is deterministic. */
    std::optional<std::uint64_t> seed;
    /** Called after every single core update, e.g. to trace the objective. */
    std::function<void(const CoreUpdateEvent&)> on_core_update;

    void validate() const;
};

struct SolverState {
    TTTensor chain;
    DenseTensor data;  // zero at unobserved positions
    ObservationMask mask;
    std::size_t sweep_index = 0;
};

struct CompletionReport {
    DenseTensor recovered;
    std::size_t iterations = 0;
    std::vector<double> epsilon_trace;
    std::vector<double> objective_trace;
    bool converged = false;
    /** Final factors. For the matricization baseline this is the two-core chain U, V^T over the matrix shape. */
    TTTensor chain;
};

/** One observed column of the mode-k unfolding together with its environment slice. */
struct EnvironmentRow {
    std::size_t column;      // column of the mode-k unfolding
    std::size_t flat_index;  // offset into the tensor data
    Matrix slice;            // r_k x r_{k-1}
};

/** Indexed by i_k; each entry lists the observed columns of that row. */
using EnvironmentSlices = std::vector<std::vector<EnvironmentRow>>;

/**
 * Environment B^(k) = U_{k+1} ... U_n U_1 ... U_{k-1} restricted to the
 * observed entries. Each slice is the product of the per-mode core slices
 * picked out by the entry's multi-index; the chain may be cyclically closed
 * with wrap-around rank > 1.
 */
EnvironmentSlices environment_slices(std::span<const TTCore> cores, std::size_t k, const ObservationMask& mask);
EnvironmentSlices environment_slices(const TTTensor& chain, std::size_t k, const ObservationMask& mask);

struct SliceObservation {
    Matrix environment;  // r_next x r_prev
    double value;
};

/**
 * Minimizes sum_j (trace(X B_j) - y_j)^2 + ridge ||X||_F^2 over X (r_prev x r_next).
 * Returns nothing when there are no observations; the caller keeps its previous slice.
 *
 * `scale` is the largest environment norm over the whole core being updated.
 * Pseudo-inverse cutoffs are measured against it as well as against this
 * slice's own largest singular value.
 */
std::optional<Matrix> solve_slice(std::span<const SliceObservation> rows, std::size_t r_prev, std::size_t r_next,
                                  double ridge, double scale = 0.0);

/** Core k re-solved slice by slice against the other cores of a (possibly rotated) chain. */
TTCore solve_core(std::span<const TTCore> cores, std::size_t k, const DenseTensor& data, const ObservationMask& mask,
                  double ridge);

SolverState update_core(SolverState state, std::size_t k, double ridge);

/** Summed relative change of the cores between two consecutive iterates. */
double epsilon(const TTTensor& prev, const TTTensor& next);

/** ||P_Omega o (f(chain) - X)||_F^2 */
double masked_objective(const TTTensor& chain, const DenseTensor& data, const ObservationMask& mask);

/**
 * Tensor completion by alternating minimization over the MPS cores.
 *
 * Initializes with tt_approximate() of the zero-filled data, then runs
 * Gauss-Seidel sweeps over cores 1..n until epsilon() <= tol or max_iter
 * sweeps have run.
 */
CompletionReport tcam_tt(const DenseTensor& data, const ObservationMask& mask, const std::vector<std::size_t>& rank,
                         const SolverConfig& cfg = {});

}  // namespace tcam

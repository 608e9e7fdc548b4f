#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcam/completion.hpp"
#include "tcam/tensor.hpp"
#include "tcam/tmm.hpp"
#include "tcam/tt.hpp"

namespace tcam {

/** splitmix64 finalizer; used to derive independent stream seeds. */
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/**
 * Portable random source: std::mt19937_64 bits turned into doubles by fixed
 * formulas, so streams are identical on every platform (the std::
 * distributions are implementation-defined).
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /** Uniform on [0, 1) with 53 random bits. */
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /** Standard normal by Box-Muller; the second variate of each pair is cached. */
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/** Chain with i.i.d. standard normal core entries. */
TTTensor random_tt_chain(const Shape& shape, const std::vector<std::size_t>& rank, std::uint64_t seed);
DenseTensor random_tt_tensor(const Shape& shape, const std::vector<std::size_t>& rank, std::uint64_t seed);

/** Each entry observed independently with probability `p`. */
ObservationMask bernoulli_mask(const Shape& shape, double p, std::uint64_t seed);

/** Raised by reme() when the original tensor vanishes on every missing entry. */
class DegenerateDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/** Relative Frobenius error over the unobserved entries; 0 when nothing is missing. */
double reme(const DenseTensor& original, const DenseTensor& recovered, const ObservationMask& mask);

struct Method {
    enum class Kind { TcamTT, Tmm };
    Kind kind = Kind::TcamTT;
    std::size_t split = 0;  // tmm only, 1-based

    std::string label() const;
    static Method parse(const std::string& text);
    bool operator==(const Method&) const = default;
};

struct SweepPlan {
    Shape shape;
    std::vector<std::size_t> rank;
    std::vector<double> ratios;
    std::size_t trials = 1;
    std::vector<Method> methods{Method{}};
    std::uint64_t seed = 0;
    SolverConfig tt;
    double tmm_tol = 1e-4;
    std::size_t tmm_max_iter = 1000;

    void validate() const;
};

struct SweepRow {
    std::string method;
    double ratio = 0.0;
    std::size_t trial = 0;
    std::size_t iterations = 0;
    double reme = std::numeric_limits<double>::infinity();  // +inf marks a failed run
    double seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/**
 * Seeds for a sweep cell. The ground-truth tensor depends on the trial only
 * and the mask on (ratio, trial), so every method sees identical instances.
 */
std::uint64_t instance_seed(std::uint64_t base, std::size_t trial);
std::uint64_t mask_seed(std::uint64_t base, std::size_t ratio_index, std::size_t trial);

/** Runs every (ratio, trial, method) cell; rows are ordered ratio-major, then trial, then method. */
SweepResult run_sweep(const SweepPlan& plan);

struct SweepSummaryRow {
    std::string method;
    double ratio;
    double mean_reme;
    double median_iterations;
};

/** Per (method, ratio) mean REME and median iteration count, in plan order. */
std::vector<SweepSummaryRow> summarize(const SweepPlan& plan, const SweepResult& result);

}  // namespace tcam

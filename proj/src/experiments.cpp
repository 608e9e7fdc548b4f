#include "tcam/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "tcam/tt_svd.hpp"

namespace tcam {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

TTTensor random_tt_chain(const Shape& shape, const std::vector<std::size_t>& rank, std::uint64_t seed) {
    check_rank_vector(shape, rank);
    Rng rng(seed);
    TTTensor tt;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        TTCore core(rank[k], shape[k], rank[k + 1]);
        for (auto& v : core.data()) v = rng.normal();
        tt.cores.push_back(std::move(core));
    }
    return tt;
}

DenseTensor random_tt_tensor(const Shape& shape, const std::vector<std::size_t>& rank, std::uint64_t seed) {
    return tt_reconstruct(random_tt_chain(shape, rank, seed));
}

ObservationMask bernoulli_mask(const Shape& shape, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("observation probability must lie in [0, 1]");
    Rng rng(seed);
    std::vector<std::uint8_t> bits(element_count(shape));
    for (auto& b : bits) b = rng.uniform() < p ? 1 : 0;
    return ObservationMask(shape, std::move(bits));
}

double reme(const DenseTensor& original, const DenseTensor& recovered, const ObservationMask& mask) {
    if (original.shape() != recovered.shape() || original.shape() != mask.shape()) {
        throw std::invalid_argument("reme: shape mismatch");
    }
    if (mask.observed_count() == mask.size()) return 0.0;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        if (mask.observed(i)) continue;
        const double d = original[i] - recovered[i];
        num += d * d;
        den += original[i] * original[i];
    }
    if (den == 0.0) throw DegenerateDenominator("reme: original tensor is zero on every missing entry");
    return std::sqrt(num) / std::sqrt(den);
}

std::string Method::label() const {
    return kind == Kind::TcamTT ? "tcam-tt" : "tmm:" + std::to_string(split);
}

Method Method::parse(const std::string& text) {
    if (text == "tcam-tt") return Method{};
    if (text.rfind("tmm:", 0) == 0 && text.size() > 4) {
        std::size_t split = 0;
        for (std::size_t i = 4; i < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9') throw std::invalid_argument("invalid method '" + text + "'");
            split = split * 10 + static_cast<std::size_t>(text[i] - '0');
        }
        if (split == 0) throw std::invalid_argument("tmm split must be at least 1 in '" + text + "'");
        return Method{Kind::Tmm, split};
    }
    throw std::invalid_argument("unknown method '" + text + "' (expected tcam-tt or tmm:<split>)");
}

void SweepPlan::validate() const {
    check_rank_vector(shape, rank);
    if (ratios.empty()) throw std::invalid_argument("sweep plan needs at least one observation ratio");
    for (double r : ratios) {
        if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("observation ratios must lie in (0, 1]");
    }
    if (trials < 1) throw std::invalid_argument("sweep plan needs at least one trial");
    if (methods.empty()) throw std::invalid_argument("sweep plan needs at least one method");
    for (const auto& m : methods) {
        if (m.kind == Method::Kind::Tmm && (m.split < 1 || m.split >= shape.size())) {
            throw std::invalid_argument("method " + m.label() + " has no matching matricization");
        }
    }
    tt.validate();
}

std::uint64_t instance_seed(std::uint64_t base, std::size_t trial) { return derive_seed(base, 0x7e45u, trial); }

std::uint64_t mask_seed(std::uint64_t base, std::size_t ratio_index, std::size_t trial) {
    return derive_seed(base, 0x3a5c0000u + ratio_index, trial);
}

SweepResult run_sweep(const SweepPlan& plan) {
    plan.validate();
    using Clock = std::chrono::steady_clock;

    std::vector<DenseTensor> truths;
    truths.reserve(plan.trials);
    for (std::size_t t = 0; t < plan.trials; ++t) {
        truths.push_back(random_tt_tensor(plan.shape, plan.rank, instance_seed(plan.seed, t)));
    }

    SweepResult result;
    result.rows.reserve(plan.ratios.size() * plan.trials * plan.methods.size());
    for (std::size_t ri = 0; ri < plan.ratios.size(); ++ri) {
        for (std::size_t t = 0; t < plan.trials; ++t) {
            const auto& truth = truths[t];
            const auto mask = bernoulli_mask(plan.shape, plan.ratios[ri], mask_seed(plan.seed, ri, t));
            for (const auto& method : plan.methods) {
                SweepRow row{method.label(), plan.ratios[ri], t};
                const auto start = Clock::now();
                try {
                    CompletionReport report;
                    if (method.kind == Method::Kind::TcamTT) {
                        report = tcam_tt(truth, mask, plan.rank, plan.tt);
                    } else {
                        TmmConfig cfg;
                        cfg.split = method.split;
                        cfg.rank = plan.rank[method.split];
                        cfg.tol = plan.tmm_tol;
                        cfg.max_iter = plan.tmm_max_iter;
                        cfg.ridge = plan.tt.ridge;
                        report = tmm_complete(truth, mask, cfg);
                    }
                    row.iterations = report.iterations;
                    row.reme = reme(truth, report.recovered, mask);
                    if (!std::isfinite(row.reme)) row.reme = std::numeric_limits<double>::infinity();
                } catch (const std::exception&) {
                    row.iterations = 0;
                    row.reme = std::numeric_limits<double>::infinity();
                }
                row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

std::vector<SweepSummaryRow> summarize(const SweepPlan& plan, const SweepResult& result) {
    std::vector<SweepSummaryRow> out;
    for (const auto& method : plan.methods) {
        const auto label = method.label();
        for (double ratio : plan.ratios) {
            double sum = 0.0;
            std::vector<double> iterations;
            for (const auto& row : result.rows) {
                if (row.method != label || row.ratio != ratio) continue;
                sum += row.reme;
                iterations.push_back(static_cast<double>(row.iterations));
            }
            if (iterations.empty()) continue;
            std::sort(iterations.begin(), iterations.end());
            const std::size_t mid = iterations.size() / 2;
            const double median =
                iterations.size() % 2 ? iterations[mid] : 0.5 * (iterations[mid - 1] + iterations[mid]);
            out.push_back({label, ratio, sum / static_cast<double>(iterations.size()), median});
        }
    }
    return out;
}

}  // namespace tcam

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>

#include "oracles.hpp"
#include "tcam/completion.hpp"
#include "tcam/linalg.hpp"
#include "tcam/tt_svd.hpp"

using namespace tcam;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
    return m;
}

std::vector<std::size_t> random_rank(std::mt19937_64& rng, std::size_t n, std::size_t max_rank) {
    std::vector<std::size_t> rank{1};
    for (std::size_t k = 1; k < n; ++k) rank.push_back(1 + rng() % max_rank);
    rank.push_back(1);
    return rank;
}

double masked_objective_loop(const TTTensor& tt, const DenseTensor& x, const ObservationMask& m) {
    double sum = 0.0;
    for (const auto& idx : oracle::enumerate(x.shape())) {
        const std::size_t flat = x.flat_index(idx);
        if (!m.observed(flat)) continue;
        const double d = oracle::chain_entry(tt.cores, idx) - x[flat];
        sum += d * d;
    }
    return sum;
}

double max_core_diff(const TTTensor& a, const TTTensor& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.order(); ++k) worst = std::max(worst, oracle::max_abs_diff(a.cores[k], b.cores[k]));
    return worst;
}

}  // namespace

TEST_CASE("solver config validation", "[completion]") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.max_iter = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.ridge = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("environment slices", "[completion][environment]") {
    std::mt19937_64 rng(1);

    SECTION("fully observed matrix: slices are the other core's slices") {
        const auto tt = oracle::random_chain(rng, {2, 2}, {1, 3, 1});
        const auto env = environment_slices(tt, 0, ObservationMask::all({2, 2}));
        REQUIRE(env.size() == 2);
        for (std::size_t i1 = 0; i1 < 2; ++i1) {
            REQUIRE(env[i1].size() == 2);
            for (std::size_t j = 0; j < 2; ++j) {
                const auto& row = env[i1][j];
                CHECK(row.column == j);
                CHECK(row.flat_index == i1 + 2 * j);
                CHECK(row.slice == tt.cores[1].slice(j));
            }
        }
    }

    SECTION("empty mask gives empty collections") {
        const auto tt = oracle::random_chain(rng, {3, 2, 2}, {1, 2, 2, 1});
        for (std::size_t k = 0; k < 3; ++k) {
            const auto env = environment_slices(tt, k, ObservationMask::none({3, 2, 2}));
            REQUIRE(env.size() == tt.shape()[k]);
            for (const auto& rows : env) CHECK(rows.empty());
        }
    }

    SECTION("middle core: slices of the materialized wrap-around product") {
        const Shape shape{3, 4, 2};
        const auto tt = oracle::random_chain(rng, shape, {1, 2, 3, 1});
        const auto mask = oracle::random_mask(rng, shape, 0.6);
        const auto env = environment_slices(tt, 1, mask);
        // B = U_3 U_1 with combined index i3 + I3 * i1
        const auto b = connect_product(tt.cores[2], tt.cores[0]);
        std::size_t seen = 0;
        for (std::size_t i2 = 0; i2 < 4; ++i2) {
            for (const auto& row : env[i2]) {
                const auto idx = mask.as_tensor().multi_index(row.flat_index);
                CHECK(idx[1] == i2);
                CHECK(mask.observed(row.flat_index));
                CHECK(row.column == idx[2] + 2 * idx[0]);
                CHECK((row.slice - b.slice(row.column)).norm() < 1e-14);
                ++seen;
            }
        }
        CHECK(seen == mask.observed_count());
    }

    SECTION("bad core index") {
        const auto tt = oracle::random_chain(rng, {2, 2}, {1, 2, 1});
        CHECK_THROWS_AS(environment_slices(tt, 2, ObservationMask::all({2, 2})), std::invalid_argument);
    }
}

TEST_CASE("slice least squares", "[completion][solve]") {
    std::mt19937_64 rng(2);

    SECTION("scalar case has the closed form") {
        std::vector<SliceObservation> rows;
        double num = 0.0, den = 0.0;
        for (int j = 0; j < 5; ++j) {
            const double b = 0.5 + j, y = 2.0 - 0.3 * j;
            rows.push_back({Matrix::Constant(1, 1, b), y});
            num += b * y;
            den += b * b;
        }
        CHECK((*solve_slice(rows, 1, 1, 0.0))(0, 0) == Catch::Approx(num / den).epsilon(1e-14));
        CHECK((*solve_slice(rows, 1, 1, 0.7))(0, 0) == Catch::Approx(num / (den + 0.7)).epsilon(1e-14));
    }

    SECTION("consistent system recovers the generating slice") {
        const Matrix x_star = random_matrix(rng, 2, 3);
        std::vector<SliceObservation> rows;
        for (int j = 0; j < 12; ++j) {
            const Matrix b = random_matrix(rng, 3, 2);
            rows.push_back({b, (x_star * b).trace()});
        }
        const auto x = solve_slice(rows, 2, 3, 0.0);
        REQUIRE(x);
        CHECK((*x - x_star).norm() < 1e-10);
    }

    SECTION("underdetermined system returns the minimum-norm solution") {
        const Matrix b = random_matrix(rng, 2, 2);
        const double y = 1.7;
        const auto x = solve_slice(std::vector<SliceObservation>{{b, y}}, 2, 2, 0.0);
        REQUIRE(x);
        CHECK((*x * b).trace() == Catch::Approx(y).epsilon(1e-12));

        // oracle: pseudo-inverse of the explicit 1x4 design row vec(B^T)^T
        const Eigen::MatrixXd bt = b.transpose();
        const Eigen::MatrixXd design = Eigen::Map<const Eigen::VectorXd>(bt.data(), 4).transpose();
        const Eigen::VectorXd expected = design.completeOrthogonalDecomposition().pseudoInverse() * Eigen::VectorXd::Constant(1, y);
        const Eigen::MatrixXd xc = *x;
        const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(xc.data(), 4);
        CHECK((got - expected).norm() < 1e-12);
    }

    SECTION("no observations signals an empty slice") {
        CHECK_FALSE(solve_slice(std::vector<SliceObservation>{}, 2, 2, 0.0).has_value());
    }

    SECTION("environment of the wrong size is rejected") {
        CHECK_THROWS_AS(solve_slice(std::vector<SliceObservation>{{Matrix::Ones(2, 2), 1.0}}, 2, 3, 0.0),
                        std::invalid_argument);
    }

    SECTION("an environment at rounding level is treated as empty against the core scale") {
        const std::vector<SliceObservation> rows{{Matrix::Constant(1, 1, 1e-18), 1.0}};
        CHECK((*solve_slice(rows, 1, 1, 0.0, 1.0))(0, 0) == 0.0);
        // on its own scale the same system is perfectly conditioned
        CHECK((*solve_slice(rows, 1, 1, 0.0))(0, 0) == Catch::Approx(1e18));
    }
}

TEST_CASE("core updates", "[completion][update]") {
    std::mt19937_64 rng(3);

    SECTION("exact data is a fixed point") {
        const auto tt = oracle::random_chain(rng, {3, 4, 3}, {1, 2, 2, 1});
        const auto x = tt_reconstruct(tt);
        SolverState state{tt, x, ObservationMask::all(x.shape())};
        for (std::size_t k = 0; k < 3; ++k) {
            const auto next = update_core(state, k, 0.0);
            CHECK(oracle::max_abs_diff(next.chain.cores[k], tt.cores[k]) < 1e-10);
            for (std::size_t j = 0; j < 3; ++j)
                if (j != k) CHECK(oracle::max_abs_diff(next.chain.cores[j], tt.cores[j]) == 0.0);
        }
    }

    SECTION("order 2 update is the matrix ALS row update") {
        const Shape shape{6, 7};
        const auto tt = oracle::random_chain(rng, shape, {1, 2, 1});
        const auto x = oracle::random_tensor(rng, shape);
        const auto mask = oracle::random_mask(rng, shape, 0.7);
        const auto next = update_core(SolverState{tt, apply_mask(x, mask), mask}, 0, 0.0);

        // U = L(U_1) rows solved against V = R(U_2)^T on the observed columns
        const Matrix v = right_unfold(tt.cores[1]).transpose();
        const Matrix u = left_unfold(next.chain.cores[0]);
        for (Eigen::Index i = 0; i < 6; ++i) {
            std::vector<Eigen::Index> cols;
            for (Eigen::Index j = 0; j < 7; ++j)
                if (mask.observed(static_cast<std::size_t>(i + 6 * j))) cols.push_back(j);
            if (cols.empty()) continue;
            Eigen::MatrixXd a(static_cast<Eigen::Index>(cols.size()), 2);
            Eigen::VectorXd y(static_cast<Eigen::Index>(cols.size()));
            for (std::size_t c = 0; c < cols.size(); ++c) {
                a.row(static_cast<Eigen::Index>(c)) = v.row(cols[c]);
                y(static_cast<Eigen::Index>(c)) = x[static_cast<std::size_t>(i + 6 * cols[c])];
            }
            const Eigen::VectorXd expected = a.completeOrthogonalDecomposition().solve(y);
            CHECK((u.row(i).transpose() - expected).norm() < 1e-10);
        }
    }

    SECTION("masked objective never increases") {
        for (int trial = 0; trial < 50; ++trial) {
            const auto shape = oracle::random_shape(rng, 2, 4, 300, 6);
            const auto n = shape.size();
            const auto x = tt_reconstruct(oracle::random_chain(rng, shape, random_rank(rng, n, 3)));
            const auto noisy = oracle::random_tensor(rng, shape);
            std::vector<double> values(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) values[i] = x[i] + 0.1 * noisy[i];
            const DenseTensor data(shape, values);
            const auto mask = oracle::random_mask(rng, shape, 0.5);
            SolverState state{oracle::random_chain(rng, shape, random_rank(rng, n, 3)), apply_mask(data, mask), mask};
            // below (1e-12 |P(X)|)^2 the objective is rounding noise
            const double floor = std::pow(kPseudoInverseCutoff * frobenius_norm(apply_mask(data, mask)), 2);
            double before = masked_objective(state.chain, data, mask);
            for (std::size_t step = 0; step < 2 * n; ++step) {
                state = update_core(std::move(state), step % n, 0.0);
                const double after = masked_objective(state.chain, data, mask);
                REQUIRE(after <= before * (1.0 + 1e-9) + floor);
                before = after;
            }
        }
    }

    SECTION("slices are independent of solve order") {
        const Shape shape{4, 3, 3};
        const auto tt = oracle::random_chain(rng, shape, {1, 2, 3, 1});
        const auto x = oracle::random_tensor(rng, shape);
        const auto mask = oracle::random_mask(rng, shape, 0.6);
        const auto data = apply_mask(x, mask);
        const auto direct = solve_core(tt.cores, 1, data, mask, 0.0);

        const auto env = environment_slices(tt, 1, mask);
        double scale = 0.0;
        for (const auto& rows : env)
            for (const auto& r : rows) scale = std::max(scale, r.slice.norm());
        TTCore reversed = tt.cores[1], shuffled = tt.cores[1];
        for (std::size_t i = env.size(); i-- > 0;) {
            std::vector<SliceObservation> rows;
            for (const auto& r : env[i]) rows.push_back({r.slice, data[r.flat_index]});
            if (auto s = solve_slice(rows, 2, 3, 0.0, scale)) reversed.set_slice(i, *s);
            // reordering the observations inside a slice only changes rounding
            std::reverse(rows.begin(), rows.end());
            if (auto s = solve_slice(rows, 2, 3, 0.0, scale)) shuffled.set_slice(i, *s);
        }
        CHECK(oracle::max_abs_diff(direct, reversed) == 0.0);
        CHECK(oracle::max_abs_diff(direct, shuffled) < 1e-10 * direct.frobenius_norm());
    }

    SECTION("a slice with no observations keeps its value") {
        const Shape shape{3, 3};
        const auto tt = oracle::random_chain(rng, shape, {1, 2, 1});
        std::vector<std::uint8_t> bits(9, 1);
        for (std::size_t j = 0; j < 3; ++j) bits[1 + 3 * j] = 0;  // row 1 unobserved
        const ObservationMask mask(shape, bits);
        const auto x = oracle::random_tensor(rng, shape);
        const auto next = solve_core(tt.cores, 0, apply_mask(x, mask), mask, 0.0);
        CHECK(next.slice(1) == tt.cores[0].slice(1));
        CHECK(next.slice(0) != tt.cores[0].slice(0));
    }
}

TEST_CASE("epsilon", "[completion]") {
    std::mt19937_64 rng(4);
    const auto tt = oracle::random_chain(rng, {3, 2, 4}, {1, 2, 2, 1});
    CHECK(epsilon(tt, tt) == 0.0);

    TTTensor ones = tt, doubled = tt;
    for (std::size_t k = 0; k < 3; ++k) {
        for (auto& v : ones.cores[k].data()) v = 1.0;
        for (auto& v : doubled.cores[k].data()) v = 2.0;
    }
    CHECK(epsilon(ones, doubled) == Catch::Approx(3.0).epsilon(1e-15));

    auto bumped = tt;
    bumped.cores[1](1, 0, 0) += 0.25;
    CHECK(epsilon(tt, bumped) == Catch::Approx(0.25 / tt.cores[1].frobenius_norm()).epsilon(1e-12));

    auto zero = tt;
    for (auto& v : zero.cores[2].data()) v = 0.0;
    auto moved = zero;
    moved.cores[2](0, 0, 0) = 0.5;
    CHECK(epsilon(zero, zero) == 0.0);
    CHECK(epsilon(zero, moved) == Catch::Approx(0.5));

    CHECK_THROWS_AS(epsilon(tt, oracle::random_chain(rng, {3, 2, 4}, {1, 3, 2, 1})), std::invalid_argument);
}

TEST_CASE("masked objective", "[completion]") {
    std::mt19937_64 rng(5);
    const Shape shape{3, 4, 2};
    const auto tt = oracle::random_chain(rng, shape, {1, 2, 2, 1});
    const auto x = oracle::random_tensor(rng, shape);
    const auto mask = oracle::random_mask(rng, shape, 0.5);
    CHECK(masked_objective(tt, x, mask) == Catch::Approx(masked_objective_loop(tt, x, mask)).epsilon(1e-12));
    CHECK(masked_objective(tt, tt_reconstruct(tt), ObservationMask::all(shape)) < 1e-28);
    CHECK(masked_objective(tt, x, ObservationMask::none(shape)) == 0.0);
    CHECK_THROWS_AS(masked_objective(tt, DenseTensor::zeros({3, 4, 3}), ObservationMask::none({3, 4, 3})),
                    std::invalid_argument);
}

TEST_CASE("tcam_tt solver", "[completion][solver]") {
    std::mt19937_64 rng(6);

    SECTION("fully observed exact tensor converges in one sweep") {
        const std::vector<std::size_t> rank{1, 2, 3, 1};
        const auto x = tt_reconstruct(oracle::random_chain(rng, {4, 3, 5}, rank));
        const auto report = tcam_tt(x, ObservationMask::all(x.shape()), rank);
        CHECK(report.converged);
        CHECK(report.iterations == 1);
        CHECK(report.objective_trace.back() <= 1e-10);
        CHECK(oracle::max_abs_diff(report.recovered, x) < 1e-10);
    }

    SECTION("empty mask returns zeros after one sweep") {
        const auto x = oracle::random_tensor(rng, {3, 3, 3});
        const auto report = tcam_tt(x, ObservationMask::none(x.shape()), {1, 2, 2, 1});
        CHECK(report.converged);
        CHECK(report.iterations == 1);
        CHECK(report.epsilon_trace == std::vector<double>{0.0});
        CHECK(frobenius_norm(report.recovered) == 0.0);
    }

    SECTION("traces have one entry per sweep and the objective does not increase") {
        const Shape shape{5, 4, 5};
        const auto x = tt_reconstruct(oracle::random_chain(rng, shape, {1, 2, 2, 1}));
        const auto mask = oracle::random_mask(rng, shape, 0.4);
        SolverConfig cfg;
        cfg.tol = 1e-10;
        cfg.max_iter = 30;
        const auto report = tcam_tt(x, mask, {1, 2, 2, 1}, cfg);
        REQUIRE(report.epsilon_trace.size() == report.iterations);
        REQUIRE(report.objective_trace.size() == report.iterations);
        const double floor = std::pow(kPseudoInverseCutoff * frobenius_norm(apply_mask(x, mask)), 2);
        for (std::size_t i = 1; i < report.iterations; ++i)
            CHECK(report.objective_trace[i] <= report.objective_trace[i - 1] * (1.0 + 1e-9) + floor);
        CHECK(report.objective_trace.back() ==
              Catch::Approx(masked_objective(report.chain, x, mask)).epsilon(1e-8).margin(1e-20));
        CHECK(vectorize(report.recovered) == vectorize(tt_reconstruct(report.chain)));
    }

    SECTION("cached sweeps match sequential core updates") {
        const Shape shape{4, 3, 4, 3};
        const std::vector<std::size_t> rank{1, 2, 3, 2, 1};
        const auto x = oracle::random_tensor(rng, shape);
        const auto mask = oracle::random_mask(rng, shape, 0.6);
        SolverState state{tt_approximate(apply_mask(x, mask), rank), apply_mask(x, mask), mask};
        double worst = 0.0;
        SolverConfig cfg;
        cfg.max_iter = 3;
        cfg.tol = 1e-14;
        cfg.on_core_update = [&](const CoreUpdateEvent& e) {
            state = update_core(std::move(state), e.core, 0.0);
            worst = std::max(worst, max_core_diff(state.chain, e.chain));
            state.chain = e.chain;  // keep rounding from accumulating between the two routes
        };
        tcam_tt(x, mask, rank, cfg);
        CHECK(worst < 1e-9);
    }

    SECTION("observer sees every core of every sweep in order") {
        const auto x = oracle::random_tensor(rng, {3, 3, 3});
        std::vector<std::pair<std::size_t, std::size_t>> seen;
        SolverConfig cfg;
        cfg.max_iter = 2;
        cfg.tol = 1e-14;
        cfg.on_core_update = [&](const CoreUpdateEvent& e) { seen.emplace_back(e.sweep, e.core); };
        const auto report = tcam_tt(x, oracle::random_mask(rng, {3, 3, 3}, 0.7), {1, 2, 2, 1}, cfg);
        REQUIRE(report.iterations == 2);
        const std::vector<std::pair<std::size_t, std::size_t>> expected{{1, 0}, {1, 1}, {1, 2},
                                                                        {2, 0}, {2, 1}, {2, 2}};
        CHECK(seen == expected);
    }

    SECTION("input checks") {
        const auto x = oracle::random_tensor(rng, {3, 3});
        CHECK_THROWS_AS(tcam_tt(x, ObservationMask::all({3, 4}), {1, 2, 1}), std::invalid_argument);
        CHECK_THROWS_AS(tcam_tt(x, ObservationMask::all({3, 3}), {1, 2, 2, 1}), std::invalid_argument);
    }
}

TEST_CASE("8x8x8x8 rank [1,2,4,2,1] recovery at 50% observation", "[completion][solver][slow]") {
    std::mt19937_64 rng(7);
    const Shape shape{8, 8, 8, 8};
    const std::vector<std::size_t> rank{1, 2, 4, 2, 1};
    int recovered = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const auto x = tt_reconstruct(oracle::random_chain(rng, shape, rank));
        const auto mask = oracle::random_mask(rng, shape, 0.5);
        const auto report = tcam_tt(x, mask, rank);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (mask.observed(i)) continue;
            num += (x[i] - report.recovered[i]) * (x[i] - report.recovered[i]);
            den += x[i] * x[i];
        }
        if (std::sqrt(num / den) < 1e-4 && report.iterations <= 100) ++recovered;
    }
    CHECK(recovered >= 10);
}

#include "cachenet/errors.hpp"
#include "cachenet/sca.hpp"
#include "cachenet/stp.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cachenet;

namespace {

struct Instance {
    NetworkConfig cfg;
    CoefficientTable coef;
    CachingMatrix t;
    Eigen::VectorXd a;
};

Instance random_instance(std::mt19937_64& rng, std::size_t tiers, std::size_t files) {
    Instance in;
    in.cfg = testing::random_network(rng, tiers, files);
    in.coef = compute_coefficients(in.cfg);
    in.t = testing::random_caching(rng, in.cfg);
    in.a = testing::random_simplex(rng, files);
    return in;
}

}  // namespace

TEST_CASE("step schedules") {
    const auto h = StepSchedule::harmonic();
    CHECK(h(1) == doctest::Approx(2.0 / 3.0));
    CHECK(h(98) == doctest::Approx(0.02));
    CHECK(StepSchedule::power(0.5)(4) == doctest::Approx(0.5));
    CHECK(StepSchedule::constant(0.3)(1000) == 0.3);
}

TEST_CASE("tier subproblem matches a projected-gradient oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 3, 10);
        for (std::size_t m = 0; m < 3; ++m) {
            const double k = static_cast<double>(in.cfg.cache_sizes[m]);
            const Eigen::VectorXd got = solve_tier_subproblem(m, in.a, in.t, in.coef, in.cfg.cache_sizes[m]);
            CHECK(std::abs(got.sum() - k) <= 1e-9);
            auto grad = [&](const Eigen::VectorXd& row) { return oracle::surrogate_gradient(m, in.a, row, in.t, in.coef); };
            const Eigen::VectorXd start = Eigen::VectorXd::Constant(10, k / 10.0);
            const Eigen::VectorXd want = oracle::projected_gradient_ascent(
                grad, start, k, oracle::surrogate_curvature(m, in.a, in.t, in.coef));
            CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-6);
            // The closed form also attains at least the oracle's surrogate value.
            const auto m_idx = m;
            CHECK(sca_surrogate_objective(m_idx, in.a, got, in.t, in.coef) >=
                  sca_surrogate_objective(m_idx, in.a, want, in.t, in.coef) - 1e-12);
        }
    }
}

TEST_CASE("symmetric instance yields the uniform row") {
    const auto cfg = testing::three_tier(6, 3, 2, 1);
    const auto coef = compute_coefficients(cfg);
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
    const CachingMatrix t = uniform_caching(cfg);
    for (std::size_t m = 0; m < 3; ++m) {
        const Eigen::VectorXd row = solve_tier_subproblem(m, a, t, coef, cfg.cache_sizes[m]);
        for (Eigen::Index n = 0; n < 6; ++n) {
            CHECK(row(n) == doctest::Approx(static_cast<double>(cfg.cache_sizes[m]) / 6.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("unrequested files get nothing once the multiplier is positive") {
    TierSurrogate s;
    s.theta = 1.0;
    s.gain = Eigen::VectorXd::Ones(5);
    s.gain(4) = 0.0;
    s.offset = Eigen::VectorXd::Ones(5);
    s.price = Eigen::VectorXd::Zero(5);
    // Four equal files share K = 1: sqrt(1 / nu) - 1 = 1/4.
    const auto sol = solve_surrogate(s, 1.0);
    CHECK(sol.multiplier == doctest::Approx(0.64).epsilon(1e-9));
    CHECK(sol.row(4) == 0.0);
    for (Eigen::Index n = 0; n < 4; ++n) CHECK(sol.row(n) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("slack budget: zero-gain files absorb the remainder at a zero multiplier") {
    // Requested files saturate below K; any split of the rest over unrequested
    // files is optimal, and the solver stays feasible.
    const auto cfg = testing::three_tier(5, 1, 1, 1);
    const auto coef = compute_coefficients(cfg);
    Eigen::VectorXd a(5);
    a << 0.6, 0.4, 0.0, 0.0, 0.0;
    const auto s = sca_surrogate(0, a, uniform_caching(cfg), coef);
    const auto sol = solve_surrogate(s, 1.0);
    CHECK(std::abs(sol.multiplier) <= 1e-12);
    CHECK(std::abs(sol.row.sum() - 1.0) <= 1e-9);
    CHECK(sol.row.minCoeff() >= 0.0);
    const Eigen::VectorXd at_zero = s.row_at(1e-300);
    CHECK(std::abs(sol.row(0) - at_zero(0)) <= 1e-9);
}

TEST_CASE("surrogate touches q and its gradient at the expansion point") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 1 + rng() % 4, 7);
        const Eigen::MatrixXd grad = stp_gradient(in.a, in.t, in.coef);
        const double q = stp(in.a, in.t, in.coef);
        for (std::size_t m = 0; m < in.cfg.tiers(); ++m) {
            const auto mi = static_cast<Eigen::Index>(m);
            const Eigen::VectorXd row = in.t.row(mi).transpose();
            CHECK(std::abs(sca_surrogate_objective(m, in.a, row, in.t, in.coef) - q) <= 1e-12);
            const Eigen::VectorXd hg = oracle::surrogate_gradient(m, in.a, row, in.t, in.coef);
            CHECK((hg - grad.row(mi).transpose()).cwiseAbs().maxCoeff() <= 1e-8);

            // Same check through the library's separable form by central differences.
            const auto s = sca_surrogate(m, in.a, in.t, in.coef);
            for (Eigen::Index n = 0; n < row.size(); ++n) {
                const double h = 1e-6;
                Eigen::VectorXd up = row;
                Eigen::VectorXd dn = row;
                up(n) += h;
                dn(n) -= h;
                const double fd = (s.value(up) - s.value(dn)) / (2.0 * h);
                CHECK(std::abs(fd - grad(mi, n)) <= 1e-6 * std::max(1.0, std::abs(grad(mi, n))));
            }
        }
    }
}

TEST_CASE("surrogate curvature is diagonal and negative") {
    // d^2/dT^2 of a T / (theta T + c) is -2 a theta c / (theta T + c)^3 with c
    // the interference from the other tiers plus eta.
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 3, 6);
        for (std::size_t m = 0; m < 3; ++m) {
            const auto mi = static_cast<Eigen::Index>(m);
            Eigen::VectorXd row = testing::random_row(rng, 6, in.cfg.cache_sizes[m]);
            row = 0.9 * row.array() + 0.05;
            const double h = 1e-3;
            for (Eigen::Index n = 0; n < 6; ++n) {
                double c = in.coef.eta(mi);
                for (Eigen::Index l = 0; l < 3; ++l) {
                    if (l != mi) c += in.coef.theta(l, mi) * in.t(l, n);
                }
                const double own = in.coef.theta(mi, mi) * row(n) + c;
                const double want = -2.0 * in.a(n) * in.coef.theta(mi, mi) * c / (own * own * own);
                Eigen::VectorXd up = row;
                Eigen::VectorXd dn = row;
                up(n) += h;
                dn(n) -= h;
                const double f0 = sca_surrogate_objective(m, in.a, row, in.t, in.coef);
                const double fd = (sca_surrogate_objective(m, in.a, up, in.t, in.coef) - 2.0 * f0 +
                                   sca_surrogate_objective(m, in.a, dn, in.t, in.coef)) /
                                  (h * h);
                CHECK(want <= 0.0);
                CHECK(std::abs(fd - want) <= 1e-4 * std::abs(want) + 1e-10);

                // Mixed partials vanish.
                const Eigen::Index other = (n + 1) % 6;
                Eigen::VectorXd pp = row, pm = row, mp = row, mm = row;
                pp(n) += h, pp(other) += h;
                pm(n) += h, pm(other) -= h;
                mp(n) -= h, mp(other) += h;
                mm(n) -= h, mm(other) -= h;
                const double mixed = (sca_surrogate_objective(m, in.a, pp, in.t, in.coef) -
                                      sca_surrogate_objective(m, in.a, pm, in.t, in.coef) -
                                      sca_surrogate_objective(m, in.a, mp, in.t, in.coef) +
                                      sca_surrogate_objective(m, in.a, mm, in.t, in.coef)) /
                                     (4.0 * h * h);
                CHECK(std::abs(mixed) <= 1e-4 * std::abs(want) + 1e-6);
            }
        }
    }
}

TEST_CASE("row sum is nonincreasing and continuous in the multiplier") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 3, 8);
        const auto s = sca_surrogate(static_cast<std::size_t>(trial % 3), in.a, in.t, in.coef);
        const double lo = -s.price.maxCoeff() - 1.0;
        double prev = s.row_at(lo).sum();
        CHECK(prev == doctest::Approx(8.0));
        for (int i = 1; i <= 4000; ++i) {
            const double nu = lo + i * 1e-3;
            const double cur = s.row_at(nu).sum();
            CHECK(cur <= prev + 1e-12);
            CHECK(std::abs(s.row_at(nu + 1e-10).sum() - cur) <= 1e-4);
            prev = cur;
        }
    }
}

TEST_CASE("surrogate solver rejects malformed inputs") {
    TierSurrogate s;
    s.theta = 0.0;
    s.gain = Eigen::VectorXd::Ones(2);
    s.offset = Eigen::VectorXd::Ones(2);
    s.price = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(solve_surrogate(s, 1.0), ConfigError);
    s.theta = 1.0;
    CHECK_THROWS_AS(solve_surrogate(s, 3.0), InfeasibleError);
}

TEST_CASE("iterate: step edges and worker invariance") {
    std::mt19937_64 rng(59);
    const auto in = random_instance(rng, 3, 9);
    ScaState state{in.t, 0, 0.0};

    const ScaState full = iterate(state, in.a, StepSchedule::constant(1.0), in.coef, in.cfg);
    for (std::size_t m = 0; m < 3; ++m) {
        const Eigen::VectorXd row = solve_tier_subproblem(m, in.a, in.t, in.coef, in.cfg.cache_sizes[m]);
        CHECK((full.t.row(static_cast<Eigen::Index>(m)).transpose() - row).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(full.k == 1);

    const ScaState frozen = iterate(state, in.a, StepSchedule::constant(0.0), in.coef, in.cfg);
    CHECK((frozen.t - in.t).cwiseAbs().maxCoeff() == 0.0);

    const ScaState seq = iterate(state, in.a, StepSchedule::harmonic(), in.coef, in.cfg, 1);
    const ScaState par = iterate(state, in.a, StepSchedule::harmonic(), in.coef, in.cfg, 3);
    CHECK((seq.t - par.t).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run_sca keeps every iterate feasible and converges on small instances") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const auto in = random_instance(rng, 1 + rng() % 3, 8);
        const auto result = run_sca(in.a, in.cfg, in.coef, StepSchedule::harmonic(), {500, 1e-5});
        CHECK(is_feasible(result.t, in.cfg.cache_sizes));
        CHECK(result.stationarity <= 1e-4);
        CHECK(result.history.front().iter == 0);
        CHECK(result.objective >= result.history.front().objective);
        CHECK(result.objective == doctest::Approx(stp(in.a, result.t, in.coef)).epsilon(1e-15));
    }
}

TEST_CASE("run_sca on the N = K boundary stops immediately") {
    const auto cfg = testing::three_tier(4, 4, 4, 4);
    const auto coef = compute_coefficients(cfg);
    const auto result = run_sca(zipf(4, 0.9).values(), cfg, coef);
    CHECK(result.iterations == 0);
    CHECK(result.converged);
    CHECK((result.t.array() == 1.0).all());
}

#include "cachenet/errors.hpp"
#include "cachenet/experiment.hpp"
#include "cachenet/stp.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using namespace cachenet;

namespace {

const std::string kNetwork = R"("network": {"alpha": 3, "densities": [3.2e-7, 8e-6, 8e-4],
    "powers": [1000, 25.118864315095795, 1], "sir_thresholds": [1, 0.251188643150958, 0.039810717055349734],
    "cache_sizes": [4, 3, 2], "catalog_size": 12})";

std::string doc(const std::string& extra = "") { return "{" + kNetwork + (extra.empty() ? "" : ", " + extra) + "}"; }

}  // namespace

TEST_CASE("config parsing fills every section") {
    const auto cfg = parse_config(doc(R"("popularity": {"case": "unknown", "zipf_gamma": 0.9, "observers": 50,
        "request_prob": 0.5, "slots": 7, "epsilon": 0.1},
      "algorithm": {"max_iters": 30, "tol": 1e-4, "seed": 9, "repeats": 3, "record_wall_time": false},
      "simulation": {"trials": 1e4, "seed": 5, "workers": 2},
      "sweep": {"param": "K3", "values": [2, 3], "schemes": ["sca", "baseline1"], "k_offsets": [2, 1, 0]})"));
    CHECK(cfg.network.catalog_size == 12);
    CHECK(cfg.network.cache_sizes == std::vector<std::size_t>{4, 3, 2});
    CHECK(cfg.popularity.which == PopularityCase::unknown);
    CHECK(cfg.popularity.observers == 50);
    CHECK(cfg.popularity.slots == 7);
    CHECK(cfg.algorithm.seed == 9);
    CHECK(!cfg.algorithm.record_wall_time);
    CHECK(cfg.simulation.trials == 10000);
    REQUIRE(cfg.sweep);
    CHECK(cfg.sweep->k_offsets == std::vector<long>{2, 1, 0});
}

TEST_CASE("config parsing rejects bad documents") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("{}"), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("extra": 1)")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("popularity": {"zipf": 0.5})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("popularity": {"case": "partial"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("popularity": {"values": [0.5, 0.5]})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("algorithm": {"seed": -1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("algorithm": {"repeats": 1.5})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("algorithm": {"baseline_samples": 100})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("simulation": {"trials": "many"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("sweep": {"param": "K2", "values": [1], "schemes": ["sca"]})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("sweep": {"param": "K3", "values": [1], "schemes": ["sca3"]})")), ConfigError);
    CHECK_THROWS_AS(parse_config(doc(R"("sweep": {"param": "K3", "values": [1], "schemes": ["baseline3"]})")),
                    UnsupportedError);
    std::string bad = kNetwork;
    bad.replace(bad.find("[4, 3, 2]"), 9, "[4, 3, 13]");
    CHECK_THROWS_AS(parse_config("{" + bad + "}"), ConfigError);
}

TEST_CASE("schemes score against the case's popularity") {
    auto cfg = parse_config(doc(R"("popularity": {"case": "imperfect", "epsilon": 0.3})"));
    const auto in = popularity_inputs(cfg, 1);
    const auto coef = compute_coefficients(cfg.network);
    const RunOutcome sca = run_scheme(cfg, Scheme::sca, 1);
    CHECK(sca.score == doctest::Approx(worst_case_stp(in.set, sca.t, coef).value).epsilon(1e-15));
    CHECK(sca.score < stp(in.known, sca.t, coef));
    const RunOutcome robust = run_scheme(cfg, Scheme::robust, 1);
    CHECK(robust.score >= sca.score - 1e-9);
    CHECK(robust.history.front().step == 0.0);
    CHECK(robust.history.back().step == 1.0);

    cfg.popularity.which = PopularityCase::unknown;
    const auto a = popularity_inputs(cfg, 3);
    const auto b = popularity_inputs(cfg, 3);
    CHECK(a.known.values() == b.known.values());
    CHECK(a.known.values() != a.truth.values());
    CHECK(popularity_inputs(cfg, 4).known.values() != a.known.values());
}

TEST_CASE("sweep values rewrite the right field") {
    const auto cfg = parse_config(doc());
    SweepSpec sw{"K3", {5}, {"sca"}, {}};
    CHECK(apply_sweep_value(cfg, sw, 5).network.cache_sizes == std::vector<std::size_t>{7, 6, 5});
    sw.k_offsets = {4, 2, 0};
    CHECK(apply_sweep_value(cfg, sw, 3).network.cache_sizes == std::vector<std::size_t>{7, 5, 3});
    CHECK_THROWS_AS(apply_sweep_value(cfg, sw, 9), ConfigError);  // 13 > N
    CHECK_THROWS_AS(apply_sweep_value(cfg, sw, 2.5), ConfigError);
    sw.param = "gamma";
    CHECK(apply_sweep_value(cfg, sw, 1.1).popularity.zipf_gamma == 1.1);
    sw.param = "epsilon";
    CHECK(apply_sweep_value(cfg, sw, 0.2).popularity.epsilon == 0.2);
    sw.param = "L";
    CHECK(apply_sweep_value(cfg, sw, 12).popularity.slots == 12);
    sw.param = "U";
    CHECK(apply_sweep_value(cfg, sw, 40).popularity.observers == 40);
}

TEST_CASE("sweep rows are ordered and independent of the worker count") {
    auto cfg = parse_config(doc(R"("popularity": {"case": "unknown", "slots": 5, "observers": 20},
                                  "algorithm": {"repeats": 3})"));
    const SweepSpec sw{"gamma", {0.3, 0.9}, {"sca", "baseline1", "baseline2"}, {}};
    const auto one = run_sweep(cfg, sw, 1);
    const auto four = run_sweep(cfg, sw, 4);
    REQUIRE(one.size() == 6);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].scheme == four[i].scheme);
        CHECK(one[i].value == four[i].value);
        CHECK(one[i].objective == four[i].objective);
        CHECK(one[i].std_error == four[i].std_error);
        CHECK(one[i].std_error > 0.0);
    }
    CHECK(one[0].value == 0.3);
    CHECK(one[3].scheme == "sca");
    std::ostringstream out;
    write_sweep_csv(out, one);
    CHECK(out.str().rfind("param,value,scheme,objective,stderr\ngamma,0.3,sca,", 0) == 0);
}

TEST_CASE("history csv layout") {
    std::ostringstream out;
    write_history_csv(out, {{0, 0.5, 0.0, 0.25, 3.5}, {1, 0.75, 0.5, 0.125, 7.0}}, false);
    CHECK(out.str() == "iter,objective,step,stationarity,wall_ms\n0,0.5,0,0.25,0\n1,0.75,0.5,0.125,0\n");
}

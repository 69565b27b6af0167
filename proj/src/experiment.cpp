#include "cachenet/experiment.hpp"

#include "cachenet/baselines.hpp"
#include "cachenet/errors.hpp"
#include "cachenet/rng.hpp"
#include "cachenet/robust.hpp"
#include "cachenet/stochastic.hpp"
#include "cachenet/stp.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

namespace cachenet {

namespace {

using nlohmann::json;

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seeds are read as std::size_t");

// Reads typed keys from one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    void read(const std::string& key, double& out) {
        if (has(key)) out = number(j_.at(key), key);
    }

    void read(const std::string& key, std::size_t& out) {
        if (has(key)) out = count(j_.at(key), key);
    }

    void read(const std::string& key, bool& out) {
        if (!has(key)) return;
        if (!j_.at(key).is_boolean()) fail(key, "must be true or false");
        out = j_.at(key).get<bool>();
    }

    void read(const std::string& key, std::string& out) {
        if (!has(key)) return;
        if (!j_.at(key).is_string()) fail(key, "must be a string");
        out = j_.at(key).get<std::string>();
    }

    void read(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        out.clear();
        for (const auto& v : array(key)) out.push_back(number(v, key));
    }

    void read(const std::string& key, std::vector<std::size_t>& out) {
        if (!has(key)) return;
        out.clear();
        for (const auto& v : array(key)) out.push_back(count(v, key));
    }

    void read(const std::string& key, std::vector<long>& out) {
        if (!has(key)) return;
        out.clear();
        for (const auto& v : array(key)) {
            if (!v.is_number_integer()) fail(key, "entries must be integers");
            out.push_back(v.get<long>());
        }
    }

    void read(const std::string& key, std::vector<std::string>& out) {
        if (!has(key)) return;
        out.clear();
        for (const auto& v : array(key)) {
            if (!v.is_string()) fail(key, "entries must be strings");
            out.push_back(v.get<std::string>());
        }
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key())) fail(item.key(), "is not a recognized key");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(key.empty() ? name_ + " " + what : name_ + "." + key + " " + what);
    }

private:
    const json& array(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) fail(key, "must be an array");
        return v;
    }

    double number(const json& v, const std::string& key) const {
        if (!v.is_number()) fail(key, "must be a number");
        return v.get<double>();
    }

    std::size_t count(const json& v, const std::string& key) const {
        if (v.is_number_unsigned()) return v.get<std::size_t>();
        // Accept 1e5 style literals when they are whole and nonnegative.
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::size_t>(d);
        }
        fail(key, "must be a nonnegative integer");
    }

    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

void read_network(Section s, NetworkConfig& net) {
    s.read("alpha", net.pathloss_alpha);
    s.read("densities", net.densities);
    s.read("powers", net.powers);
    s.read("sir_thresholds", net.sir_thresholds);
    s.read("cache_sizes", net.cache_sizes);
    s.read("catalog_size", net.catalog_size);
    s.finish();
}

void read_popularity(Section s, PopularitySpec& p) {
    std::string which = "perfect";
    s.read("case", which);
    if (which == "perfect") {
        p.which = PopularityCase::perfect;
    } else if (which == "imperfect") {
        p.which = PopularityCase::imperfect;
    } else if (which == "unknown") {
        p.which = PopularityCase::unknown;
    } else {
        s.fail("case", "must be perfect, imperfect or unknown");
    }
    s.read("zipf_gamma", p.zipf_gamma);
    if (s.has("values")) {
        std::vector<double> v;
        s.read("values", v);
        p.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    s.read("epsilon", p.epsilon);
    s.read("observers", p.observers);
    s.read("request_prob", p.request_prob);
    s.read("slots", p.slots);
    s.finish();
    if (!(p.epsilon >= 0.0)) s.fail("epsilon", "must be nonnegative");
    if (p.observers == 0) s.fail("observers", "must be positive");
    if (p.slots == 0) s.fail("slots", "must be positive");
    if (!(p.request_prob > 0.0 && p.request_prob <= 1.0)) s.fail("request_prob", "must lie in (0, 1]");
}

void read_algorithm(Section s, AlgorithmSpec& a) {
    s.read("max_iters", a.max_iters);
    s.read("tol", a.tol);
    s.read("stochastic_slots", a.stochastic_slots);
    s.read("baseline_samples", a.baseline_samples);
    s.read("seed", a.seed);
    s.read("repeats", a.repeats);
    s.read("workers", a.workers);
    s.read("record_wall_time", a.record_wall_time);
    s.finish();
    if (a.repeats == 0) s.fail("repeats", "must be positive");
    if (a.workers == 0) s.fail("workers", "must be positive");
    if (a.baseline_samples < 10000) s.fail("baseline_samples", "must be at least 10000");
}

void read_simulation(Section s, SimConfig& sim) {
    s.read("trials", sim.trials);
    s.read("seed", sim.seed);
    s.read("window_radii", sim.window_radii);
    s.read("min_expected_count", sim.min_expected_count);
    s.read("tail_fraction", sim.tail_fraction);
    s.read("max_expected_count", sim.max_expected_count);
    s.read("workers", sim.workers);
    s.finish();
    if (sim.trials == 0) s.fail("trials", "must be positive");
    if (sim.workers == 0) s.fail("workers", "must be positive");
}

const std::vector<std::string> kSweepParams{"K3", "gamma", "epsilon", "L", "U"};

SweepSpec read_sweep(Section s) {
    SweepSpec sw;
    s.read("param", sw.param);
    s.read("values", sw.values);
    s.read("schemes", sw.schemes);
    s.read("k_offsets", sw.k_offsets);
    s.finish();
    if (std::find(kSweepParams.begin(), kSweepParams.end(), sw.param) == kSweepParams.end()) {
        s.fail("param", "must be one of K3, gamma, epsilon, L, U");
    }
    if (sw.values.empty()) s.fail("values", "must list at least one value");
    if (sw.schemes.empty()) s.fail("schemes", "must list at least one scheme");
    for (const auto& name : sw.schemes) parse_scheme(name);
    return sw;
}

std::size_t whole(double v, const std::string& what) {
    if (!(v >= 1.0 && v == std::floor(v))) throw ConfigError(what + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

bool is_random(const ExperimentConfig& cfg, Scheme s) {
    return cfg.popularity.which == PopularityCase::unknown || s == Scheme::stochastic || s == Scheme::baseline2;
}

// Single record for schemes that do not iterate.
std::vector<IterationRecord> one_shot(const PopularityInputs& in, const CachingMatrix& t, const CoefficientTable& coef,
                                      const NetworkConfig& net) {
    return {{0, stp(in.known.values(), t, coef), 0.0, stationarity(in.known.values(), t, coef, net.cache_sizes), 0.0}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    const json doc = parse_json(json_text);
    Section root(doc, "config");
    ExperimentConfig cfg;
    if (!root.has("network")) root.fail("network", "is required");
    read_network(Section(root.child("network"), "network"), cfg.network);
    if (root.has("popularity")) read_popularity(Section(root.child("popularity"), "popularity"), cfg.popularity);
    if (root.has("algorithm")) read_algorithm(Section(root.child("algorithm"), "algorithm"), cfg.algorithm);
    if (root.has("simulation")) read_simulation(Section(root.child("simulation"), "simulation"), cfg.simulation);
    if (root.has("sweep")) cfg.sweep = read_sweep(Section(root.child("sweep"), "sweep"));
    root.finish();

    cfg.network.validate();
    if (cfg.popularity.values && static_cast<std::size_t>(cfg.popularity.values->size()) != cfg.network.catalog_size) {
        throw ConfigError("popularity.values must have catalog_size entries");
    }
    if (cfg.popularity.values) PopularityVector check(*cfg.popularity.values);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

SweepSpec parse_sweep(const std::string& json_text) {
    const json doc = parse_json(json_text);
    if (doc.is_object() && doc.contains("sweep")) {
        Section root(doc, "sweep document");
        const SweepSpec sw = read_sweep(Section(root.child("sweep"), "sweep"));
        root.finish();
        return sw;
    }
    return read_sweep(Section(doc, "sweep"));
}

Scheme parse_scheme(const std::string& name) {
    if (name == "sca") return Scheme::sca;
    if (name == "robust") return Scheme::robust;
    if (name == "stochastic") return Scheme::stochastic;
    if (name == "baseline1") return Scheme::baseline1;
    if (name == "baseline2") return Scheme::baseline2;
    if (name == "baseline3") throw UnsupportedError("baseline3 is unsupported");
    throw ConfigError("unknown algorithm " + name);
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::sca: return "sca";
        case Scheme::robust: return "robust";
        case Scheme::stochastic: return "stochastic";
        case Scheme::baseline1: return "baseline1";
        case Scheme::baseline2: return "baseline2";
    }
    return "";
}

PopularityInputs popularity_inputs(const ExperimentConfig& cfg, std::uint64_t seed) {
    const PopularitySpec& p = cfg.popularity;
    PopularityVector truth = p.values ? PopularityVector(*p.values) : zipf(cfg.network.catalog_size, p.zipf_gamma);
    PopularityVector known = truth;
    if (p.which == PopularityCase::unknown) {
        const RequestStreamConfig stream{truth, p.observers, p.request_prob, seed};
        std::vector<RequestBatch> batches;
        for (std::size_t slot = 1; slot <= p.slots; ++slot) batches.push_back(sample_requests(stream, slot));
        known = empirical_popularity(batches);
    }
    UncertaintySet set = relative_uncertainty(known, p.epsilon);
    return {std::move(truth), std::move(known), std::move(set)};
}

RunOutcome run_scheme(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed) {
    const NetworkConfig& net = cfg.network;
    const AlgorithmSpec& alg = cfg.algorithm;
    const CoefficientTable coef = compute_coefficients(net);
    const PopularityInputs in = popularity_inputs(cfg, seed);
    auto iters_or = [&](std::size_t d) { return alg.max_iters > 0 ? alg.max_iters : d; };
    auto tol_or = [&](double d) { return alg.tol > 0.0 ? alg.tol : d; };

    RunOutcome out;
    switch (scheme) {
        case Scheme::sca: {
            ScaResult r = run_sca(in.known.values(), net, coef, StepSchedule::harmonic(),
                                  StopRule{iters_or(2000), tol_or(1e-5)}, std::nullopt, alg.workers);
            out.t = std::move(r.t);
            out.history = std::move(r.history);
            out.converged = r.converged;
            break;
        }
        case Scheme::robust: {
            RobustResult r = run_robust(in.set, net, coef, RobustStop{iters_or(100), tol_or(1e-6)});
            out.t = std::move(r.t);
            for (const auto& h : r.history) out.history.push_back({h.iter, h.y, h.iter == 0 ? 0.0 : 1.0, h.kkt_residual, h.wall_ms});
            out.converged = r.converged;
            break;
        }
        case Scheme::stochastic: {
            const RequestStreamConfig stream{in.truth, cfg.popularity.observers, cfg.popularity.request_prob, seed};
            StochStop stop;
            stop.max_slots = iters_or(alg.stochastic_slots);
            stop.tol = alg.tol > 0.0 ? alg.tol : 0.0;
            StochResult r = run_stochastic(stream, net, coef, StochasticSchedules::defaults(), stop, std::nullopt,
                                           alg.workers);
            out.t = std::move(r.t);
            for (const auto& h : r.history) {
                out.history.push_back({h.slot, h.objective, h.omega, h.stationarity, h.wall_ms});
            }
            break;
        }
        case Scheme::baseline1:
            out.t = most_popular(in.known, net);
            out.history = one_shot(in, out.t, coef, net);
            break;
        case Scheme::baseline2:
            out.t = iid_popularity(in.known, net, alg.baseline_samples, seed);
            out.history = one_shot(in, out.t, coef, net);
            break;
    }
    out.score = cfg.popularity.which == PopularityCase::imperfect ? worst_case_stp(in.set, out.t, coef).value
                                                                   : stp(in.truth.values(), out.t, coef);
    return out;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const SweepSpec& sweep, double value) {
    ExperimentConfig c = cfg;
    if (sweep.param == "K3") {
        const std::size_t k = whole(value, "K3");
        const std::size_t m = c.network.tiers();
        std::vector<long> offsets = sweep.k_offsets;
        if (offsets.empty()) {
            for (std::size_t i = 0; i < m; ++i) {
                offsets.push_back(static_cast<long>(cfg.network.cache_sizes[i]) -
                                  static_cast<long>(cfg.network.cache_sizes[m - 1]));
            }
        }
        if (offsets.size() != m) throw ConfigError("sweep.k_offsets needs one entry per tier");
        for (std::size_t i = 0; i < m; ++i) {
            const long ki = static_cast<long>(k) + offsets[i];
            if (ki < 1) throw ConfigError("sweep gives a cache size below 1");
            c.network.cache_sizes[i] = static_cast<std::size_t>(ki);
        }
        c.network.validate();
    } else if (sweep.param == "gamma") {
        c.popularity.values.reset();
        c.popularity.zipf_gamma = value;
    } else if (sweep.param == "epsilon") {
        if (!(value >= 0.0)) throw ConfigError("epsilon must be nonnegative");
        c.popularity.epsilon = value;
    } else if (sweep.param == "L") {
        c.popularity.slots = whole(value, "L");
    } else if (sweep.param == "U") {
        c.popularity.observers = whole(value, "U");
    } else {
        throw ConfigError("unknown sweep parameter " + sweep.param);
    }
    return c;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepSpec& sweep, std::size_t workers) {
    std::vector<Scheme> schemes;
    for (const auto& name : sweep.schemes) schemes.push_back(parse_scheme(name));
    std::vector<ExperimentConfig> points;
    for (double v : sweep.values) points.push_back(apply_sweep_value(cfg, sweep, v));

    const std::size_t tasks = points.size() * schemes.size();
    std::vector<SweepRow> rows(tasks);
    std::vector<std::exception_ptr> errors(tasks);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < tasks; i = next++) {
            const std::size_t point = i / schemes.size();
            const Scheme scheme = schemes[i % schemes.size()];
            try {
                const ExperimentConfig& c = points[point];
                const std::size_t repeats = is_random(c, scheme) ? c.algorithm.repeats : 1;
                double sum = 0.0;
                double sum_sq = 0.0;
                for (std::size_t r = 0; r < repeats; ++r) {
                    const double s = run_scheme(c, scheme, hash_keys({c.algorithm.seed, point, r})).score;
                    sum += s;
                    sum_sq += s * s;
                }
                const double n = static_cast<double>(repeats);
                const double mean = sum / n;
                const double var = repeats > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
                rows[i] = {sweep.param, sweep.values[point], scheme_name(scheme), mean, std::sqrt(var / n)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(std::max<std::size_t>(workers, 1), tasks); ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history, bool wall_time) {
    out << "iter,objective,step,stationarity,wall_ms\n";
    for (const auto& h : history) {
        out << h.iter << ',' << format_number(h.objective) << ',' << format_number(h.step) << ','
            << format_number(h.stationarity) << ',' << format_number(wall_time ? h.wall_ms : 0.0) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "param,value,scheme,objective,stderr\n";
    for (const auto& r : rows) {
        out << r.param << ',' << format_number(r.value) << ',' << r.scheme << ',' << format_number(r.objective) << ','
            << format_number(r.std_error) << '\n';
    }
}

}  // namespace cachenet

#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/mcsim.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"
#include "cachenet/sca.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachenet {

/// What the optimizer knows about the popularity distribution.
///   perfect:   a itself.
///   imperfect: the estimate a_hat with relative error bound epsilon; schemes
///              are scored by their worst case over the set.
///   unknown:   requests of `observers` users; non-adaptive schemes use the
///              request shares pooled over `slots` slots, scoring uses the
///              hidden a.
enum class PopularityCase { perfect, imperfect, unknown };

struct PopularitySpec {
    PopularityCase which = PopularityCase::perfect;
    double zipf_gamma = 0.55;
    /// Explicit distribution; overrides zipf_gamma when present.
    std::optional<Eigen::VectorXd> values;
    double epsilon = 0.0;
    std::size_t observers = 200;
    double request_prob = 0.9;
    std::size_t slots = 30;
};

struct AlgorithmSpec {
    /// Zero or negative picks the defaults: sca 2000 iterations at tol 1e-5,
    /// robust 100 at 1e-6, stochastic `stochastic_slots` with no early stop.
    std::size_t max_iters = 0;
    double tol = -1.0;
    /// Slots consumed by the stochastic algorithm.
    std::size_t stochastic_slots = 200;
    std::size_t baseline_samples = 10000;
    std::uint64_t seed = 1;
    /// Independent runs averaged per sweep point when the result is random.
    std::size_t repeats = 1;
    std::size_t workers = 1;
    /// Writes measured wall time in history CSVs; off gives byte-stable files.
    bool record_wall_time = true;
};

struct SweepSpec {
    /// K3, gamma, epsilon, L or U.
    std::string param;
    std::vector<double> values;
    std::vector<std::string> schemes;
    /// K sweeps set K_m = value + k_offsets[m]. Defaults to the offsets of the
    /// network's own cache sizes from the last tier.
    std::vector<long> k_offsets;
};

struct ExperimentConfig {
    NetworkConfig network;
    PopularitySpec popularity;
    AlgorithmSpec algorithm;
    SimConfig simulation;
    std::optional<SweepSpec> sweep;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or an
/// invalid network.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Parses a sweep document (either {"sweep": {...}} or the bare section).
SweepSpec parse_sweep(const std::string& json_text);

class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Scheme { sca, robust, stochastic, baseline1, baseline2 };
/// Throws UnsupportedError for baseline3 and ConfigError for anything else unknown.
Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

/// Popularity the scheme optimizes against and the one used for scoring.
struct PopularityInputs {
    PopularityVector truth;
    PopularityVector known;
    UncertaintySet set;
};
PopularityInputs popularity_inputs(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunOutcome {
    CachingMatrix t;
    std::vector<IterationRecord> history;
    /// STP under the true popularity, or worst case over the set when imperfect.
    double score = 0.0;
    bool converged = true;
};

/// Throws SolverError when the algorithm fails.
RunOutcome run_scheme(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed);

struct SweepRow {
    std::string param;
    double value = 0.0;
    std::string scheme;
    double objective = 0.0;
    double std_error = 0.0;
};

/// Config with one sweep parameter set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const SweepSpec& sweep, double value);

/// One row per (grid point, scheme), in grid order. Point i, repeat r uses
/// seed hash(master seed, i, r), so the rows do not depend on `workers`.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const SweepSpec& sweep, std::size_t workers);

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history, bool wall_time);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace cachenet

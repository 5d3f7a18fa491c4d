#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrmt/engine.hpp"

namespace mrmt {

struct RunContext {
    std::string engine_kind;
    std::size_t nodes = 1;
    std::size_t shard_size = 0;
    std::string architecture;
};

// Words per second over the full run, setup included: T = n / (setup + translation).
struct ThroughputReport {
    std::size_t words = 0;
    double setup_seconds = 0.0;
    double translation_seconds = 0.0;
    double total_seconds = 0.0;
    double words_per_second = 0.0;
    RunContext context;
};

ThroughputReport compute_throughput(std::size_t words, double setup_seconds,
                                    double translation_seconds);

// Ratio of a new configuration's throughput to a reference configuration's.
struct SpeedupReport {
    double throughput_new = 0.0;
    double throughput_reference = 0.0;
    double speedup = 0.0;
};

SpeedupReport compute_speedup(double throughput_new, double throughput_reference);

struct Observation {
    double units = 0.0;  // words or sentences, per the caller's axis
    double seconds = 0.0;
};

// t(n) = fixed + per_unit * n. `residual` is the max relative error of the
// fitted line over the observations it was fitted to.
struct LinearCostModel {
    double fixed_seconds = 0.0;
    double per_unit_seconds = 0.0;
    double residual = 0.0;

    double evaluate(double units) const { return fixed_seconds + per_unit_seconds * units; }
};

enum class FitWeighting {
    Uniform,      // plain least squares on (n, t)
    InverseTime,  // weights 1/t; keeps order-of-magnitude-spread rows comparable
};

// Least-squares fit of t = fixed + per_unit * n. Throws FitError on degenerate
// observations (fewer than two distinct n) or a non-physical result
// (per_unit <= 0 or fixed < 0).
LinearCostModel fit_cost_model(std::span<const Observation> observations,
                               FitWeighting weighting = FitWeighting::InverseTime);

// Smallest word count at which the setup share of total time drops to
// `epsilon`: ceil(fixed * (1 - eps) / (eps * per_unit)). Throws
// MeasurementError when the model has no per-unit cost.
std::uint64_t startup_insignificance_threshold(const LinearCostModel& model, double epsilon);

// Crossover of two per-shard cost lines in sentences, or nullopt when the
// lines are parallel or cross at a non-positive size.
std::optional<double> find_breakeven_shard(const LinearCostModel& a, const LinearCostModel& b);

struct ScalingRow {
    std::size_t nodes = 0;
    ThroughputReport report;
    double efficiency = 0.0;  // T_k / (k * T_1)
};

struct ScalingReport {
    std::vector<ScalingRow> rows;  // first row is the single-node baseline
    std::string error;             // non-empty when the sweep aborted early
};

// One job per node count over an identical artificial corpus. In simulate
// mode the cluster is in-process under virtual clocks; otherwise real workers
// are spun up on loopback and measured on the wall clock. Job failures abort
// the sweep with the completed rows preserved.
ScalingReport run_scaling_experiment(const EngineSpec& engine_spec, std::size_t total_words,
                                     const std::vector<std::size_t>& node_counts,
                                     std::size_t shard_size, bool simulate,
                                     double job_overhead_seconds = 0.0,
                                     Architecture architecture = Architecture::Service);

// h:mm:ss.cc (centisecond precision), e.g. 44.85 -> "0:00:44.85".
std::string format_hmmss(double seconds);

struct BenchRow {
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::string system;
    double seconds = 0.0;
    std::size_t nodes = 1;
    double words_per_second = 0.0;
};

std::string render_table(std::span<const BenchRow> rows);
std::string render_csv(std::span<const BenchRow> rows);

}  // namespace mrmt

#include "mrmt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "mrmt/error.hpp"
#include "mrmt/sim.hpp"
#include "mrmt/worker.hpp"

namespace mrmt {

ThroughputReport compute_throughput(std::size_t words, double setup_seconds,
                                    double translation_seconds) {
    if (setup_seconds < 0 || translation_seconds < 0)
        throw std::invalid_argument("times must be non-negative");

    ThroughputReport report;
    report.words = words;
    report.setup_seconds = setup_seconds;
    report.translation_seconds = translation_seconds;
    report.total_seconds = setup_seconds + translation_seconds;
    if (words == 0) {
        report.words_per_second = 0.0;
        return report;
    }
    if (report.total_seconds <= 0)
        throw MeasurementError("cannot measure throughput of " + std::to_string(words) +
                               " words in zero time");
    report.words_per_second = static_cast<double>(words) / report.total_seconds;
    return report;
}

SpeedupReport compute_speedup(double throughput_new, double throughput_reference) {
    if (throughput_reference <= 0)
        throw MeasurementError("speedup needs a positive reference throughput");
    return {throughput_new, throughput_reference, throughput_new / throughput_reference};
}

LinearCostModel fit_cost_model(std::span<const Observation> observations,
                               FitWeighting weighting) {
    if (observations.size() < 2)
        throw FitError(FitError::Kind::Degenerate, "cost-model fit needs at least 2 observations");

    bool distinct = false;
    for (const auto& obs : observations)
        if (obs.units != observations.front().units) distinct = true;
    if (!distinct)
        throw FitError(FitError::Kind::Degenerate,
                       "cost-model fit needs observations at distinct sizes");

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (const auto& obs : observations) {
        double w = 1.0;
        if (weighting == FitWeighting::InverseTime) {
            if (obs.seconds <= 0)
                throw std::invalid_argument("inverse-time weighting needs positive times");
            w = 1.0 / obs.seconds;
        }
        sw += w;
        swx += w * obs.units;
        swy += w * obs.seconds;
        swxx += w * obs.units * obs.units;
        swxy += w * obs.units * obs.seconds;
    }

    const double denom = sw * swxx - swx * swx;
    if (!(std::abs(denom) > 0))
        throw FitError(FitError::Kind::Degenerate, "cost-model fit is singular");

    LinearCostModel model;
    model.per_unit_seconds = (sw * swxy - swx * swy) / denom;
    model.fixed_seconds = (swy - model.per_unit_seconds * swx) / sw;

    if (!(model.per_unit_seconds > 0))
        throw FitError(FitError::Kind::NonPhysical,
                       "fitted per-unit cost is not positive: " +
                           std::to_string(model.per_unit_seconds));
    if (model.fixed_seconds < 0) {
        if (model.fixed_seconds < -1e-9)
            throw FitError(FitError::Kind::NonPhysical,
                           "fitted fixed cost is negative: " +
                               std::to_string(model.fixed_seconds));
        model.fixed_seconds = 0.0;  // float fuzz around a zero intercept
    }

    model.residual = 0.0;
    for (const auto& obs : observations)
        if (obs.seconds > 0)
            model.residual = std::max(
                model.residual, std::abs(model.evaluate(obs.units) - obs.seconds) / obs.seconds);
    return model;
}

std::uint64_t startup_insignificance_threshold(const LinearCostModel& model, double epsilon) {
    if (!(epsilon > 0) || !(epsilon < 1))
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (model.per_unit_seconds <= 0)
        throw MeasurementError("threshold undefined for a model with no per-unit cost");
    if (model.fixed_seconds <= 0) return 0;

    const double exact = model.fixed_seconds * (1.0 - epsilon) / (epsilon * model.per_unit_seconds);
    auto n = static_cast<std::uint64_t>(std::ceil(exact));

    // Tighten against float fuzz so the boundary property holds exactly:
    // share(n) <= eps and share(n-1) > eps.
    auto share = [&](std::uint64_t units) {
        return model.fixed_seconds / model.evaluate(static_cast<double>(units));
    };
    while (share(n) > epsilon) ++n;
    while (n > 0 && share(n - 1) <= epsilon) --n;
    return n;
}

std::optional<double> find_breakeven_shard(const LinearCostModel& a, const LinearCostModel& b) {
    const double slope_gap = b.per_unit_seconds - a.per_unit_seconds;
    if (slope_gap == 0) return std::nullopt;  // parallel lines never cross
    const double crossover = (a.fixed_seconds - b.fixed_seconds) / slope_gap;
    if (!std::isfinite(crossover) || crossover <= 0) return std::nullopt;
    return crossover;
}

namespace {

ThroughputReport sim_scaling_run(const EngineSpec& engine_spec, const Document& doc,
                                 std::size_t nodes, std::size_t shard_size, double overhead,
                                 Architecture architecture) {
    SimJobSpec spec;
    spec.source = doc;
    spec.shard_size = shard_size;
    spec.engine = engine_spec;
    spec.architecture = architecture;
    spec.workers.resize(nodes);
    spec.job_overhead_seconds = overhead;
    JobResult result = run_sim_job(spec);

    ThroughputReport report =
        compute_throughput(result.words, result.setup_seconds,
                           result.total_seconds - result.setup_seconds);
    report.context = {to_string(engine_spec.kind), nodes, shard_size, to_string(architecture)};
    return report;
}

ThroughputReport wall_scaling_run(const EngineSpec& engine_spec, const Document& doc,
                                  std::size_t nodes, std::size_t shard_size, double overhead,
                                  Architecture architecture) {
    std::vector<std::unique_ptr<WorkerService>> workers;
    Job job;
    job.job_id = "scaling-" + std::to_string(nodes);
    job.source = doc;
    job.shard_size = shard_size;
    for (std::size_t i = 0; i < nodes; ++i) {
        WorkerConfig config;
        config.engine_spec = engine_spec;
        config.architecture = architecture;
        auto worker = std::make_unique<WorkerService>(config);
        worker->start();
        job.workers.push_back(worker->address());
        workers.push_back(std::move(worker));
    }

    JobResult result = run_job(job);
    for (auto& worker : workers) worker->stop();

    ThroughputReport report =
        compute_throughput(result.words, overhead + result.setup_seconds,
                           result.total_seconds - result.setup_seconds);
    report.context = {to_string(engine_spec.kind), nodes, shard_size, to_string(architecture)};
    return report;
}

}  // namespace

ScalingReport run_scaling_experiment(const EngineSpec& engine_spec, std::size_t total_words,
                                     const std::vector<std::size_t>& node_counts,
                                     std::size_t shard_size, bool simulate,
                                     double job_overhead_seconds, Architecture architecture) {
    for (std::size_t k : node_counts)
        if (k == 0) throw std::invalid_argument("node counts must be >= 1");

    const std::size_t base_words = count_words(default_base_sentence());
    const std::size_t sentences = std::max<std::size_t>(1, total_words / base_words);
    const Document doc = generate_artificial(sentences, default_base_sentence());

    auto run_one = [&](std::size_t k) {
        return simulate ? sim_scaling_run(engine_spec, doc, k, shard_size, job_overhead_seconds,
                                          architecture)
                        : wall_scaling_run(engine_spec, doc, k, shard_size, job_overhead_seconds,
                                           architecture);
    };

    ScalingReport report;
    try {
        const ThroughputReport baseline = run_one(1);
        report.rows.push_back({1, baseline, 1.0});
        for (std::size_t k : node_counts) {
            if (k == 1) continue;  // baseline already covers it
            ThroughputReport r = run_one(k);
            const double efficiency =
                r.words_per_second /
                (static_cast<double>(k) * baseline.words_per_second);
            report.rows.push_back({k, r, efficiency});
        }
    } catch (const Error& e) {
        report.error = e.what();  // keep the completed rows
    }
    return report;
}

std::string format_hmmss(double seconds) {
    if (seconds < 0) seconds = 0;
    auto centis = static_cast<long long>(std::llround(seconds * 100.0));
    const long long h = centis / 360000;
    centis %= 360000;
    const long long m = centis / 6000;
    centis %= 6000;
    const long long s = centis / 100;
    const long long cc = centis % 100;

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%lld:%02lld:%02lld.%02lld", h, m, s, cc);
    return buf;
}

std::string render_table(std::span<const BenchRow> rows) {
    std::ostringstream out;
    out << std::setw(12) << "words" << std::setw(11) << "sentences" << "  " << std::left
        << std::setw(26) << "system" << std::right << std::setw(13) << "real time"
        << std::setw(7) << "nodes" << std::setw(12) << "words/s" << '\n';
    for (const auto& row : rows) {
        std::ostringstream wps;
        wps << std::fixed << std::setprecision(1) << row.words_per_second;
        out << std::setw(12) << row.words << std::setw(11) << row.sentences << "  " << std::left
            << std::setw(26) << row.system << std::right << std::setw(13)
            << format_hmmss(row.seconds) << std::setw(7) << row.nodes << std::setw(12)
            << wps.str() << '\n';
    }
    return out.str();
}

std::string render_csv(std::span<const BenchRow> rows) {
    std::ostringstream out;
    out << "words,sentences,system,seconds,nodes,words_per_second\n";
    for (const auto& row : rows) {
        out << row.words << ',' << row.sentences << ',' << row.system << ','
            << std::setprecision(10) << row.seconds << ',' << row.nodes << ','
            << std::setprecision(10) << row.words_per_second << '\n';
    }
    return out.str();
}

}  // namespace mrmt

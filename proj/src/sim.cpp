#include "mrmt/sim.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "mrmt/error.hpp"

namespace mrmt {

namespace {

enum class EventKind { ShardDone = 0, ShardFailed = 1, WorkerReady = 2 };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::WorkerReady;
    std::size_t worker = 0;
    std::size_t shard = 0;
    bool fatal = false;  // ShardFailed only: the worker dies with the shard

    // Min-heap order: earliest time first; completions before fresh
    // assignments at the same instant; lowest worker id breaks remaining ties.
    bool operator>(const Event& other) const {
        return std::tie(time, kind, worker) > std::tie(other.time, other.kind, other.worker);
    }
};

struct SimNode {
    std::unique_ptr<Engine> engine;  // service architecture keeps it for the whole run
    double speed = 1.0;
    int kill_after_shards = -1;
    int error_on_attempt = 0;
    bool ready = false;  // initial ready event processed
    std::size_t completions = 0;
    std::size_t assignments = 0;
    std::vector<std::string> shard_texts;  // in-flight shard payload
    double shard_cost = 0.0;
};

}  // namespace

Document run_sequential(const EngineSpec& engine_spec, const Document& source,
                        double* total_cost_seconds) {
    EngineSpec spec = engine_spec;
    spec.set_simulate(true);
    auto engine = create_engine(spec);

    Document out;
    out.sentences.reserve(source.size());
    double cost = engine->setup_cost_seconds();
    for (const auto& s : source.sentences) {
        Translation t = engine->translate(s);
        cost += t.cost_seconds;
        out.total_words += t.sentence.word_count;
        out.sentences.push_back(std::move(t.sentence));
    }
    if (total_cost_seconds) *total_cost_seconds = cost;
    return out;
}

JobResult run_sim_job(const SimJobSpec& spec) {
    if (spec.workers.empty()) throw std::invalid_argument("sim job needs at least one worker");
    if (spec.shard_size == 0) throw std::invalid_argument("shard_size must be >= 1");

    EngineSpec engine_spec = spec.engine;
    engine_spec.set_simulate(true);

    const std::vector<Shard> shards = make_shards(spec.source, spec.shard_size);
    const ShardingManifest manifest = manifest_of(shards);

    std::vector<std::string> labels;
    labels.reserve(spec.workers.size());
    for (std::size_t i = 0; i < spec.workers.size(); ++i)
        labels.push_back("sim-" + std::to_string(i));

    SchedulerCore scheduler(shards.size(), labels, spec.retry_limit);
    std::vector<std::vector<std::string>> results(shards.size());
    std::vector<ShardTiming> timing(shards.size());

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    std::vector<SimNode> nodes(spec.workers.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        SimNode& node = nodes[i];
        node.speed = spec.workers[i].speed;
        node.kill_after_shards = spec.workers[i].kill_after_shards;
        node.error_on_attempt = spec.workers[i].error_on_attempt;
        if (node.speed <= 0) throw std::invalid_argument("worker speed must be positive");

        double ready_at = 0.0;
        if (spec.architecture == Architecture::Service) {
            node.engine = create_engine(engine_spec);
            ready_at = node.engine->setup_cost_seconds() / node.speed;
        }
        events.push({ready_at, EventKind::WorkerReady, i, 0});
    }

    double makespan = 0.0;

    // Translates the shard through the node's engine and queues its outcome.
    auto dispatch = [&](std::size_t w, double now) {
        SimNode& node = nodes[w];
        auto assignment = scheduler.try_assign(w);
        if (!assignment) return;
        const Shard& shard = shards[assignment->shard_id];
        node.assignments++;

        if (node.error_on_attempt > 0 &&
            node.assignments == static_cast<std::size_t>(node.error_on_attempt)) {
            // Transient fault: the shard bounces immediately, the node lives on.
            events.push({now, EventKind::ShardFailed, w, assignment->shard_id, false});
            return;
        }

        Engine* engine = node.engine.get();
        std::unique_ptr<Engine> scratch;
        double cost = 0.0;
        if (spec.architecture == Architecture::Simple) {
            scratch = create_engine(engine_spec);
            engine = scratch.get();
            cost += engine->setup_cost_seconds();
        }

        node.shard_texts.clear();
        node.shard_texts.reserve(shard.sentences.size());
        for (const auto& s : shard.sentences) {
            Translation t = engine->translate(s);
            cost += t.cost_seconds;
            node.shard_texts.push_back(std::move(t.sentence.text));
        }
        node.shard_cost = cost;

        const double done_at = now + cost / node.speed;
        const bool dies = node.kill_after_shards >= 0 &&
                          node.completions >= static_cast<std::size_t>(node.kill_after_shards);
        events.push({done_at, dies ? EventKind::ShardFailed : EventKind::ShardDone, w,
                     assignment->shard_id, dies});
    };

    // Refills idle live workers when failures return shards to the pending set.
    auto wake_idle = [&](double now) {
        for (std::size_t w = 0; w < nodes.size(); ++w)
            if (scheduler.worker_state(w) == SchedulerCore::WorkerState::Idle &&
                scheduler.pending_count() > 0)
                dispatch(w, now);
    };

    while (!events.empty() && !scheduler.done() && !scheduler.failed()) {
        const Event ev = events.top();
        events.pop();

        switch (ev.kind) {
            case EventKind::WorkerReady:
                nodes[ev.worker].ready = true;
                dispatch(ev.worker, ev.time);
                break;
            case EventKind::ShardDone: {
                SimNode& node = nodes[ev.worker];
                if (scheduler.on_result(ev.shard, ev.worker) ==
                    SchedulerCore::Disposition::Accepted) {
                    results[ev.shard] = std::move(node.shard_texts);
                    timing[ev.shard] = {ev.shard,
                                        scheduler.worker_label(ev.worker),
                                        shards[ev.shard].word_count,
                                        node.shard_cost,
                                        ev.time - node.shard_cost / node.speed,
                                        node.shard_cost / node.speed,
                                        scheduler.attempts(ev.shard)};
                }
                node.completions++;
                makespan = std::max(makespan, ev.time);
                dispatch(ev.worker, ev.time);
                break;
            }
            case EventKind::ShardFailed: {
                scheduler.on_failure(ev.shard, ev.worker,
                                     ev.fatal ? "worker died mid-shard" : "injected engine error");
                if (ev.fatal) {
                    scheduler.on_worker_removed(ev.worker);
                } else {
                    scheduler.on_worker_recovered(ev.worker);  // transient: immediately healthy
                    dispatch(ev.worker, ev.time);
                }
                wake_idle(ev.time);
                break;
            }
        }

        // Work conservation: no ready worker may sit idle while shards are
        // pending and unassigned.
        if (!scheduler.done() && !scheduler.failed() && scheduler.pending_count() > 0) {
            for (std::size_t w = 0; w < nodes.size(); ++w)
                if (nodes[w].ready &&
                    scheduler.worker_state(w) == SchedulerCore::WorkerState::Idle)
                    throw std::logic_error("scheduler invariant violated: worker " +
                                           std::to_string(w) + " idle with pending shards");
        }
    }

    if (scheduler.failed()) throw JobError("simulated job failed: " + scheduler.failure_reason());
    if (!scheduler.done())
        throw JobError("simulated job stalled with " + std::to_string(scheduler.pending_count()) +
                       " shard(s) pending");

    std::vector<TranslatedShard> parts;
    parts.reserve(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i) parts.push_back({i, std::move(results[i])});

    JobResult result;
    result.output = reassemble(parts, manifest);
    result.timing = std::move(timing);
    result.failures = scheduler.failures();
    result.setup_seconds = spec.job_overhead_seconds;
    result.total_seconds = spec.job_overhead_seconds + makespan;
    result.words = spec.source.total_words;
    return result;
}

}  // namespace mrmt
